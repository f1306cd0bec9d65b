#pragma once

// Review-session service: owns sessions, serializes writers per session,
// persists every event before acknowledging it and rebuilds its state from
// disk on start-up.

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>

#include "repro/dataset.hpp"
#include "repro/extraction.hpp"
#include "repro/session.hpp"

namespace repro {

class NotFound : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

struct SessionSnapshot {
  std::string session_id;
  std::string study_id;
  SessionState state;
  StudyGraph extracted;
  StudyGraph working_copy;
  std::vector<LikertRating> ratings;
  std::size_t event_count = 0;
  CorrectionSet corrections;
};

class SessionService {
 public:
  using Clock = std::function<std::string()>;

  explicit SessionService(fs::path data_dir, FinalizeOptions options = {}, Clock clock = [] { return utc_timestamp(); })
      : data_dir_(std::move(data_dir)), options_(std::move(options)), clock_(std::move(clock)) {
    fs::create_directories(sessions_root());
    fs::create_directories(studies_root());
    reload();
  }

  const fs::path& data_dir() const { return data_dir_; }
  fs::path sessions_root() const { return data_dir_ / "sessions"; }
  fs::path studies_root() const { return data_dir_ / "studies"; }

  /// Throws InvalidGraph.
  std::string create_session(const StudyGraph& graph) {
    ValidationReport report = validate_graph(graph);
    if (!report.clean()) throw InvalidGraph(std::move(report));
    const std::string doc = serialize_graph(graph);
    const std::string prefix = hex64(fnv1a64(doc));

    std::unique_lock lock(map_mu_);
    std::string id;
    for (std::size_t n = 1;; ++n) {
      id = prefix + "-" + std::to_string(n);
      if (!sessions_.count(id) && !fs::exists(sessions_root() / id)) break;
    }
    fs::path dir = sessions_root() / id;
    fs::create_directories(dir);
    write_text_file((dir / kExtractedFile).string(), doc);
    write_text_file((dir / kSessionEventsFile).string(), "");
    sessions_.emplace(id, std::make_unique<Entry>(ReviewSession(id, graph)));
    return id;
  }

  SessionSnapshot get(const std::string& id) const {
    Entry& e = entry(id);
    std::lock_guard lock(e.mu);
    const ReviewSession& s = e.session;
    return {s.session_id(), s.study_id(), s.state(), s.extracted(), s.working_copy(),
            s.ratings(),    s.events().size(), s.corrections()};
  }

  std::vector<std::string> session_ids() const {
    std::shared_lock lock(map_mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : sessions_) out.push_back(id);
    return out;
  }

  /// Validates, persists, then applies. A zero sequence number or empty
  /// timestamp is filled in by the service.
  EventAck apply_event(const std::string& id, SessionEvent ev) {
    if (std::holds_alternative<Finalize>(ev.payload)) {
      finalize(id);
      Entry& e = entry(id);
      std::lock_guard lock(e.mu);
      EventAck ack;
      ack.sequence_no = e.session.events().back().sequence_no;
      ack.metrics = e.session.live_metrics();
      return ack;
    }
    Entry& e = entry(id);
    std::lock_guard lock(e.mu);
    if (ev.sequence_no == 0) ev.sequence_no = e.session.next_sequence_no();
    if (ev.timestamp.empty()) ev.timestamp = clock_();
    StudyGraph next = e.session.check(ev);
    append_line(sessions_root() / id / kSessionEventsFile, serialize_event_line(ev));
    return e.session.commit(std::move(ev), std::move(next));
  }

  /// Throws SessionFinalized or IncompleteReview.
  FinalizedOutputs finalize(const std::string& id) {
    Entry& e = entry(id);
    std::lock_guard lock(e.mu);
    ReviewSession& s = e.session;
    s.check_finalizable(options_);
    SessionEvent ev{s.next_sequence_no(), clock_(), Finalize{}};
    StudyGraph next = s.check(ev);
    FinalizedOutputs out = s.outputs();
    std::vector<SessionEvent> log = s.events();
    log.push_back(ev);
    write_study(studies_root(), s.extracted(), out, log);
    append_line(sessions_root() / id / kSessionEventsFile, serialize_event_line(ev));
    s.commit(std::move(ev), std::move(next));
    return out;
  }

  std::vector<std::string> studies() const {
    std::vector<std::string> out;
    for (const auto& rec : load_dataset(data_dir_)) out.push_back(rec.name);
    return out;
  }

  DatasetReport summary() const { return report_dataset(load_dataset(data_dir_)); }

  /// Drops in-memory state and rebuilds every session from its event log.
  void reload() {
    std::unique_lock lock(map_mu_);
    sessions_.clear();
    if (!fs::is_directory(sessions_root())) return;
    for (const auto& d : fs::directory_iterator(sessions_root())) {
      if (!d.is_directory() || !fs::exists(d.path() / kExtractedFile)) continue;
      std::string id = d.path().filename().string();
      StudyGraph extracted = load_study((d.path() / kExtractedFile).string());
      std::vector<SessionEvent> events;
      if (fs::exists(d.path() / kSessionEventsFile))
        events = parse_event_log(read_text_file((d.path() / kSessionEventsFile).string()));
      sessions_.emplace(id, std::make_unique<Entry>(replay(id, extracted, events)));
    }
  }

 private:
  struct Entry {
    explicit Entry(ReviewSession s) : session(std::move(s)) {}
    mutable std::mutex mu;
    ReviewSession session;
  };

  Entry& entry(const std::string& id) const {
    std::shared_lock lock(map_mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("no session '" + id + "'");
    return *it->second;
  }

  fs::path data_dir_;
  FinalizeOptions options_;
  Clock clock_;
  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

// ---------------------------------------------------------------------------
// HTTP binding

inline Json to_json(const LikertRating& r) {
  return Json{{"subject", r.subject},
              {"category", to_string(r.category)},
              {"scale", points(r.scale)},
              {"value", r.value}};
}

inline Json to_json(const LiveMetrics& m) {
  return Json{{"statement_edits", m.statement_edits}, {"link_edits", m.link_edits},
              {"detail_edits", m.detail_edits},       {"missing_results", m.missing_results},
              {"incorrect_results", m.incorrect_results}, {"supplements", m.supplements},
              {"ratings", m.ratings}};
}

inline Json to_json(const EventAck& ack) {
  Json j = Json::object();
  j["seq"] = ack.sequence_no;
  if (ack.levenshtein) j["levenshtein"] = *ack.levenshtein;
  if (ack.relative_edit_pct) j["relative_edit_pct"] = *ack.relative_edit_pct;
  j["metrics"] = to_json(ack.metrics);
  return j;
}

inline Json to_json(const ValidationReport& r) {
  Json arr = Json::array();
  for (const auto& v : r.violations) {
    Json j = Json::object();
    j["code"] = to_string(v.code);
    j["severity"] = v.severity() == Severity::error ? "error" : "warning";
    if (v.element_id) j["element_id"] = *v.element_id;
    j["message"] = v.message;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline Json to_json(const SessionSnapshot& s) {
  Json j = Json::object();
  j["session_id"] = s.session_id;
  j["study_id"] = s.study_id;
  j["state"] = to_string(s.state);
  j["event_count"] = s.event_count;
  j["extracted"] = to_json(s.extracted);
  j["working_copy"] = to_json(s.working_copy);
  j["ratings"] = Json::array();
  for (const auto& r : s.ratings) j["ratings"].push_back(to_json(r));
  j["corrections"] = to_json(s.corrections);
  return j;
}

inline Json to_json(const FinalizedOutputs& out) {
  Json j = Json::object();
  j["corrected"] = to_json(out.corrected);
  j["corrections"] = to_json(out.corrections);
  j["ratings"] = Json::array();
  for (const auto& r : out.ratings) j["ratings"].push_back(to_json(r));
  return j;
}

namespace detail {

inline void reply_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump_canonical(body), "application/json");
}

inline void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message,
                        const ValidationReport* report = nullptr) {
  Json body{{"error", code}, {"message", message}};
  if (report) body["violations"] = to_json(*report);
  reply_json(res, status, body);
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const NotFound& e) {
    reply_error(res, 404, "not_found", e.what());
  } catch (const SessionFinalized& e) {
    reply_error(res, 409, "session_finalized", e.what());
  } catch (const IncompleteReview& e) {
    reply_error(res, 409, "incomplete_review", e.what());
  } catch (const ValidationRejected& e) {
    reply_error(res, 422, "validation_rejected", e.what(), &e.report());
  } catch (const InvalidGraph& e) {
    reply_error(res, 422, "invalid_graph", e.what(), &e.report());
  } catch (const InvalidRating& e) {
    reply_error(res, 400, "invalid_payload", e.what());
  } catch (const InvalidPayload& e) {
    reply_error(res, 400, "invalid_payload", e.what());
  } catch (const ParseError& e) {
    reply_error(res, 400, "parse_error", e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "internal_error", e.what());
  }
}

}  // namespace detail

/// Registers the service API on `server`:
///   POST /sessions                 body: .study document
///   GET  /sessions/{id}
///   POST /sessions/{id}/events     body: {"kind", "payload"}
///   POST /sessions/{id}/finalize
///   GET  /studies
///   GET  /reports/summary          tab-separated error table
inline void mount_routes(httplib::Server& server, SessionService& service) {
  server.Post("/sessions", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      std::string id = service.create_session(parse_graph(req.body));
      detail::reply_json(res, 201, to_json(service.get(id)));
    });
  });

  server.Get(R"(/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { detail::reply_json(res, 200, to_json(service.get(req.matches[1]))); });
  });

  server.Post(R"(/sessions/([^/]+)/events)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] {
      std::string id = req.matches[1];
      service.get(id);  // 404 before payload errors
      detail::reply_json(res, 200, to_json(service.apply_event(id, parse_event(req.body))));
    });
  });

  server.Post(R"(/sessions/([^/]+)/finalize)", [&](const httplib::Request& req, httplib::Response& res) {
    detail::guarded(res, [&] { detail::reply_json(res, 200, to_json(service.finalize(req.matches[1]))); });
  });

  server.Get("/studies", [&](const httplib::Request&, httplib::Response& res) {
    detail::guarded(res, [&] { detail::reply_json(res, 200, Json{{"studies", service.studies()}}); });
  });

  server.Get("/reports/summary", [&](const httplib::Request&, httplib::Response& res) {
    detail::guarded(res, [&] {
      auto studies = load_dataset(service.data_dir());
      if (studies.empty()) {
        detail::reply_error(res, 404, "not_found", "no finalized studies");
        return;
      }
      res.status = 200;
      res.set_content(format_error_table(report_dataset(studies).errors), "text/tab-separated-values");
    });
  });
}

}  // namespace repro
