#pragma once

// Event-sourced review sessions.
//
// A session starts from an extracted graph. Every reviewer action is a
// SessionEvent; folding the events over the extracted graph yields the
// working copy. Events that would leave the working copy invalid are
// rejected and leave the session untouched.
//
// List edits keep one canonical order so that the final graph can be diffed
// back into the same correction set: entries that also exist in the extracted
// graph keep their extracted order, new entries follow in insertion order.
// Restoring a removed link or result puts it back in its original place.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "repro/corrections.hpp"
#include "repro/graph.hpp"
#include "repro/json_util.hpp"
#include "repro/levenshtein.hpp"
#include "repro/likert.hpp"
#include "repro/study_io.hpp"
#include "repro/validate.hpp"

namespace repro {

enum class EventKind { edit_statement, edit_links, edit_details, edit_result, supplement, rate, finalize };

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::edit_statement: return "edit_statement";
    case EventKind::edit_links: return "edit_links";
    case EventKind::edit_details: return "edit_details";
    case EventKind::edit_result: return "edit_result";
    case EventKind::supplement: return "supplement";
    case EventKind::rate: return "rate";
    case EventKind::finalize: return "finalize";
  }
  return "";
}

inline std::optional<EventKind> event_kind_from(std::string_view s) {
  for (auto k : {EventKind::edit_statement, EventKind::edit_links, EventKind::edit_details, EventKind::edit_result,
                 EventKind::supplement, EventKind::rate, EventKind::finalize})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct EditStatement {
  Id element_id;
  std::string text;
  friend bool operator==(const EditStatement&, const EditStatement&) = default;
};

struct EditLinks {
  Id element_id;
  LinkField field = LinkField::exp_hyp;
  IdList add;
  IdList remove;
  friend bool operator==(const EditLinks&, const EditLinks&) = default;
};

struct EditDetails {
  Id element_id;
  std::optional<std::vector<MetricSpec>> metrics;
  std::optional<std::vector<std::string>> statistics;
  std::optional<std::string> strategy;
  std::optional<std::vector<AssessmentTest>> tests;
  friend bool operator==(const EditDetails&, const EditDetails&) = default;
};

struct EditResult {
  enum class Op { set, remove };
  Id element_id;
  Op op = Op::set;
  ResultRecord record;  // set: the new record; remove: only metric_name/context are read
  friend bool operator==(const EditResult&, const EditResult&) = default;
};

struct SupplementElement {
  Element element;
  friend bool operator==(const SupplementElement&, const SupplementElement&) = default;
};

struct Rate {
  LikertRating rating;
  friend bool operator==(const Rate&, const Rate&) = default;
};

struct Finalize {
  friend bool operator==(const Finalize&, const Finalize&) = default;
};

using EventPayload = std::variant<EditStatement, EditLinks, EditDetails, EditResult, SupplementElement, Rate, Finalize>;

inline EventKind kind_of(const EventPayload& p) { return static_cast<EventKind>(p.index()); }

struct SessionEvent {
  std::uint64_t sequence_no = 0;
  std::string timestamp;
  EventPayload payload;

  EventKind kind() const { return kind_of(payload); }
  friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

// ---------------------------------------------------------------------------
// Errors

class SessionFinalized : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InvalidPayload : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InvalidGraph : public std::invalid_argument {
 public:
  explicit InvalidGraph(ValidationReport report)
      : std::invalid_argument("graph fails validation: " + first_error(report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  static std::string first_error(const ValidationReport& r) {
    auto errors = r.errors();
    return errors.empty() ? std::string() : std::string(to_string(errors.front().code)) + " " + errors.front().message;
  }
  ValidationReport report_;
};

class ValidationRejected : public std::invalid_argument {
 public:
  explicit ValidationRejected(ValidationReport report)
      : std::invalid_argument("edit rejected: " + describe(report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  static std::string describe(const ValidationReport& r) {
    auto errors = r.errors();
    return errors.empty() ? std::string() : std::string(to_string(errors.front().code)) + ": " + errors.front().message;
  }
  ValidationReport report_;
};

class IncompleteReview : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Canonical list order

namespace detail {

/// `current` reordered so ids shared with `original` come first in their
/// original order, followed by the rest in their current order.
template <class T, class KeyFn>
std::vector<T> canonical_order(const std::vector<T>& original, const std::vector<T>& current, KeyFn key) {
  std::vector<T> out;
  out.reserve(current.size());
  for (const auto& o : original) {
    auto it = std::find_if(current.begin(), current.end(), [&](const T& c) { return key(c) == key(o); });
    if (it != current.end()) out.push_back(*it);
  }
  for (const auto& c : current) {
    bool shared = std::any_of(original.begin(), original.end(), [&](const T& o) { return key(o) == key(c); });
    if (!shared) out.push_back(c);
  }
  return out;
}

inline IdList edit_id_list(const IdList& current, const IdList& add, const IdList& remove) {
  IdList out;
  for (const auto& id : current)
    if (std::find(remove.begin(), remove.end(), id) == remove.end()) out.push_back(id);
  for (const auto& id : add)
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  return out;
}

inline const IdList* extracted_links(const StudyGraph& extracted, const Id& owner, LinkField f) {
  if (f == LinkField::exp_hyp) {
    const Experiment* e = find_experiment(extracted, owner);
    return e ? &e->hypothesis_ids : nullptr;
  }
  const Interpretation* i = find_interpretation(extracted, owner);
  if (!i) return nullptr;
  return f == LinkField::int_hyp ? &i->hypothesis_ids : &i->experiment_ids;
}

inline std::vector<ResultRecord> edit_results(const std::vector<ResultRecord>& current, const EditResult& ev) {
  std::vector<ResultRecord> out = current;
  const ResultKey key = key_of(ev.record);
  auto it = std::find_if(out.begin(), out.end(), [&](const ResultRecord& r) { return key_of(r) == key; });
  if (ev.op == EditResult::Op::remove) {
    if (it == out.end())
      throw InvalidPayload("no result ('" + key.metric_name + "', '" + key.context + "') on '" + ev.element_id + "'");
    out.erase(it);
  } else if (it != out.end()) {
    *it = ev.record;
  } else {
    out.push_back(ev.record);
  }
  return out;
}

inline const std::string& statement_of(const Element& e) {
  return std::visit(
      [](const auto& x) -> const std::string& {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Experiment>) return x.description;
        else return x.statement;
      },
      e);
}

}  // namespace detail

/// Applies one non-finalize event to a graph; `extracted` anchors the
/// canonical list order. Throws InvalidPayload on malformed events. Does not
/// validate the result.
inline StudyGraph apply_to_graph(StudyGraph g, const StudyGraph& extracted, const EventPayload& payload) {
  auto canonical_ids = [&](const Id& owner, LinkField f, const IdList& list) {
    const IdList* orig = detail::extracted_links(extracted, owner, f);
    return orig ? detail::canonical_order(*orig, list, [](const Id& id) { return id; }) : list;
  };

  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, EditStatement>) {
          if (auto* h = find_hypothesis(g, ev.element_id)) h->statement = ev.text;
          else if (auto* e = find_experiment(g, ev.element_id)) e->description = ev.text;
          else if (auto* i = find_interpretation(g, ev.element_id)) i->statement = ev.text;
          else throw InvalidPayload("unknown element '" + ev.element_id + "'");
        } else if constexpr (std::is_same_v<T, EditLinks>) {
          if (ev.field == LinkField::exp_hyp) {
            auto* e = find_experiment(g, ev.element_id);
            if (!e) throw InvalidPayload("exp_hyp links need an experiment, got '" + ev.element_id + "'");
            e->hypothesis_ids =
                canonical_ids(e->id, ev.field, detail::edit_id_list(e->hypothesis_ids, ev.add, ev.remove));
          } else {
            auto* i = find_interpretation(g, ev.element_id);
            if (!i)
              throw InvalidPayload(std::string(to_string(ev.field)) + " links need an interpretation, got '" +
                                   ev.element_id + "'");
            IdList& target = ev.field == LinkField::int_hyp ? i->hypothesis_ids : i->experiment_ids;
            target = canonical_ids(i->id, ev.field, detail::edit_id_list(target, ev.add, ev.remove));
          }
        } else if constexpr (std::is_same_v<T, EditDetails>) {
          auto* e = find_experiment(g, ev.element_id);
          if (!e) throw InvalidPayload("details belong to experiments, got '" + ev.element_id + "'");
          if (ev.metrics) e->metrics = *ev.metrics;
          if (ev.statistics) e->statistics = *ev.statistics;
          if (ev.strategy) e->strategy = *ev.strategy;
          if (ev.tests) e->tests = *ev.tests;
        } else if constexpr (std::is_same_v<T, EditResult>) {
          auto* e = find_experiment(g, ev.element_id);
          if (!e) throw InvalidPayload("results belong to experiments, got '" + ev.element_id + "'");
          auto edited = detail::edit_results(e->results, ev);
          const Experiment* orig = find_experiment(extracted, e->id);
          e->results = orig ? detail::canonical_order(orig->results, edited, key_of) : edited;
        } else if constexpr (std::is_same_v<T, SupplementElement>) {
          const Id& id = id_of(ev.element);
          if (id.empty()) throw InvalidPayload("supplemented element needs an id");
          if (kind_of(g, id)) throw InvalidPayload("id '" + id + "' already exists");
          std::visit(
              [&](const auto& x) {
                using X = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<X, Hypothesis>) g.hypotheses.push_back(x);
                else if constexpr (std::is_same_v<X, Experiment>) g.experiments.push_back(x);
                else g.interpretations.push_back(x);
              },
              ev.element);
        } else if constexpr (std::is_same_v<T, Rate>) {
          // ratings do not touch the graph
        } else {
          throw InvalidPayload("finalize is not a graph edit");
        }
      },
      payload);
  return g;
}

// ---------------------------------------------------------------------------
// Correction accumulator
//
// Folds events into a correction set without consulting the working copy:
// it keeps the net state of every touched field and compares it with the
// extracted value when asked. compare_graphs(extracted, working copy) must
// agree with it.

class CorrectionAccumulator {
 public:
  explicit CorrectionAccumulator(const StudyGraph& extracted) : extracted_(&extracted) {}

  void fold(const EventPayload& payload) {
    std::visit([&](const auto& ev) { on(ev); }, payload);
  }

  CorrectionSet correction_set() const {
    const StudyGraph& x = *extracted_;
    CorrectionSet set;
    set.study_id = x.metadata.source_id;

    auto statement_edit = [&](const Id& id, ElementKind kind, const std::string& original) {
      auto it = statements_.find(id);
      if (it != statements_.end() && it->second != original)
        set.statement_edits.push_back({id, kind, original, it->second});
    };
    auto link_edit = [&](const Id& id, LinkField f, const IdList& original) {
      auto it = links_.find({id, f});
      if (it == links_.end()) return;
      LinkEdit edit{id, f, {}, {}};
      for (const auto& l : it->second)
        if (std::find(original.begin(), original.end(), l) == original.end()) edit.added.push_back(l);
      for (const auto& l : original)
        if (std::find(it->second.begin(), it->second.end(), l) == it->second.end()) edit.removed.push_back(l);
      if (!edit.added.empty() || !edit.removed.empty()) set.link_edits.push_back(std::move(edit));
    };

    for (const auto& h : x.hypotheses) statement_edit(h.id, ElementKind::hypothesis, h.statement);
    for (const auto& e : x.experiments) {
      statement_edit(e.id, ElementKind::experiment, e.description);
      link_edit(e.id, LinkField::exp_hyp, e.hypothesis_ids);
      if (auto it = details_.find(e.id); it != details_.end()) {
        const Experiment& now = it->second;
        if (now.metrics != e.metrics) set.detail_edits.push_back({e.id, DetailCategory::metrics, true});
        if (now.statistics != e.statistics) set.detail_edits.push_back({e.id, DetailCategory::statistics, true});
        if (now.strategy != e.strategy) set.detail_edits.push_back({e.id, DetailCategory::strategy, true});
        if (now.tests != e.tests) set.detail_edits.push_back({e.id, DetailCategory::tests, true});
      }
      if (auto it = results_.find(e.id); it != results_.end()) {
        if (auto edit = result_edit(e, it->second)) set.result_edits.push_back(std::move(*edit));
      }
    }
    for (const auto& i : x.interpretations) {
      statement_edit(i.id, ElementKind::interpretation, i.statement);
      link_edit(i.id, LinkField::int_hyp, i.hypothesis_ids);
      link_edit(i.id, LinkField::int_exp, i.experiment_ids);
    }

    for (auto kind : {ElementKind::hypothesis, ElementKind::experiment, ElementKind::interpretation})
      for (const auto& s : supplements_)
        if (kind_of(s) == kind) set.supplements.push_back(s);
    return set;
  }

 private:
  bool extracted_has(const Id& id) const { return kind_of(*extracted_, id).has_value(); }

  Element* supplement(const Id& id) {
    for (auto& s : supplements_)
      if (id_of(s) == id) return &s;
    return nullptr;
  }

  void on(const EditStatement& ev) {
    if (extracted_has(ev.element_id)) {
      statements_[ev.element_id] = ev.text;
    } else if (Element* s = supplement(ev.element_id)) {
      std::visit(
          [&](auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Experiment>) x.description = ev.text;
            else x.statement = ev.text;
          },
          *s);
    }
  }

  void on(const EditLinks& ev) {
    if (extracted_has(ev.element_id)) {
      const IdList* orig = detail::extracted_links(*extracted_, ev.element_id, ev.field);
      if (!orig) return;
      auto [it, fresh] = links_.try_emplace({ev.element_id, ev.field}, *orig);
      it->second = detail::edit_id_list(it->second, ev.add, ev.remove);
    } else if (Element* s = supplement(ev.element_id)) {
      if (auto* e = std::get_if<Experiment>(s); e && ev.field == LinkField::exp_hyp) {
        e->hypothesis_ids = detail::edit_id_list(e->hypothesis_ids, ev.add, ev.remove);
      } else if (auto* i = std::get_if<Interpretation>(s); i && ev.field != LinkField::exp_hyp) {
        IdList& t = ev.field == LinkField::int_hyp ? i->hypothesis_ids : i->experiment_ids;
        t = detail::edit_id_list(t, ev.add, ev.remove);
      }
    }
  }

  void on(const EditDetails& ev) {
    Experiment* target = nullptr;
    if (const Experiment* orig = find_experiment(*extracted_, ev.element_id)) {
      target = &details_.try_emplace(ev.element_id, *orig).first->second;
    } else if (Element* s = supplement(ev.element_id)) {
      target = std::get_if<Experiment>(s);
    }
    if (!target) return;
    if (ev.metrics) target->metrics = *ev.metrics;
    if (ev.statistics) target->statistics = *ev.statistics;
    if (ev.strategy) target->strategy = *ev.strategy;
    if (ev.tests) target->tests = *ev.tests;
  }

  void on(const EditResult& ev) {
    if (const Experiment* orig = find_experiment(*extracted_, ev.element_id)) {
      auto [it, fresh] = results_.try_emplace(ev.element_id, orig->results);
      it->second = detail::edit_results(it->second, ev);
    } else if (Element* s = supplement(ev.element_id)) {
      if (auto* e = std::get_if<Experiment>(s)) e->results = detail::edit_results(e->results, ev);
    }
  }

  void on(const SupplementElement& ev) { supplements_.push_back(ev.element); }
  void on(const Rate&) {}
  void on(const Finalize&) {}

  static std::optional<ResultEdit> result_edit(const Experiment& orig, const std::vector<ResultRecord>& now) {
    ResultEdit edit{orig.id, {}, {}, {}};
    for (const auto& r : orig.results) {
      auto it = std::find_if(now.begin(), now.end(), [&](const ResultRecord& n) { return key_of(n) == key_of(r); });
      if (it == now.end()) {
        edit.removed.push_back(key_of(r));
        continue;
      }
      if (*it == r) continue;
      ResultError err = ResultError::none;
      if (!(it->value == r.value))
        err = std::holds_alternative<MissingValue>(r.value) ? ResultError::missing : ResultError::incorrect;
      edit.changed.push_back({*it, err});
    }
    for (const auto& n : now) {
      bool known = std::any_of(orig.results.begin(), orig.results.end(),
                               [&](const ResultRecord& r) { return key_of(r) == key_of(n); });
      if (!known) edit.added.push_back(n);
    }
    if (edit.added.empty() && edit.changed.empty() && edit.removed.empty()) return std::nullopt;
    return edit;
  }

  const StudyGraph* extracted_;
  std::map<Id, std::string> statements_;
  std::map<std::pair<Id, LinkField>, IdList> links_;
  std::map<Id, Experiment> details_;
  std::map<Id, std::vector<ResultRecord>> results_;
  std::vector<Element> supplements_;
};

// ---------------------------------------------------------------------------
// Sessions

enum class SessionState { open, finalized };

inline std::string_view to_string(SessionState s) { return s == SessionState::open ? "open" : "finalized"; }

struct LiveMetrics {
  std::size_t statement_edits = 0;
  std::size_t link_edits = 0;
  std::size_t detail_edits = 0;
  std::size_t missing_results = 0;
  std::size_t incorrect_results = 0;
  std::size_t supplements = 0;
  std::size_t ratings = 0;
};

struct EventAck {
  std::uint64_t sequence_no = 0;
  std::optional<std::size_t> levenshtein;
  std::optional<double> relative_edit_pct;
  LiveMetrics metrics;
};

struct FinalizeOptions {
  /// Categories that need at least one rating before the session can close.
  std::set<RatingCategory> required_ratings;
};

struct FinalizedOutputs {
  StudyGraph corrected;
  CorrectionSet corrections;
  std::vector<LikertRating> ratings;
};

class ReviewSession {
 public:
  /// Throws InvalidGraph when the extracted graph has error-level violations.
  ReviewSession(std::string session_id, StudyGraph extracted)
      : session_id_(std::move(session_id)),
        extracted_(std::make_unique<StudyGraph>(std::move(extracted))),
        working_(*extracted_),
        accumulator_(*extracted_) {
    ValidationReport report = validate_graph(*extracted_);
    if (!report.clean()) throw InvalidGraph(std::move(report));
  }

  ReviewSession(ReviewSession&&) noexcept = default;
  ReviewSession& operator=(ReviewSession&&) noexcept = default;

  const std::string& session_id() const { return session_id_; }
  const std::string& study_id() const { return extracted_->metadata.source_id; }
  const StudyGraph& extracted() const { return *extracted_; }
  const StudyGraph& working_copy() const { return working_; }
  const std::vector<SessionEvent>& events() const { return events_; }
  const std::vector<LikertRating>& ratings() const { return ratings_; }
  SessionState state() const { return state_; }
  CorrectionSet corrections() const { return accumulator_.correction_set(); }

  /// Checks an event against the current state without applying it. Returns
  /// the graph the event would produce. Throws SessionFinalized,
  /// InvalidPayload, InvalidRating or ValidationRejected.
  StudyGraph check(const SessionEvent& ev) const {
    if (state_ == SessionState::finalized) throw SessionFinalized("session '" + session_id_ + "' is finalized");
    if (!events_.empty() && ev.sequence_no <= events_.back().sequence_no)
      throw InvalidPayload("sequence number " + std::to_string(ev.sequence_no) + " is not increasing");
    if (const auto* r = std::get_if<Rate>(&ev.payload)) {
      check_rating(r->rating);
      if (r->rating.subject.empty()) throw InvalidPayload("rating needs a subject");
      return working_;
    }
    if (std::holds_alternative<Finalize>(ev.payload)) return working_;
    StudyGraph next = apply_to_graph(working_, *extracted_, ev.payload);
    ValidationReport report = validate_graph(next);
    if (!report.clean()) throw ValidationRejected(std::move(report));
    return next;
  }

  /// Applies an already checked event. `next` is the graph check() returned.
  EventAck commit(SessionEvent ev, StudyGraph next) {
    EventAck ack;
    ack.sequence_no = ev.sequence_no;
    if (const auto* s = std::get_if<EditStatement>(&ev.payload)) {
      std::string original = original_text(s->element_id);
      ack.levenshtein = levenshtein(original, s->text);
      if (!s->text.empty()) ack.relative_edit_pct = relative_edit_pct(original, s->text);
    }
    if (const auto* r = std::get_if<Rate>(&ev.payload)) {
      auto same = std::find_if(ratings_.begin(), ratings_.end(), [&](const LikertRating& x) {
        return x.subject == r->rating.subject && x.category == r->rating.category;
      });
      if (same != ratings_.end()) *same = r->rating;
      else ratings_.push_back(r->rating);
    }
    if (std::holds_alternative<Finalize>(ev.payload)) state_ = SessionState::finalized;
    accumulator_.fold(ev.payload);
    working_ = std::move(next);
    events_.push_back(std::move(ev));
    ack.metrics = live_metrics();
    return ack;
  }

  EventAck apply(SessionEvent ev) {
    StudyGraph next = check(ev);
    return commit(std::move(ev), std::move(next));
  }

  /// Throws IncompleteReview when a required rating category is empty.
  void check_finalizable(const FinalizeOptions& options) const {
    if (state_ == SessionState::finalized) throw SessionFinalized("session '" + session_id_ + "' is finalized");
    for (RatingCategory c : options.required_ratings) {
      bool rated = std::any_of(ratings_.begin(), ratings_.end(), [c](const LikertRating& r) { return r.category == c; });
      if (!rated) throw IncompleteReview("no rating for category '" + std::string(to_string(c)) + "'");
    }
  }

  FinalizedOutputs outputs() const { return {working_, corrections(), ratings_}; }

  std::uint64_t next_sequence_no() const { return events_.empty() ? 1 : events_.back().sequence_no + 1; }

  LiveMetrics live_metrics() const {
    CorrectionSet set = corrections();
    LiveMetrics m;
    m.statement_edits = set.statement_edits.size();
    m.link_edits = set.link_edits.size();
    m.detail_edits = set.detail_edits.size();
    for (const auto& r : set.result_edits) {
      m.missing_results += r.missing_count();
      m.incorrect_results += r.incorrect_count();
    }
    m.supplements = set.supplements.size();
    m.ratings = ratings_.size();
    return m;
  }

 private:
  std::string original_text(const Id& id) const {
    if (const Hypothesis* h = find_hypothesis(*extracted_, id)) return h->statement;
    if (const Experiment* e = find_experiment(*extracted_, id)) return e->description;
    if (const Interpretation* i = find_interpretation(*extracted_, id)) return i->statement;
    if (const Hypothesis* h = find_hypothesis(working_, id)) return h->statement;
    if (const Experiment* e = find_experiment(working_, id)) return e->description;
    if (const Interpretation* i = find_interpretation(working_, id)) return i->statement;
    return {};
  }

  std::string session_id_;
  // Heap-allocated so the accumulator's pointer survives moves.
  std::unique_ptr<StudyGraph> extracted_;
  StudyGraph working_;
  CorrectionAccumulator accumulator_;
  std::vector<SessionEvent> events_;
  std::vector<LikertRating> ratings_;
  SessionState state_ = SessionState::open;
};

/// Rebuilds a session from its extracted graph and event log.
inline ReviewSession replay(std::string session_id, const StudyGraph& extracted, const std::vector<SessionEvent>& events) {
  ReviewSession s(std::move(session_id), extracted);
  for (const auto& ev : events) s.apply(ev);
  return s;
}

// ---------------------------------------------------------------------------
// Event (de)serialization: one compact JSON object per line.

inline Json to_json(const EventPayload& p) {
  Json j = Json::object();
  std::visit(
      [&](const auto& ev) {
        using T = std::decay_t<decltype(ev)>;
        if constexpr (std::is_same_v<T, EditStatement>) {
          j["element_id"] = ev.element_id;
          j["text"] = ev.text;
        } else if constexpr (std::is_same_v<T, EditLinks>) {
          j["element_id"] = ev.element_id;
          j["field"] = to_string(ev.field);
          j["add"] = ev.add;
          j["remove"] = ev.remove;
        } else if constexpr (std::is_same_v<T, EditDetails>) {
          j["element_id"] = ev.element_id;
          if (ev.metrics) {
            j["metrics"] = Json::array();
            for (const auto& m : *ev.metrics) j["metrics"].push_back(to_json(m));
          }
          if (ev.statistics) j["statistics"] = *ev.statistics;
          if (ev.strategy) j["strategy"] = *ev.strategy;
          if (ev.tests) {
            j["tests"] = Json::array();
            for (const auto& t : *ev.tests) j["tests"].push_back(to_json(t));
          }
        } else if constexpr (std::is_same_v<T, EditResult>) {
          j["element_id"] = ev.element_id;
          j["op"] = ev.op == EditResult::Op::set ? "set" : "remove";
          if (ev.op == EditResult::Op::set) {
            j["record"] = to_json(ev.record);
          } else {
            j["metric_name"] = ev.record.metric_name;
            j["context"] = ev.record.context;
          }
        } else if constexpr (std::is_same_v<T, SupplementElement>) {
          j = to_json(ev.element);
        } else if constexpr (std::is_same_v<T, Rate>) {
          j["subject"] = ev.rating.subject;
          j["category"] = to_string(ev.rating.category);
          j["scale"] = points(ev.rating.scale);
          j["value"] = ev.rating.value;
        }
      },
      p);
  return j;
}

/// Parses an event payload. Throws InvalidPayload (wrapping parse problems).
inline EventPayload payload_from_json(EventKind kind, const Json& j) {
  try {
    ObjectReader r(j, "/payload");
    EventPayload out;
    switch (kind) {
      case EventKind::edit_statement:
        out = EditStatement{r.string("element_id"), r.string("text")};
        break;
      case EventKind::edit_links: {
        EditLinks ev;
        ev.element_id = r.string("element_id");
        ev.field = read_enum<LinkField>(r, "field", link_field_from, "exp_hyp, int_hyp, int_exp");
        ev.add = r.string_list("add", false);
        ev.remove = r.string_list("remove", false);
        out = ev;
        break;
      }
      case EventKind::edit_details: {
        EditDetails ev;
        ev.element_id = r.string("element_id");
        if (r.has("metrics")) {
          ev.metrics.emplace();
          const Json& arr = r.array("metrics");
          for (std::size_t i = 0; i < arr.size(); ++i)
            ev.metrics->push_back(metric_from_json(arr[i], r.child("metrics/" + std::to_string(i)), ParseMode::strict));
        }
        if (r.has("statistics")) ev.statistics = r.string_list("statistics");
        if (r.has("strategy")) ev.strategy = r.string("strategy");
        if (r.has("tests")) {
          ev.tests.emplace();
          const Json& arr = r.array("tests");
          for (std::size_t i = 0; i < arr.size(); ++i)
            ev.tests->push_back(test_from_json(arr[i], r.child("tests/" + std::to_string(i)), ParseMode::strict));
        }
        out = ev;
        break;
      }
      case EventKind::edit_result: {
        EditResult ev;
        ev.element_id = r.string("element_id");
        std::string op = r.string("op");
        if (op == "set") {
          ev.op = EditResult::Op::set;
          ev.record = result_from_json(r.required("record"), r.child("record"), ParseMode::strict);
        } else if (op == "remove") {
          ev.op = EditResult::Op::remove;
          ev.record.metric_name = r.string("metric_name");
          ev.record.context = r.string_or("context", "");
        } else {
          r.fail("invalid literal '" + op + "' (expected one of set, remove)", "op");
        }
        out = ev;
        break;
      }
      case EventKind::supplement: {
        auto k = read_enum<ElementKind>(r, "kind", element_kind_from, "hypothesis, experiment, interpretation");
        const Json& el = r.required("element");
        std::string path = r.child("element");
        if (k == ElementKind::hypothesis) out = SupplementElement{hypothesis_from_json(el, path, ParseMode::strict)};
        else if (k == ElementKind::experiment) out = SupplementElement{experiment_from_json(el, path, ParseMode::strict)};
        else out = SupplementElement{interpretation_from_json(el, path, ParseMode::strict)};
        break;
      }
      case EventKind::rate: {
        LikertRating rating;
        rating.subject = r.string("subject");
        rating.category = read_enum<RatingCategory>(r, "category", rating_category_from,
                                                    "hypothesis, experiment_description, experiment_details, interpretation");
        double scale = r.number("scale");
        auto s = likert_scale_from(static_cast<int>(scale));
        if (!s || scale != static_cast<int>(scale)) r.fail("scale must be 5 or 7", "scale");
        rating.scale = *s;
        double value = r.number("value");
        if (value != static_cast<int>(value)) r.fail("rating value must be an integer", "value");
        rating.value = static_cast<int>(value);
        out = Rate{rating};
        break;
      }
      case EventKind::finalize:
        out = Finalize{};
        break;
    }
    r.finish(ParseMode::strict);
    return out;
  } catch (const ParseError& e) {
    throw InvalidPayload(e.what());
  }
}

inline Json to_json(const SessionEvent& ev) {
  Json j = Json::object();
  j["seq"] = ev.sequence_no;
  j["timestamp"] = ev.timestamp;
  j["kind"] = to_string(ev.kind());
  j["payload"] = to_json(ev.payload);
  return j;
}

inline std::string serialize_event_line(const SessionEvent& ev) { return to_json(ev).dump() + "\n"; }

/// Parses an event object. `seq` and `timestamp` are optional so that clients
/// can post bare {kind, payload} requests; the service fills them in.
inline SessionEvent event_from_json(const Json& j) {
  try {
    ObjectReader r(j, "");
    SessionEvent ev;
    if (const Json* seq = r.optional("seq")) {
      if (!seq->is_number_unsigned()) r.fail("expected a positive integer", "seq");
      ev.sequence_no = seq->get<std::uint64_t>();
    }
    ev.timestamp = r.string_or("timestamp", "");
    auto kind = read_enum<EventKind>(r, "kind", event_kind_from,
                                     "edit_statement, edit_links, edit_details, edit_result, supplement, rate, finalize");
    const Json* payload = r.optional("payload");
    static const Json empty = Json::object();
    ev.payload = payload_from_json(kind, payload ? *payload : empty);
    r.finish(ParseMode::strict);
    return ev;
  } catch (const ParseError& e) {
    throw InvalidPayload(e.what());
  }
}

inline SessionEvent parse_event(std::string_view text) {
  try {
    return event_from_json(parse_json_text(text));
  } catch (const ParseError& e) {
    throw InvalidPayload(e.what());
  }
}

inline std::vector<SessionEvent> parse_event_log(std::string_view text) {
  std::vector<SessionEvent> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty()) out.push_back(parse_event(line));
    start = end + 1;
  }
  return out;
}

}  // namespace repro
