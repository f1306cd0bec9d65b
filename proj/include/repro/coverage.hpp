#pragma once

// Reproduction coverage: how much of a study graph a reproduction attempt
// upholds.
//
// A hypothesis is supported iff it has at least one `supports`
// interpretation and every such interpretation is upheld. Repudiating and
// inconclusive interpretations never count towards support. A hypothesis
// without supporting interpretations stays in the denominator.

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repro/graph.hpp"
#include "repro/json_util.hpp"
#include "repro/study_io.hpp"

namespace repro {

struct ExperimentOutcome {
  bool reproduced = false;
  std::optional<bool> test_passed;
  std::vector<ResultRecord> reproduced_results;

  friend bool operator==(const ExperimentOutcome&, const ExperimentOutcome&) = default;
};

struct ReproductionAttempt {
  std::string study_id;
  std::map<Id, ExperimentOutcome> experiment_outcomes;
  std::map<Id, bool> interpretation_verdicts;  // id -> upheld

  friend bool operator==(const ReproductionAttempt&, const ReproductionAttempt&) = default;
};

struct CoverageScore {
  double interpretations_upheld = 0.0;
  double hypotheses_supported = 0.0;
  double experiments_reproduced = 0.0;
  std::map<Id, bool> per_hypothesis;
};

class UnknownId : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InconsistentAttempt : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline bool reproduced(const ReproductionAttempt& a, const Id& experiment) {
  auto it = a.experiment_outcomes.find(experiment);
  return it != a.experiment_outcomes.end() && it->second.reproduced;
}

inline bool upheld(const ReproductionAttempt& a, const Id& interpretation) {
  auto it = a.interpretation_verdicts.find(interpretation);
  return it != a.interpretation_verdicts.end() && it->second;
}

inline double fraction(std::size_t n, std::size_t d) {
  return d == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(d);
}

}  // namespace detail

/// Throws UnknownId or InconsistentAttempt.
inline void check_attempt(const StudyGraph& g, const ReproductionAttempt& a) {
  for (const auto& [id, outcome] : a.experiment_outcomes)
    if (!find_experiment(g, id)) throw UnknownId("attempt cites unknown experiment '" + id + "'");
  for (const auto& [id, up] : a.interpretation_verdicts) {
    const Interpretation* i = find_interpretation(g, id);
    if (!i) throw UnknownId("attempt cites unknown interpretation '" + id + "'");
    if (!up) continue;
    for (const auto& e : i->experiment_ids)
      if (!detail::reproduced(a, e))
        throw InconsistentAttempt("interpretation '" + id + "' is upheld but linked experiment '" + e +
                                  "' is not reproduced");
  }
}

inline CoverageScore score_reproduction(const StudyGraph& g, const ReproductionAttempt& a) {
  check_attempt(g, a);
  CoverageScore s;

  std::size_t reproduced = 0;
  for (const auto& e : g.experiments) reproduced += detail::reproduced(a, e.id) ? 1 : 0;
  std::size_t upheld = 0;
  for (const auto& i : g.interpretations) upheld += detail::upheld(a, i.id) ? 1 : 0;

  std::size_t supported = 0;
  for (const auto& h : g.hypotheses) {
    std::size_t supporting = 0, held = 0;
    for (const auto& i : g.interpretations) {
      if (i.verdict != Verdict::supports) continue;
      if (std::find(i.hypothesis_ids.begin(), i.hypothesis_ids.end(), h.id) == i.hypothesis_ids.end()) continue;
      ++supporting;
      held += detail::upheld(a, i.id) ? 1 : 0;
    }
    bool ok = supporting > 0 && held == supporting;
    s.per_hypothesis[h.id] = ok;
    supported += ok ? 1 : 0;
  }

  s.experiments_reproduced = detail::fraction(reproduced, g.experiments.size());
  s.interpretations_upheld = detail::fraction(upheld, g.interpretations.size());
  s.hypotheses_supported = detail::fraction(supported, g.hypotheses.size());
  return s;
}

struct ExplanationEntry {
  Id element_id;
  ElementKind kind;
  std::string status;
  std::string reason;

  friend bool operator==(const ExplanationEntry&, const ExplanationEntry&) = default;
};

/// One entry per element, in document order, with its status and the
/// smallest cause behind it.
inline std::vector<ExplanationEntry> explain_score(const StudyGraph& g, const ReproductionAttempt& a) {
  check_attempt(g, a);
  std::vector<ExplanationEntry> out;

  auto join = [](const IdList& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
    return s;
  };

  for (const auto& h : g.hypotheses) {
    IdList supporting, failing;
    for (const auto& i : g.interpretations) {
      if (i.verdict != Verdict::supports) continue;
      if (std::find(i.hypothesis_ids.begin(), i.hypothesis_ids.end(), h.id) == i.hypothesis_ids.end()) continue;
      supporting.push_back(i.id);
      if (!detail::upheld(a, i.id)) failing.push_back(i.id);
    }
    if (supporting.empty())
      out.push_back({h.id, ElementKind::hypothesis, "unsupported", "no supporting interpretation"});
    else if (!failing.empty())
      out.push_back({h.id, ElementKind::hypothesis, "unsupported", "interpretations not upheld: " + join(failing)});
    else
      out.push_back({h.id, ElementKind::hypothesis, "supported", "all supporting interpretations upheld: " + join(supporting)});
  }

  for (const auto& e : g.experiments) {
    auto it = a.experiment_outcomes.find(e.id);
    if (it == a.experiment_outcomes.end())
      out.push_back({e.id, ElementKind::experiment, "not_reproduced", "not attempted"});
    else if (it->second.reproduced)
      out.push_back({e.id, ElementKind::experiment, "reproduced",
                     it->second.test_passed.value_or(true) ? "results reproduced" : "reproduced, test recorded as failed"});
    else if (it->second.test_passed.has_value() && !*it->second.test_passed)
      out.push_back({e.id, ElementKind::experiment, "not_reproduced", "assessment test failed"});
    else
      out.push_back({e.id, ElementKind::experiment, "not_reproduced", "results not reproduced"});
  }

  for (const auto& i : g.interpretations) {
    IdList blocked;
    for (const auto& eid : i.experiment_ids)
      if (!detail::reproduced(a, eid)) blocked.push_back(eid);
    if (detail::upheld(a, i.id))
      out.push_back({i.id, ElementKind::interpretation, "upheld", "all linked experiments reproduced"});
    else if (!blocked.empty())
      out.push_back({i.id, ElementKind::interpretation, "blocked", "experiment not reproduced: " + join(blocked)});
    else
      out.push_back({i.id, ElementKind::interpretation, "not_upheld", "experiments reproduced but interpretation not upheld"});
  }
  return out;
}

// ---------------------------------------------------------------------------
// `.attempt` documents

inline Json to_json(const ReproductionAttempt& a) {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["study_id"] = a.study_id;
  j["experiment_outcomes"] = Json::array();
  for (const auto& [id, o] : a.experiment_outcomes) {
    Json e = Json::object();
    e["experiment_id"] = id;
    e["reproduced"] = o.reproduced;
    if (o.test_passed) e["test_passed"] = *o.test_passed;
    e["reproduced_results"] = Json::array();
    for (const auto& r : o.reproduced_results) e["reproduced_results"].push_back(to_json(r));
    j["experiment_outcomes"].push_back(std::move(e));
  }
  j["interpretation_verdicts"] = Json::array();
  for (const auto& [id, up] : a.interpretation_verdicts)
    j["interpretation_verdicts"].push_back(Json{{"interpretation_id", id}, {"upheld", up}});
  return j;
}

inline std::string serialize_attempt(const ReproductionAttempt& a) { return dump_canonical(to_json(a)); }

inline ReproductionAttempt parse_attempt(std::string_view text, ParseMode mode = ParseMode::strict) {
  Json j = parse_json_text(text);
  ObjectReader r(j, "");
  check_format_version(r);
  ReproductionAttempt a;
  a.study_id = r.string("study_id");
  const Json& outcomes = r.array("experiment_outcomes", false);
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    std::string path = "/experiment_outcomes/" + std::to_string(i);
    ObjectReader o(outcomes[i], path);
    Id id = o.string("experiment_id");
    ExperimentOutcome out;
    out.reproduced = o.boolean("reproduced");
    if (const Json* t = o.optional("test_passed")) {
      if (!t->is_boolean()) o.fail("expected a boolean", "test_passed");
      out.test_passed = t->get<bool>();
    }
    const Json& res = o.array("reproduced_results", false);
    for (std::size_t k = 0; k < res.size(); ++k)
      out.reproduced_results.push_back(result_from_json(res[k], o.child("reproduced_results/" + std::to_string(k)), mode));
    o.finish(mode);
    if (!a.experiment_outcomes.emplace(id, std::move(out)).second)
      o.fail("experiment '" + id + "' listed twice", "experiment_id");
  }
  const Json& verdicts = r.array("interpretation_verdicts", false);
  for (std::size_t i = 0; i < verdicts.size(); ++i) {
    ObjectReader v(verdicts[i], "/interpretation_verdicts/" + std::to_string(i));
    Id id = v.string("interpretation_id");
    bool up = v.boolean("upheld");
    v.finish(mode);
    if (!a.interpretation_verdicts.emplace(id, up).second)
      v.fail("interpretation '" + id + "' listed twice", "interpretation_id");
  }
  r.finish(mode);
  return a;
}

}  // namespace repro
