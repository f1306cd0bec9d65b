#pragma once

// Correction sets: the reviewer's edits against an extracted graph, recovered
// by diffing the extracted graph with its corrected counterpart.
//
// Elements are aligned by id. Ids present only in the corrected graph are
// supplements (elements the extraction missed entirely). An extracted id that
// disappears from the corrected graph cannot be aligned.
//
// List fields follow one ordering rule, which makes apply_corrections the
// inverse of compare_graphs: the retained extracted entries keep their
// extracted order and new entries follow in the order they appear in the
// corrected list.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "repro/graph.hpp"
#include "repro/json_util.hpp"
#include "repro/levenshtein.hpp"
#include "repro/study_io.hpp"

namespace repro {

enum class LinkField { exp_hyp, int_hyp, int_exp };
enum class DetailCategory { metrics, statistics, strategy, tests };
enum class ResultError { none, missing, incorrect };

inline std::string_view to_string(LinkField f) {
  switch (f) {
    case LinkField::exp_hyp: return "exp_hyp";
    case LinkField::int_hyp: return "int_hyp";
    case LinkField::int_exp: return "int_exp";
  }
  return "";
}

inline std::optional<LinkField> link_field_from(std::string_view s) {
  if (s == "exp_hyp") return LinkField::exp_hyp;
  if (s == "int_hyp") return LinkField::int_hyp;
  if (s == "int_exp") return LinkField::int_exp;
  return std::nullopt;
}

inline std::string_view to_string(DetailCategory c) {
  switch (c) {
    case DetailCategory::metrics: return "metrics";
    case DetailCategory::statistics: return "statistics";
    case DetailCategory::strategy: return "strategy";
    case DetailCategory::tests: return "tests";
  }
  return "";
}

inline std::string_view to_string(ResultError e) {
  switch (e) {
    case ResultError::none: return "none";
    case ResultError::missing: return "missing";
    case ResultError::incorrect: return "incorrect";
  }
  return "";
}

struct StatementEdit {
  Id element_id;
  ElementKind kind;
  std::string original;
  std::string corrected;

  std::size_t distance() const { return levenshtein(original, corrected); }
  friend bool operator==(const StatementEdit&, const StatementEdit&) = default;
};

struct LinkEdit {
  Id element_id;
  LinkField field;
  IdList added;    // in corrected-list order
  IdList removed;  // in extracted-list order

  friend bool operator==(const LinkEdit&, const LinkEdit&) = default;
};

struct DetailEdit {
  Id element_id;
  DetailCategory category;
  bool changed = true;

  friend bool operator==(const DetailEdit&, const DetailEdit&) = default;
};

struct ResultKey {
  std::string metric_name;
  std::string context;

  friend auto operator<=>(const ResultKey&, const ResultKey&) = default;
};

inline ResultKey key_of(const ResultRecord& r) { return {r.metric_name, r.context}; }

struct ChangedResult {
  ResultRecord corrected;
  ResultError error = ResultError::none;  // none: only locator/flags changed

  friend bool operator==(const ChangedResult&, const ChangedResult&) = default;
};

struct ResultEdit {
  Id element_id;
  std::vector<ResultRecord> added;     // present only in the corrected graph
  std::vector<ChangedResult> changed;  // same key, different record
  std::vector<ResultKey> removed;      // present only in the extracted graph

  /// Values the extraction failed to capture: absent records plus records
  /// extracted as missing that the reviewer filled in.
  std::size_t missing_count() const {
    return added.size() + static_cast<std::size_t>(std::count_if(
                              changed.begin(), changed.end(),
                              [](const ChangedResult& c) { return c.error == ResultError::missing; }));
  }

  std::size_t incorrect_count() const {
    return static_cast<std::size_t>(std::count_if(
        changed.begin(), changed.end(), [](const ChangedResult& c) { return c.error == ResultError::incorrect; }));
  }

  friend bool operator==(const ResultEdit&, const ResultEdit&) = default;
};

using Element = std::variant<Hypothesis, Experiment, Interpretation>;

inline const Id& id_of(const Element& e) {
  return std::visit([](const auto& x) -> const Id& { return x.id; }, e);
}

inline ElementKind kind_of(const Element& e) {
  return static_cast<ElementKind>(e.index());
}

struct CorrectionSet {
  std::string study_id;
  std::vector<StatementEdit> statement_edits;
  std::vector<LinkEdit> link_edits;
  std::vector<DetailEdit> detail_edits;
  std::vector<ResultEdit> result_edits;
  std::vector<Element> supplements;

  bool empty() const {
    return statement_edits.empty() && link_edits.empty() && detail_edits.empty() && result_edits.empty() &&
           supplements.empty();
  }

  friend bool operator==(const CorrectionSet&, const CorrectionSet&) = default;
};

class AlignmentFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompareOptions {
  /// Two scalar or interval values closer than this are equal. Zero means
  /// exact comparison of the canonical decimal form.
  double absolute_tolerance = 0.0;
};

// ---------------------------------------------------------------------------

namespace detail {

inline bool numbers_equal(double a, double b, double tol) {
  if (tol <= 0.0) return a == b;
  return std::fabs(a - b) <= tol;
}

inline bool values_equal(const ResultValue& a, const ResultValue& b, double tol) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<ScalarValue>(&a)) {
    const auto& y = std::get<ScalarValue>(b);
    if (!numbers_equal(x->value, y.value, tol)) return false;
    if (x->uncertainty.has_value() != y.uncertainty.has_value()) return false;
    return !x->uncertainty || numbers_equal(*x->uncertainty, *y.uncertainty, tol);
  }
  if (const auto* x = std::get_if<IntervalValue>(&a)) {
    const auto& y = std::get<IntervalValue>(b);
    return numbers_equal(x->low, y.low, tol) && numbers_equal(x->high, y.high, tol);
  }
  if (const auto* x = std::get_if<CategoricalValue>(&a)) return x->text == std::get<CategoricalValue>(b).text;
  return true;
}

inline std::optional<LinkEdit> diff_links(const Id& owner, LinkField field, const IdList& before,
                                          const IdList& after) {
  LinkEdit edit{owner, field, {}, {}};
  for (const auto& id : after)
    if (std::find(before.begin(), before.end(), id) == before.end()) edit.added.push_back(id);
  for (const auto& id : before)
    if (std::find(after.begin(), after.end(), id) == after.end()) edit.removed.push_back(id);
  if (edit.added.empty() && edit.removed.empty()) return std::nullopt;
  return edit;
}

inline IdList apply_links(const IdList& before, const LinkEdit& edit) {
  IdList out;
  for (const auto& id : before)
    if (std::find(edit.removed.begin(), edit.removed.end(), id) == edit.removed.end()) out.push_back(id);
  for (const auto& id : edit.added) out.push_back(id);
  return out;
}

inline ResultError classify(const ResultRecord& before, const ResultRecord& after, double tol) {
  if (values_equal(before.value, after.value, tol)) return ResultError::none;
  if (std::holds_alternative<MissingValue>(before.value)) return ResultError::missing;
  return ResultError::incorrect;
}

inline std::optional<ResultEdit> diff_results(const Id& owner, const std::vector<ResultRecord>& before,
                                              const std::vector<ResultRecord>& after, double tol) {
  ResultEdit edit{owner, {}, {}, {}};
  std::map<ResultKey, const ResultRecord*> old_by_key, new_by_key;
  for (const auto& r : before) old_by_key.emplace(key_of(r), &r);
  for (const auto& r : after) new_by_key.emplace(key_of(r), &r);

  for (const auto& r : before) {
    auto it = new_by_key.find(key_of(r));
    if (it == new_by_key.end()) {
      edit.removed.push_back(key_of(r));
    } else if (!(*it->second == r)) {
      edit.changed.push_back({*it->second, classify(r, *it->second, tol)});
    }
  }
  for (const auto& r : after)
    if (!old_by_key.count(key_of(r))) edit.added.push_back(r);

  if (edit.added.empty() && edit.changed.empty() && edit.removed.empty()) return std::nullopt;
  return edit;
}

inline std::vector<ResultRecord> apply_results(const std::vector<ResultRecord>& before, const ResultEdit& edit) {
  std::vector<ResultRecord> out;
  for (const auto& r : before) {
    ResultKey k = key_of(r);
    if (std::find(edit.removed.begin(), edit.removed.end(), k) != edit.removed.end()) continue;
    auto changed = std::find_if(edit.changed.begin(), edit.changed.end(),
                                [&](const ChangedResult& c) { return key_of(c.corrected) == k; });
    out.push_back(changed != edit.changed.end() ? changed->corrected : r);
  }
  for (const auto& r : edit.added) out.push_back(r);
  return out;
}

}  // namespace detail

/// Diffs an extracted graph against its human-corrected counterpart.
/// Throws AlignmentFailure when an extracted element has no counterpart of the
/// same kind in the corrected graph.
inline CorrectionSet compare_graphs(const StudyGraph& extracted, const StudyGraph& corrected,
                                    const CompareOptions& options = {}) {
  CorrectionSet set;
  set.study_id = corrected.metadata.source_id;

  auto missing = [](ElementKind kind, const Id& id) {
    return AlignmentFailure(std::string(to_string(kind)) + " '" + id +
                            "' of the extracted graph has no counterpart in the corrected graph");
  };

  for (const auto& h : extracted.hypotheses) {
    const Hypothesis* c = find_hypothesis(corrected, h.id);
    if (!c) throw missing(ElementKind::hypothesis, h.id);
    if (c->statement != h.statement)
      set.statement_edits.push_back({h.id, ElementKind::hypothesis, h.statement, c->statement});
  }

  for (const auto& e : extracted.experiments) {
    const Experiment* c = find_experiment(corrected, e.id);
    if (!c) throw missing(ElementKind::experiment, e.id);
    if (c->description != e.description)
      set.statement_edits.push_back({e.id, ElementKind::experiment, e.description, c->description});
    if (auto l = detail::diff_links(e.id, LinkField::exp_hyp, e.hypothesis_ids, c->hypothesis_ids))
      set.link_edits.push_back(std::move(*l));
    if (c->metrics != e.metrics) set.detail_edits.push_back({e.id, DetailCategory::metrics, true});
    if (c->statistics != e.statistics) set.detail_edits.push_back({e.id, DetailCategory::statistics, true});
    if (c->strategy != e.strategy) set.detail_edits.push_back({e.id, DetailCategory::strategy, true});
    if (c->tests != e.tests) set.detail_edits.push_back({e.id, DetailCategory::tests, true});
    if (auto r = detail::diff_results(e.id, e.results, c->results, options.absolute_tolerance))
      set.result_edits.push_back(std::move(*r));
  }

  for (const auto& i : extracted.interpretations) {
    const Interpretation* c = find_interpretation(corrected, i.id);
    if (!c) throw missing(ElementKind::interpretation, i.id);
    if (c->statement != i.statement)
      set.statement_edits.push_back({i.id, ElementKind::interpretation, i.statement, c->statement});
    if (auto l = detail::diff_links(i.id, LinkField::int_hyp, i.hypothesis_ids, c->hypothesis_ids))
      set.link_edits.push_back(std::move(*l));
    if (auto l = detail::diff_links(i.id, LinkField::int_exp, i.experiment_ids, c->experiment_ids))
      set.link_edits.push_back(std::move(*l));
  }

  for (const auto& h : corrected.hypotheses)
    if (!kind_of(extracted, h.id)) set.supplements.emplace_back(h);
  for (const auto& e : corrected.experiments)
    if (!kind_of(extracted, e.id)) set.supplements.emplace_back(e);
  for (const auto& i : corrected.interpretations)
    if (!kind_of(extracted, i.id)) set.supplements.emplace_back(i);

  return set;
}

/// Replays a correction set onto the extracted graph: statement text, links,
/// result records and supplements. Detail edits only record that a category
/// changed, so metrics/statistics/strategy/tests are left as extracted.
inline StudyGraph apply_corrections(StudyGraph g, const CorrectionSet& set) {
  for (const auto& s : set.statement_edits) {
    switch (s.kind) {
      case ElementKind::hypothesis:
        if (auto* h = find_hypothesis(g, s.element_id)) h->statement = s.corrected;
        break;
      case ElementKind::experiment:
        if (auto* e = find_experiment(g, s.element_id)) e->description = s.corrected;
        break;
      case ElementKind::interpretation:
        if (auto* i = find_interpretation(g, s.element_id)) i->statement = s.corrected;
        break;
    }
  }
  for (const auto& l : set.link_edits) {
    if (l.field == LinkField::exp_hyp) {
      if (auto* e = find_experiment(g, l.element_id)) e->hypothesis_ids = detail::apply_links(e->hypothesis_ids, l);
    } else if (auto* i = find_interpretation(g, l.element_id)) {
      IdList& target = l.field == LinkField::int_hyp ? i->hypothesis_ids : i->experiment_ids;
      target = detail::apply_links(target, l);
    }
  }
  for (const auto& r : set.result_edits)
    if (auto* e = find_experiment(g, r.element_id)) e->results = detail::apply_results(e->results, r);
  for (const auto& s : set.supplements) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Hypothesis>) g.hypotheses.push_back(x);
          else if constexpr (std::is_same_v<T, Experiment>) g.experiments.push_back(x);
          else g.interpretations.push_back(x);
        },
        s);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Export

inline Json to_json(const Element& e) {
  Json j = Json::object();
  j["kind"] = to_string(kind_of(e));
  j["element"] = std::visit([](const auto& x) { return to_json(x); }, e);
  return j;
}

inline Json to_json(const CorrectionSet& set) {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["study_id"] = set.study_id;
  j["statement_edits"] = Json::array();
  for (const auto& s : set.statement_edits) {
    Json e = Json::object();
    e["element_id"] = s.element_id;
    e["kind"] = to_string(s.kind);
    e["original"] = s.original;
    e["corrected"] = s.corrected;
    e["levenshtein"] = s.distance();
    j["statement_edits"].push_back(std::move(e));
  }
  j["link_edits"] = Json::array();
  for (const auto& l : set.link_edits) {
    Json e = Json::object();
    e["element_id"] = l.element_id;
    e["link_field"] = to_string(l.field);
    e["added"] = l.added;
    e["removed"] = l.removed;
    j["link_edits"].push_back(std::move(e));
  }
  j["detail_edits"] = Json::array();
  for (const auto& d : set.detail_edits) {
    Json e = Json::object();
    e["element_id"] = d.element_id;
    e["category"] = to_string(d.category);
    e["changed"] = d.changed;
    j["detail_edits"].push_back(std::move(e));
  }
  j["result_edits"] = Json::array();
  for (const auto& r : set.result_edits) {
    Json e = Json::object();
    e["element_id"] = r.element_id;
    e["missing_count"] = r.missing_count();
    e["incorrect_count"] = r.incorrect_count();
    e["added"] = Json::array();
    for (const auto& a : r.added) e["added"].push_back(to_json(a));
    e["changed"] = Json::array();
    for (const auto& c : r.changed) {
      Json cj = to_json(c.corrected);
      cj["error"] = to_string(c.error);
      e["changed"].push_back(std::move(cj));
    }
    e["removed"] = Json::array();
    for (const auto& k : r.removed) e["removed"].push_back(Json{{"metric_name", k.metric_name}, {"context", k.context}});
    j["result_edits"].push_back(std::move(e));
  }
  j["supplements"] = Json::array();
  for (const auto& s : set.supplements) j["supplements"].push_back(to_json(s));
  return j;
}

inline std::string serialize_corrections(const CorrectionSet& set) { return dump_canonical(to_json(set)); }

}  // namespace repro
