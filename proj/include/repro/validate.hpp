#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "repro/graph.hpp"

namespace repro {

// Declaration order is the tie-break order within one element.
enum class ViolationCode {
  missing_hypothesis,
  empty_source_id,
  invalid_token_count,
  empty_id,
  duplicate_id,
  empty_statement,
  orphan_experiment,
  interpretation_without_hypothesis,
  interpretation_without_experiment,
  dangling_reference,
  wrong_kind_reference,
  duplicate_link,
  empty_metric_name,
  duplicate_metric,
  unknown_metric,
  non_finite_value,
  invalid_interval,
  duplicate_result,
  // warning level
  no_metrics,
  unlinked_experiment_reference,
};

enum class Severity { error, warning };

inline Severity severity_of(ViolationCode c) {
  switch (c) {
    case ViolationCode::no_metrics:
    case ViolationCode::unlinked_experiment_reference:
      return Severity::warning;
    default:
      return Severity::error;
  }
}

inline std::string_view to_string(ViolationCode c) {
  switch (c) {
    case ViolationCode::missing_hypothesis: return "missing_hypothesis";
    case ViolationCode::empty_source_id: return "empty_source_id";
    case ViolationCode::invalid_token_count: return "invalid_token_count";
    case ViolationCode::empty_id: return "empty_id";
    case ViolationCode::duplicate_id: return "duplicate_id";
    case ViolationCode::empty_statement: return "empty_statement";
    case ViolationCode::orphan_experiment: return "orphan_experiment";
    case ViolationCode::interpretation_without_hypothesis: return "interpretation_without_hypothesis";
    case ViolationCode::interpretation_without_experiment: return "interpretation_without_experiment";
    case ViolationCode::dangling_reference: return "dangling_reference";
    case ViolationCode::wrong_kind_reference: return "wrong_kind_reference";
    case ViolationCode::duplicate_link: return "duplicate_link";
    case ViolationCode::empty_metric_name: return "empty_metric_name";
    case ViolationCode::duplicate_metric: return "duplicate_metric";
    case ViolationCode::unknown_metric: return "unknown_metric";
    case ViolationCode::non_finite_value: return "non_finite_value";
    case ViolationCode::invalid_interval: return "invalid_interval";
    case ViolationCode::duplicate_result: return "duplicate_result";
    case ViolationCode::no_metrics: return "no_metrics";
    case ViolationCode::unlinked_experiment_reference: return "unlinked_experiment_reference";
  }
  return "";
}

struct Violation {
  ViolationCode code;
  std::optional<Id> element_id;
  std::string message;

  Severity severity() const { return severity_of(code); }
  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }

  /// True when no error-level violation is present (warnings allowed).
  bool clean() const {
    return std::none_of(violations.begin(), violations.end(),
                        [](const Violation& v) { return v.severity() == Severity::error; });
  }

  std::size_t count(ViolationCode c) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [c](const Violation& v) { return v.code == c; }));
  }

  std::vector<Violation> errors() const {
    std::vector<Violation> out;
    std::copy_if(violations.begin(), violations.end(), std::back_inserter(out),
                 [](const Violation& v) { return v.severity() == Severity::error; });
    return out;
  }

  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

namespace detail {

class ViolationCollector {
 public:
  void add(std::size_t position, ViolationCode code, std::optional<Id> id, std::string message) {
    items_.push_back({position, sequence_++, Violation{code, std::move(id), std::move(message)}});
  }

  ValidationReport finish() && {
    std::stable_sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) {
      if (a.position != b.position) return a.position < b.position;
      return a.violation.code < b.violation.code;
    });
    ValidationReport report;
    report.violations.reserve(items_.size());
    for (auto& item : items_) report.violations.push_back(std::move(item.violation));
    return report;
  }

 private:
  struct Item {
    std::size_t position;
    std::size_t sequence;
    Violation violation;
  };
  std::vector<Item> items_;
  std::size_t sequence_ = 0;
};

inline bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace detail

/// Checks every structural invariant of a study graph. Violations are ordered
/// by element position (metadata first, then hypotheses, experiments,
/// interpretations) and then by code.
inline ValidationReport validate_graph(const StudyGraph& g) {
  detail::ViolationCollector out;
  constexpr std::size_t graph_pos = 0;

  if (detail::blank(g.metadata.source_id))
    out.add(graph_pos, ViolationCode::empty_source_id, std::nullopt, "metadata.source_id is empty");
  if (g.metadata.token_count && *g.metadata.token_count <= 0)
    out.add(graph_pos, ViolationCode::invalid_token_count, std::nullopt,
            "metadata.token_count must be positive when present");
  if (g.hypotheses.empty())
    out.add(graph_pos, ViolationCode::missing_hypothesis, std::nullopt, "graph has no hypothesis");

  // First occurrence of every id, with its kind.
  std::map<Id, ElementKind> kinds;
  std::size_t pos = 1;
  auto register_id = [&](const Id& id, ElementKind kind) {
    if (id.empty()) {
      out.add(pos, ViolationCode::empty_id, std::nullopt,
              std::string(to_string(kind)) + " at position " + std::to_string(pos) + " has an empty id");
      return;
    }
    if (!kinds.emplace(id, kind).second)
      out.add(pos, ViolationCode::duplicate_id, id, "id '" + id + "' is already used");
  };
  for (const auto& h : g.hypotheses) register_id(h.id, ElementKind::hypothesis), ++pos;
  for (const auto& e : g.experiments) register_id(e.id, ElementKind::experiment), ++pos;
  for (const auto& i : g.interpretations) register_id(i.id, ElementKind::interpretation), ++pos;

  auto check_links = [&](std::size_t at, const Id& owner, const IdList& links, ElementKind expected,
                         std::string_view field) {
    std::set<Id> seen;
    for (const auto& target : links) {
      if (!seen.insert(target).second) {
        out.add(at, ViolationCode::duplicate_link, owner,
                owner + "." + std::string(field) + " lists '" + target + "' twice");
        continue;
      }
      auto it = kinds.find(target);
      if (it == kinds.end()) {
        out.add(at, ViolationCode::dangling_reference, owner,
                owner + "." + std::string(field) + " references unknown id '" + target + "'");
      } else if (it->second != expected) {
        out.add(at, ViolationCode::wrong_kind_reference, owner,
                owner + "." + std::string(field) + " references " + std::string(to_string(it->second)) +
                    " '" + target + "', expected " + std::string(to_string(expected)));
      }
    }
  };

  pos = 1;
  for (const auto& h : g.hypotheses) {
    if (detail::blank(h.statement))
      out.add(pos, ViolationCode::empty_statement, h.id, "hypothesis '" + h.id + "' has an empty statement");
    ++pos;
  }

  for (const auto& e : g.experiments) {
    if (detail::blank(e.description))
      out.add(pos, ViolationCode::empty_statement, e.id, "experiment '" + e.id + "' has an empty description");
    if (e.hypothesis_ids.empty())
      out.add(pos, ViolationCode::orphan_experiment, e.id, "experiment '" + e.id + "' links to no hypothesis");
    check_links(pos, e.id, e.hypothesis_ids, ElementKind::hypothesis, "hypothesis_ids");

    std::set<std::string> metric_names;
    for (const auto& m : e.metrics) {
      if (detail::blank(m.name)) {
        out.add(pos, ViolationCode::empty_metric_name, e.id, "experiment '" + e.id + "' has an unnamed metric");
      } else if (!metric_names.insert(m.name).second) {
        out.add(pos, ViolationCode::duplicate_metric, e.id,
                "experiment '" + e.id + "' declares metric '" + m.name + "' twice");
      }
    }
    if (e.metrics.empty())
      out.add(pos, ViolationCode::no_metrics, e.id, "experiment '" + e.id + "' declares no metrics");

    std::set<std::pair<std::string, std::string>> result_keys;
    for (const auto& r : e.results) {
      if (!r.unmatched && !metric_names.count(r.metric_name))
        out.add(pos, ViolationCode::unknown_metric, e.id,
                "experiment '" + e.id + "' has a result for undeclared metric '" + r.metric_name + "'");
      if (!result_keys.emplace(r.metric_name, r.context).second)
        out.add(pos, ViolationCode::duplicate_result, e.id,
                "experiment '" + e.id + "' has two results for ('" + r.metric_name + "', '" + r.context + "')");
      if (const auto* s = std::get_if<ScalarValue>(&r.value)) {
        if (!std::isfinite(s->value) || (s->uncertainty && !std::isfinite(*s->uncertainty)))
          out.add(pos, ViolationCode::non_finite_value, e.id,
                  "experiment '" + e.id + "' has a non-finite value for '" + r.metric_name + "'");
      } else if (const auto* iv = std::get_if<IntervalValue>(&r.value)) {
        if (!std::isfinite(iv->low) || !std::isfinite(iv->high))
          out.add(pos, ViolationCode::non_finite_value, e.id,
                  "experiment '" + e.id + "' has a non-finite interval for '" + r.metric_name + "'");
        else if (iv->low > iv->high)
          out.add(pos, ViolationCode::invalid_interval, e.id,
                  "experiment '" + e.id + "' has an interval with low > high for '" + r.metric_name + "'");
      }
    }
    ++pos;
  }

  for (const auto& i : g.interpretations) {
    if (detail::blank(i.statement))
      out.add(pos, ViolationCode::empty_statement, i.id, "interpretation '" + i.id + "' has an empty statement");
    if (i.hypothesis_ids.empty())
      out.add(pos, ViolationCode::interpretation_without_hypothesis, i.id,
              "interpretation '" + i.id + "' links to no hypothesis");
    if (i.experiment_ids.empty())
      out.add(pos, ViolationCode::interpretation_without_experiment, i.id,
              "interpretation '" + i.id + "' links to no experiment");
    check_links(pos, i.id, i.hypothesis_ids, ElementKind::hypothesis, "hypothesis_ids");
    check_links(pos, i.id, i.experiment_ids, ElementKind::experiment, "experiment_ids");

    // An interpretation may draw on an experiment that tests none of its
    // hypotheses; allowed, but surfaced.
    for (const auto& eid : i.experiment_ids) {
      const Experiment* e = find_experiment(g, eid);
      if (!e) continue;
      bool shares = std::any_of(i.hypothesis_ids.begin(), i.hypothesis_ids.end(), [&](const Id& h) {
        return std::find(e->hypothesis_ids.begin(), e->hypothesis_ids.end(), h) != e->hypothesis_ids.end();
      });
      if (!shares && !i.hypothesis_ids.empty())
        out.add(pos, ViolationCode::unlinked_experiment_reference, i.id,
                "interpretation '" + i.id + "' cites experiment '" + eid +
                    "' which tests none of its hypotheses");
    }
    ++pos;
  }

  return std::move(out).finish();
}

}  // namespace repro
