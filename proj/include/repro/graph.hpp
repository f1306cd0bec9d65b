#pragma once

// Study graph data model: hypotheses, experiments and interpretations joined
// by typed links. Values are plain aggregates; once built they are treated as
// immutable and shared freely between threads.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace repro {

using Id = std::string;
using IdList = std::vector<Id>;

/// Unknown fields kept by the lenient parser, as canonical JSON text keyed by
/// field name. Empty for graphs parsed in strict mode.
using Annotations = std::map<std::string, std::string>;

enum class HypothesisKind { stated, post_hoc };
enum class TestKind { statistical, direct_comparison, visual };
enum class Verdict { supports, repudiates, inconclusive };
enum class ElementKind { hypothesis, experiment, interpretation };

struct StudyMetadata {
  std::string source_id;
  std::string title;
  std::optional<std::int64_t> token_count;
  Annotations annotations;

  friend bool operator==(const StudyMetadata&, const StudyMetadata&) = default;
};

struct Hypothesis {
  Id id;
  std::string statement;
  HypothesisKind kind = HypothesisKind::stated;
  Annotations annotations;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

struct MetricSpec {
  std::string name;
  std::optional<std::string> description;
  std::optional<std::string> unit;
  Annotations annotations;

  friend bool operator==(const MetricSpec&, const MetricSpec&) = default;
};

struct AssessmentTest {
  TestKind kind = TestKind::direct_comparison;
  std::string description;
  Annotations annotations;

  friend bool operator==(const AssessmentTest&, const AssessmentTest&) = default;
};

struct ScalarValue {
  double value = 0.0;
  std::optional<double> uncertainty;

  friend bool operator==(const ScalarValue&, const ScalarValue&) = default;
};

struct IntervalValue {
  double low = 0.0;
  double high = 0.0;

  friend bool operator==(const IntervalValue&, const IntervalValue&) = default;
};

struct CategoricalValue {
  std::string text;

  friend bool operator==(const CategoricalValue&, const CategoricalValue&) = default;
};

struct MissingValue {
  friend bool operator==(const MissingValue&, const MissingValue&) = default;
};

using ResultValue = std::variant<ScalarValue, IntervalValue, CategoricalValue, MissingValue>;

struct ResultRecord {
  std::string metric_name;
  std::string context;  // dataset / configuration / condition label
  ResultValue value = MissingValue{};
  std::string locator;  // table, figure or paragraph the value came from
  bool unmatched = false;  // metric_name deliberately not among the experiment's metrics
  Annotations annotations;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

struct Experiment {
  Id id;
  std::string description;
  IdList hypothesis_ids;
  std::vector<MetricSpec> metrics;
  std::vector<std::string> statistics;
  std::string strategy;
  std::vector<AssessmentTest> tests;
  std::vector<ResultRecord> results;
  Annotations annotations;

  friend bool operator==(const Experiment&, const Experiment&) = default;
};

struct Interpretation {
  Id id;
  std::string statement;
  IdList hypothesis_ids;
  IdList experiment_ids;
  Verdict verdict = Verdict::supports;
  Annotations annotations;

  friend bool operator==(const Interpretation&, const Interpretation&) = default;
};

struct StudyGraph {
  StudyMetadata metadata;
  std::vector<Hypothesis> hypotheses;
  std::vector<Experiment> experiments;
  std::vector<Interpretation> interpretations;
  Annotations annotations;

  friend bool operator==(const StudyGraph&, const StudyGraph&) = default;
};

// ---------------------------------------------------------------------------
// Enum <-> literal tables. The literals are the on-disk spelling.

inline std::string_view to_string(HypothesisKind k) {
  return k == HypothesisKind::stated ? "stated" : "post_hoc";
}

inline std::string_view to_string(TestKind k) {
  switch (k) {
    case TestKind::statistical: return "statistical";
    case TestKind::direct_comparison: return "direct_comparison";
    case TestKind::visual: return "visual";
  }
  return "";
}

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::supports: return "supports";
    case Verdict::repudiates: return "repudiates";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "";
}

inline std::string_view to_string(ElementKind k) {
  switch (k) {
    case ElementKind::hypothesis: return "hypothesis";
    case ElementKind::experiment: return "experiment";
    case ElementKind::interpretation: return "interpretation";
  }
  return "";
}

inline std::optional<HypothesisKind> hypothesis_kind_from(std::string_view s) {
  if (s == "stated") return HypothesisKind::stated;
  if (s == "post_hoc") return HypothesisKind::post_hoc;
  return std::nullopt;
}

inline std::optional<TestKind> test_kind_from(std::string_view s) {
  if (s == "statistical") return TestKind::statistical;
  if (s == "direct_comparison") return TestKind::direct_comparison;
  if (s == "visual") return TestKind::visual;
  return std::nullopt;
}

inline std::optional<Verdict> verdict_from(std::string_view s) {
  if (s == "supports") return Verdict::supports;
  if (s == "repudiates") return Verdict::repudiates;
  if (s == "inconclusive") return Verdict::inconclusive;
  return std::nullopt;
}

inline std::optional<ElementKind> element_kind_from(std::string_view s) {
  if (s == "hypothesis") return ElementKind::hypothesis;
  if (s == "experiment") return ElementKind::experiment;
  if (s == "interpretation") return ElementKind::interpretation;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Lookup helpers. All return nullptr when the id is absent; with duplicate ids
// the first occurrence wins.

inline const Hypothesis* find_hypothesis(const StudyGraph& g, std::string_view id) {
  for (const auto& h : g.hypotheses)
    if (h.id == id) return &h;
  return nullptr;
}

inline const Experiment* find_experiment(const StudyGraph& g, std::string_view id) {
  for (const auto& e : g.experiments)
    if (e.id == id) return &e;
  return nullptr;
}

inline const Interpretation* find_interpretation(const StudyGraph& g, std::string_view id) {
  for (const auto& i : g.interpretations)
    if (i.id == id) return &i;
  return nullptr;
}

inline Hypothesis* find_hypothesis(StudyGraph& g, std::string_view id) {
  return const_cast<Hypothesis*>(find_hypothesis(std::as_const(g), id));
}

inline Experiment* find_experiment(StudyGraph& g, std::string_view id) {
  return const_cast<Experiment*>(find_experiment(std::as_const(g), id));
}

inline Interpretation* find_interpretation(StudyGraph& g, std::string_view id) {
  return const_cast<Interpretation*>(find_interpretation(std::as_const(g), id));
}

inline std::optional<ElementKind> kind_of(const StudyGraph& g, std::string_view id) {
  if (find_hypothesis(g, id)) return ElementKind::hypothesis;
  if (find_experiment(g, id)) return ElementKind::experiment;
  if (find_interpretation(g, id)) return ElementKind::interpretation;
  return std::nullopt;
}

/// Document-order position of an element: hypotheses first, then
/// experiments, then interpretations. Absent ids sort last.
inline std::size_t element_position(const StudyGraph& g, std::string_view id) {
  std::size_t pos = 0;
  for (const auto& h : g.hypotheses) {
    if (h.id == id) return pos;
    ++pos;
  }
  for (const auto& e : g.experiments) {
    if (e.id == id) return pos;
    ++pos;
  }
  for (const auto& i : g.interpretations) {
    if (i.id == id) return pos;
    ++pos;
  }
  return static_cast<std::size_t>(-1);
}

inline char id_prefix(ElementKind k) {
  switch (k) {
    case ElementKind::hypothesis: return 'H';
    case ElementKind::experiment: return 'E';
    case ElementKind::interpretation: return 'I';
  }
  return '?';
}

/// Smallest "<prefix><n>" not yet used anywhere in the graph, n >= 1.
inline Id next_free_id(const StudyGraph& g, ElementKind kind) {
  for (std::size_t n = 1;; ++n) {
    Id candidate = std::string(1, id_prefix(kind)) + std::to_string(n);
    if (!kind_of(g, candidate)) return candidate;
  }
}

/// Renumbers every element to H1.., E1.., I1.. in document order and rewrites
/// the links accordingly. Links to ids that do not exist are left untouched.
inline StudyGraph renumber_ids(StudyGraph g) {
  std::map<Id, Id> hyp, exp;
  for (std::size_t i = 0; i < g.hypotheses.size(); ++i)
    hyp.emplace(g.hypotheses[i].id, "H" + std::to_string(i + 1));
  for (std::size_t i = 0; i < g.experiments.size(); ++i)
    exp.emplace(g.experiments[i].id, "E" + std::to_string(i + 1));

  auto remap = [](IdList& ids, const std::map<Id, Id>& table) {
    for (auto& id : ids)
      if (auto it = table.find(id); it != table.end()) id = it->second;
  };
  for (std::size_t i = 0; i < g.hypotheses.size(); ++i) g.hypotheses[i].id = "H" + std::to_string(i + 1);
  for (std::size_t i = 0; i < g.experiments.size(); ++i) {
    g.experiments[i].id = "E" + std::to_string(i + 1);
    remap(g.experiments[i].hypothesis_ids, hyp);
  }
  for (std::size_t i = 0; i < g.interpretations.size(); ++i) {
    g.interpretations[i].id = "I" + std::to_string(i + 1);
    remap(g.interpretations[i].hypothesis_ids, hyp);
    remap(g.interpretations[i].experiment_ids, exp);
  }
  return g;
}

}  // namespace repro
