#pragma once

// Canonical `.study` documents.
//
// A study document is a JSON object:
//
//   {
//     "format_version": "1",
//     "metadata": {"source_id": ..., "title": ..., "token_count": ...},
//     "hypotheses": [{"id", "statement", "kind"}],
//     "experiments": [{"id", "description", "hypothesis_ids", "metrics",
//                      "statistics", "strategy", "tests", "results"}],
//     "interpretations": [{"id", "statement", "hypothesis_ids",
//                          "experiment_ids", "verdict"}]
//   }
//
// serialize_graph always writes keys in the order above, keeps list order,
// omits absent optionals and prints numbers in shortest round-trip form, so
// equal graphs produce identical bytes.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "repro/graph.hpp"
#include "repro/json_util.hpp"

namespace repro {

// ---------------------------------------------------------------------------
// Writers

inline Json to_json(const ResultValue& v) {
  Json j = Json::object();
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ScalarValue>) {
          j["kind"] = "scalar";
          j["value"] = x.value;
          if (x.uncertainty) j["uncertainty"] = *x.uncertainty;
        } else if constexpr (std::is_same_v<T, IntervalValue>) {
          j["kind"] = "interval";
          j["low"] = x.low;
          j["high"] = x.high;
        } else if constexpr (std::is_same_v<T, CategoricalValue>) {
          j["kind"] = "categorical";
          j["text"] = x.text;
        } else {
          j["kind"] = "missing";
        }
      },
      v);
  return j;
}

inline Json to_json(const MetricSpec& m) {
  Json j = Json::object();
  j["name"] = m.name;
  if (m.description) j["description"] = *m.description;
  if (m.unit) j["unit"] = *m.unit;
  put_annotations(j, m.annotations);
  return j;
}

inline Json to_json(const AssessmentTest& t) {
  Json j = Json::object();
  j["kind"] = to_string(t.kind);
  j["description"] = t.description;
  put_annotations(j, t.annotations);
  return j;
}

inline Json to_json(const ResultRecord& r) {
  Json j = Json::object();
  j["metric_name"] = r.metric_name;
  j["context"] = r.context;
  j["value"] = to_json(r.value);
  j["locator"] = r.locator;
  if (r.unmatched) j["unmatched"] = true;
  put_annotations(j, r.annotations);
  return j;
}

inline Json to_json(const Hypothesis& h) {
  Json j = Json::object();
  j["id"] = h.id;
  j["statement"] = h.statement;
  j["kind"] = to_string(h.kind);
  put_annotations(j, h.annotations);
  return j;
}

inline Json to_json(const Experiment& e) {
  Json j = Json::object();
  j["id"] = e.id;
  j["description"] = e.description;
  j["hypothesis_ids"] = e.hypothesis_ids;
  j["metrics"] = Json::array();
  for (const auto& m : e.metrics) j["metrics"].push_back(to_json(m));
  j["statistics"] = e.statistics;
  j["strategy"] = e.strategy;
  j["tests"] = Json::array();
  for (const auto& t : e.tests) j["tests"].push_back(to_json(t));
  j["results"] = Json::array();
  for (const auto& r : e.results) j["results"].push_back(to_json(r));
  put_annotations(j, e.annotations);
  return j;
}

inline Json to_json(const Interpretation& i) {
  Json j = Json::object();
  j["id"] = i.id;
  j["statement"] = i.statement;
  j["hypothesis_ids"] = i.hypothesis_ids;
  j["experiment_ids"] = i.experiment_ids;
  j["verdict"] = to_string(i.verdict);
  put_annotations(j, i.annotations);
  return j;
}

inline Json to_json(const StudyMetadata& m) {
  Json j = Json::object();
  j["source_id"] = m.source_id;
  j["title"] = m.title;
  if (m.token_count) j["token_count"] = *m.token_count;
  put_annotations(j, m.annotations);
  return j;
}

inline Json to_json(const StudyGraph& g) {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["metadata"] = to_json(g.metadata);
  j["hypotheses"] = Json::array();
  for (const auto& h : g.hypotheses) j["hypotheses"].push_back(to_json(h));
  j["experiments"] = Json::array();
  for (const auto& e : g.experiments) j["experiments"].push_back(to_json(e));
  j["interpretations"] = Json::array();
  for (const auto& i : g.interpretations) j["interpretations"].push_back(to_json(i));
  put_annotations(j, g.annotations);
  return j;
}

inline std::string serialize_graph(const StudyGraph& g) { return dump_canonical(to_json(g)); }

// ---------------------------------------------------------------------------
// Readers

inline ResultValue result_value_from_json(const Json& j, const std::string& path) {
  ObjectReader r(j, path);
  std::string kind = r.string("kind");
  ResultValue out;
  if (kind == "scalar") {
    ScalarValue s;
    s.value = r.number("value");
    s.uncertainty = r.optional_number("uncertainty");
    out = s;
  } else if (kind == "interval") {
    out = IntervalValue{r.number("low"), r.number("high")};
  } else if (kind == "categorical") {
    out = CategoricalValue{r.string("text")};
  } else if (kind == "missing") {
    out = MissingValue{};
  } else {
    r.fail("invalid literal '" + kind + "' (expected one of scalar, interval, categorical, missing)", "kind");
  }
  // Value objects are closed: a missing value must not carry a payload.
  r.finish(ParseMode::strict);
  return out;
}

inline MetricSpec metric_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  MetricSpec m;
  m.name = r.string("name");
  m.description = r.optional_string("description");
  m.unit = r.optional_string("unit");
  m.annotations = r.finish(mode);
  return m;
}

inline AssessmentTest test_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  AssessmentTest t;
  t.kind = read_enum<TestKind>(r, "kind", test_kind_from, "statistical, direct_comparison, visual");
  t.description = r.string_or("description", "");
  t.annotations = r.finish(mode);
  return t;
}

inline ResultRecord result_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  ResultRecord rec;
  rec.metric_name = r.string("metric_name");
  rec.context = r.string_or("context", "");
  rec.value = result_value_from_json(r.required("value"), r.child("value"));
  rec.locator = r.string_or("locator", "");
  rec.unmatched = r.boolean_or("unmatched", false);
  rec.annotations = r.finish(mode);
  return rec;
}

inline Hypothesis hypothesis_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  Hypothesis h;
  h.id = r.string("id");
  h.statement = r.string("statement");
  if (r.has("kind"))
    h.kind = read_enum<HypothesisKind>(r, "kind", hypothesis_kind_from, "stated, post_hoc");
  h.annotations = r.finish(mode);
  return h;
}

inline Experiment experiment_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  Experiment e;
  e.id = r.string("id");
  e.description = r.string("description");
  e.hypothesis_ids = r.string_list("hypothesis_ids");
  const Json& metrics = r.array("metrics", false);
  for (std::size_t i = 0; i < metrics.size(); ++i)
    e.metrics.push_back(metric_from_json(metrics[i], r.child("metrics/" + std::to_string(i)), mode));
  e.statistics = r.string_list("statistics", false);
  e.strategy = r.string_or("strategy", "");
  const Json& tests = r.array("tests", false);
  for (std::size_t i = 0; i < tests.size(); ++i)
    e.tests.push_back(test_from_json(tests[i], r.child("tests/" + std::to_string(i)), mode));
  const Json& results = r.array("results", false);
  for (std::size_t i = 0; i < results.size(); ++i)
    e.results.push_back(result_from_json(results[i], r.child("results/" + std::to_string(i)), mode));
  e.annotations = r.finish(mode);
  return e;
}

inline Interpretation interpretation_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  Interpretation i;
  i.id = r.string("id");
  i.statement = r.string("statement");
  i.hypothesis_ids = r.string_list("hypothesis_ids");
  i.experiment_ids = r.string_list("experiment_ids");
  i.verdict = read_enum<Verdict>(r, "verdict", verdict_from, "supports, repudiates, inconclusive");
  i.annotations = r.finish(mode);
  return i;
}

inline StudyMetadata metadata_from_json(const Json& j, const std::string& path, ParseMode mode) {
  ObjectReader r(j, path);
  StudyMetadata m;
  m.source_id = r.string("source_id");
  m.title = r.string_or("title", "");
  m.token_count = r.optional_integer("token_count");
  m.annotations = r.finish(mode);
  return m;
}

inline StudyGraph graph_from_json(const Json& j, ParseMode mode = ParseMode::strict) {
  ObjectReader r(j, "");
  check_format_version(r);
  StudyGraph g;
  g.metadata = metadata_from_json(r.required("metadata"), "/metadata", mode);
  const Json& hyps = r.array("hypotheses");
  for (std::size_t i = 0; i < hyps.size(); ++i)
    g.hypotheses.push_back(hypothesis_from_json(hyps[i], "/hypotheses/" + std::to_string(i), mode));
  const Json& exps = r.array("experiments");
  for (std::size_t i = 0; i < exps.size(); ++i)
    g.experiments.push_back(experiment_from_json(exps[i], "/experiments/" + std::to_string(i), mode));
  const Json& ints = r.array("interpretations");
  for (std::size_t i = 0; i < ints.size(); ++i)
    g.interpretations.push_back(
        interpretation_from_json(ints[i], "/interpretations/" + std::to_string(i), mode));
  g.annotations = r.finish(mode);
  return g;
}

/// Parses a `.study` document. Throws ParseError.
inline StudyGraph parse_graph(std::string_view text, ParseMode mode = ParseMode::strict) {
  return graph_from_json(parse_json_text(text), mode);
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline StudyGraph load_study(const std::string& path, ParseMode mode = ParseMode::strict) {
  return parse_graph(read_text_file(path), mode);
}

inline void save_study(const std::string& path, const StudyGraph& g) {
  write_text_file(path, serialize_graph(g));
}

}  // namespace repro
