#pragma once

// Error-rate aggregation over correction sets, laid out like the published
// error table: statement, link, detail and result categories, each with an
// error count, a population and a percentage.
//
// Rounding rules:
//   * proportions are rounded half-to-even at two decimals, computed exactly
//     on integers (15/32 -> 46.88, 9/32 -> 28.12);
//   * the mean edit distance over edited statements is rounded up;
//   * the mean relative edit is rounded half-to-even at two decimals.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "repro/corrections.hpp"
#include "repro/graph.hpp"
#include "repro/levenshtein.hpp"

namespace repro {

/// Fixed-point percentage in hundredths of a percent.
class Percent {
 public:
  constexpr Percent() = default;
  static constexpr Percent from_hundredths(std::int64_t h) { return Percent(h); }

  /// round_half_even(100 * numerator / denominator) at two decimals.
  static Percent of(std::uint64_t numerator, std::uint64_t denominator) {
    if (denominator == 0) throw std::invalid_argument("percentage of an empty population");
    const unsigned __int128 scaled = static_cast<unsigned __int128>(numerator) * 10000u;
    std::uint64_t q = static_cast<std::uint64_t>(scaled / denominator);
    const unsigned __int128 twice_rem = (scaled % denominator) * 2u;
    if (twice_rem > denominator || (twice_rem == denominator && (q % 2u) == 1u)) ++q;
    return Percent(static_cast<std::int64_t>(q));
  }

  /// Half-to-even rounding of an arbitrary real percentage.
  static Percent round(double pct) {
    return Percent(static_cast<std::int64_t>(std::nearbyint(static_cast<long double>(pct) * 100.0L)));
  }

  constexpr std::int64_t hundredths() const { return h_; }
  constexpr double value() const { return static_cast<double>(h_) / 100.0; }

  std::string to_string() const {
    std::int64_t abs = h_ < 0 ? -h_ : h_;
    std::string frac = std::to_string(abs % 100);
    if (frac.size() < 2) frac.insert(0, "0");
    return (h_ < 0 ? "-" : "") + std::to_string(abs / 100) + "." + frac;
  }

  friend constexpr auto operator<=>(const Percent&, const Percent&) = default;

 private:
  constexpr explicit Percent(std::int64_t h) : h_(h) {}
  std::int64_t h_ = 0;
};

enum class ErrorCategory {
  hypothesis_statements,
  interpretation_statements,
  experiment_hypothesis_links,
  interpretation_hypothesis_links,
  interpretation_experiment_links,
  experiment_metrics,
  experiment_statistics,
  experiment_strategy,
  experiment_results,
};

inline constexpr std::array<ErrorCategory, 9> kErrorCategories = {
    ErrorCategory::hypothesis_statements,          ErrorCategory::interpretation_statements,
    ErrorCategory::experiment_hypothesis_links,    ErrorCategory::interpretation_hypothesis_links,
    ErrorCategory::interpretation_experiment_links, ErrorCategory::experiment_metrics,
    ErrorCategory::experiment_statistics,          ErrorCategory::experiment_strategy,
    ErrorCategory::experiment_results,
};

inline std::string_view label_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::hypothesis_statements: return "Hypothesis Statements";
    case ErrorCategory::interpretation_statements: return "Interpretation Statements";
    case ErrorCategory::experiment_hypothesis_links: return "Experiment Hypothesis links";
    case ErrorCategory::interpretation_hypothesis_links: return "Interpretation Hypothesis links";
    case ErrorCategory::interpretation_experiment_links: return "Interpretation Experiment links";
    case ErrorCategory::experiment_metrics: return "Experiment Metrics";
    case ErrorCategory::experiment_statistics: return "Experiment Statistics";
    case ErrorCategory::experiment_strategy: return "Experiment Strategy";
    case ErrorCategory::experiment_results: return "Experiment Results";
  }
  return "";
}

inline std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::hypothesis_statements: return "hypothesis_statements";
    case ErrorCategory::interpretation_statements: return "interpretation_statements";
    case ErrorCategory::experiment_hypothesis_links: return "experiment_hypothesis_links";
    case ErrorCategory::interpretation_hypothesis_links: return "interpretation_hypothesis_links";
    case ErrorCategory::interpretation_experiment_links: return "interpretation_experiment_links";
    case ErrorCategory::experiment_metrics: return "experiment_metrics";
    case ErrorCategory::experiment_statistics: return "experiment_statistics";
    case ErrorCategory::experiment_strategy: return "experiment_strategy";
    case ErrorCategory::experiment_results: return "experiment_results";
  }
  return "";
}

/// Element totals each category's error count is measured against.
struct Populations {
  std::uint64_t hypotheses = 0;
  std::uint64_t experiments = 0;
  std::uint64_t interpretations = 0;
  std::uint64_t result_values = 0;

  std::uint64_t for_category(ErrorCategory c) const {
    switch (c) {
      case ErrorCategory::hypothesis_statements: return hypotheses;
      case ErrorCategory::interpretation_statements:
      case ErrorCategory::interpretation_hypothesis_links:
      case ErrorCategory::interpretation_experiment_links: return interpretations;
      case ErrorCategory::experiment_hypothesis_links:
      case ErrorCategory::experiment_metrics:
      case ErrorCategory::experiment_statistics:
      case ErrorCategory::experiment_strategy: return experiments;
      case ErrorCategory::experiment_results: return result_values;
    }
    return 0;
  }

  friend bool operator==(const Populations&, const Populations&) = default;
};

/// Populations taken from a set of (corrected) graphs.
inline Populations populations_of(const std::vector<StudyGraph>& graphs) {
  Populations p;
  for (const auto& g : graphs) {
    p.hypotheses += g.hypotheses.size();
    p.experiments += g.experiments.size();
    p.interpretations += g.interpretations.size();
    for (const auto& e : g.experiments) p.result_values += e.results.size();
  }
  return p;
}

/// Per-statement edit magnitude: Levenshtein distance and the distance as a
/// share of the corrected statement.
struct EditSample {
  std::size_t distance = 0;
  double relative_pct = 0.0;
};

/// Raw error tallies, before proportions are taken.
struct ErrorCounts {
  std::array<std::uint64_t, kErrorCategories.size()> counts{};
  std::vector<EditSample> hypothesis_edits;
  std::vector<EditSample> interpretation_edits;

  std::uint64_t& operator[](ErrorCategory c) { return counts[static_cast<std::size_t>(c)]; }
  std::uint64_t operator[](ErrorCategory c) const { return counts[static_cast<std::size_t>(c)]; }
};

inline EditSample edit_sample(const StatementEdit& e) {
  return {e.distance(), relative_edit_pct(e.original, e.corrected)};
}

inline void accumulate(ErrorCounts& out, const CorrectionSet& set) {
  for (const auto& s : set.statement_edits) {
    if (s.kind == ElementKind::hypothesis) {
      ++out[ErrorCategory::hypothesis_statements];
      out.hypothesis_edits.push_back(edit_sample(s));
    } else if (s.kind == ElementKind::interpretation) {
      ++out[ErrorCategory::interpretation_statements];
      out.interpretation_edits.push_back(edit_sample(s));
    }
  }
  for (const auto& l : set.link_edits) {
    switch (l.field) {
      case LinkField::exp_hyp: ++out[ErrorCategory::experiment_hypothesis_links]; break;
      case LinkField::int_hyp: ++out[ErrorCategory::interpretation_hypothesis_links]; break;
      case LinkField::int_exp: ++out[ErrorCategory::interpretation_experiment_links]; break;
    }
  }
  for (const auto& d : set.detail_edits) {
    if (!d.changed) continue;
    switch (d.category) {
      case DetailCategory::metrics: ++out[ErrorCategory::experiment_metrics]; break;
      case DetailCategory::statistics: ++out[ErrorCategory::experiment_statistics]; break;
      case DetailCategory::strategy: ++out[ErrorCategory::experiment_strategy]; break;
      case DetailCategory::tests: break;  // not an error-table row
    }
  }
  for (const auto& r : set.result_edits)
    out[ErrorCategory::experiment_results] += r.missing_count() + r.incorrect_count();
}

struct EditSummary {
  std::uint64_t mean_edit_distance = 0;  // rounded up
  Percent mean_relative_edit_pct;
  std::size_t edited = 0;
};

struct ErrorRow {
  ErrorCategory category;
  std::uint64_t error_count = 0;
  std::uint64_t population = 0;
  Percent proportion;
  std::optional<EditSummary> edits;  // statement categories with >= 1 edit
};

struct ErrorReport {
  std::vector<ErrorRow> rows;

  const ErrorRow& row(ErrorCategory c) const {
    for (const auto& r : rows)
      if (r.category == c) return r;
    throw std::out_of_range("category not in report");
  }
};

class EmptyPopulation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::optional<EditSummary> summarize_edits(const std::vector<EditSample>& samples) {
  if (samples.empty()) return std::nullopt;
  std::uint64_t total = 0;
  long double rel = 0.0L;
  for (const auto& s : samples) {
    total += s.distance;
    rel += s.relative_pct;
  }
  const std::uint64_t n = samples.size();
  EditSummary out;
  out.edited = samples.size();
  out.mean_edit_distance = (total + n - 1) / n;
  out.mean_relative_edit_pct = Percent::round(static_cast<double>(rel / static_cast<long double>(n)));
  return out;
}

/// Turns raw tallies into the report. Throws EmptyPopulation when a
/// category's population is zero and std::invalid_argument when a count
/// exceeds its population.
inline ErrorReport aggregate_counts(const ErrorCounts& counts, const Populations& populations) {
  ErrorReport report;
  for (ErrorCategory c : kErrorCategories) {
    ErrorRow row;
    row.category = c;
    row.error_count = counts[c];
    row.population = populations.for_category(c);
    if (row.population == 0)
      throw EmptyPopulation("population for '" + std::string(label_of(c)) + "' is zero");
    if (row.error_count > row.population)
      throw std::invalid_argument("'" + std::string(label_of(c)) + "' has " + std::to_string(row.error_count) +
                                  " errors over a population of " + std::to_string(row.population));
    row.proportion = Percent::of(row.error_count, row.population);
    if (c == ErrorCategory::hypothesis_statements) row.edits = summarize_edits(counts.hypothesis_edits);
    if (c == ErrorCategory::interpretation_statements) row.edits = summarize_edits(counts.interpretation_edits);
    report.rows.push_back(row);
  }
  return report;
}

inline ErrorReport aggregate_reports(const std::vector<CorrectionSet>& sets, const Populations& populations) {
  ErrorCounts counts;
  for (const auto& s : sets) accumulate(counts, s);
  return aggregate_counts(counts, populations);
}

/// Delimiter-separated table: one line per published row, statement
/// categories followed by their edit-distance line.
inline std::string format_error_table(const ErrorReport& report, char delim = '\t') {
  std::ostringstream out;
  out << "category" << delim << "error_count" << delim << "proportion_pct\n";
  for (const auto& row : report.rows) {
    out << label_of(row.category) << delim << row.error_count << delim << row.proportion.to_string() << "\n";
    if (row.category == ErrorCategory::hypothesis_statements ||
        row.category == ErrorCategory::interpretation_statements) {
      std::string_view name = row.category == ErrorCategory::hypothesis_statements
                                  ? "Hypothesis Edit Distance"
                                  : "Interpretation Edit Distance";
      out << name << delim;
      if (row.edits)
        out << row.edits->mean_edit_distance << delim << row.edits->mean_relative_edit_pct.to_string() << "\n";
      else
        out << "-" << delim << "-\n";
    }
  }
  return out.str();
}

}  // namespace repro
