#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "repro/report.hpp"

namespace repro {

enum class LikertScale { five = 5, seven = 7 };

/// Review categories. Hypotheses are rated on seven points, everything else
/// on five.
enum class RatingCategory { hypothesis, experiment_description, experiment_details, interpretation };

inline constexpr int points(LikertScale s) { return static_cast<int>(s); }

inline LikertScale expected_scale(RatingCategory c) {
  return c == RatingCategory::hypothesis ? LikertScale::seven : LikertScale::five;
}

inline std::string_view to_string(RatingCategory c) {
  switch (c) {
    case RatingCategory::hypothesis: return "hypothesis";
    case RatingCategory::experiment_description: return "experiment_description";
    case RatingCategory::experiment_details: return "experiment_details";
    case RatingCategory::interpretation: return "interpretation";
  }
  return "";
}

inline std::optional<RatingCategory> rating_category_from(std::string_view s) {
  if (s == "hypothesis") return RatingCategory::hypothesis;
  if (s == "experiment_description") return RatingCategory::experiment_description;
  if (s == "experiment_details") return RatingCategory::experiment_details;
  if (s == "interpretation") return RatingCategory::interpretation;
  return std::nullopt;
}

inline std::optional<LikertScale> likert_scale_from(int n) {
  if (n == 5) return LikertScale::five;
  if (n == 7) return LikertScale::seven;
  return std::nullopt;
}

struct LikertRating {
  std::string subject;  // element id, or a category name for whole-study ratings
  RatingCategory category = RatingCategory::hypothesis;
  LikertScale scale = LikertScale::seven;
  int value = 1;

  friend bool operator==(const LikertRating&, const LikertRating&) = default;
};

class InvalidRating : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MixedScale : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InvalidRating when the value is off-scale or the scale does not
/// match the category.
inline void check_rating(const LikertRating& r) {
  if (r.value < 1 || r.value > points(r.scale))
    throw InvalidRating("rating " + std::to_string(r.value) + " is outside the " +
                        std::to_string(points(r.scale)) + "-point scale");
  if (r.scale != expected_scale(r.category))
    throw InvalidRating(std::string(to_string(r.category)) + " ratings use a " +
                        std::to_string(points(expected_scale(r.category))) + "-point scale");
}

struct LikertDistribution {
  RatingCategory category;
  LikertScale scale;
  std::vector<std::uint64_t> counts;  // counts[k-1] = ratings equal to k
  std::uint64_t total = 0;

  std::uint64_t count(int point) const { return counts.at(static_cast<std::size_t>(point - 1)); }
  int midpoint() const { return (points(scale) + 1) / 2; }

  Percent share(int point) const { return Percent::of(count(point), total); }

  // Diverging layout: below, at and above the neutral midpoint.
  Percent negative() const { return Percent::of(sum(1, midpoint() - 1), total); }
  Percent neutral() const { return Percent::of(count(midpoint()), total); }
  Percent positive() const { return Percent::of(sum(midpoint() + 1, points(scale)), total); }

 private:
  std::uint64_t sum(int from, int to) const {
    std::uint64_t s = 0;
    for (int k = from; k <= to; ++k) s += count(k);
    return s;
  }
};

/// Counts ratings per category. Categories with no ratings are omitted.
/// Throws MixedScale when one category mixes five- and seven-point ratings.
inline std::vector<LikertDistribution> likert_summary(const std::vector<LikertRating>& ratings) {
  std::map<RatingCategory, LikertDistribution> by_category;
  for (const auto& r : ratings) {
    auto it = by_category.find(r.category);
    if (it == by_category.end()) {
      LikertDistribution d{r.category, r.scale, std::vector<std::uint64_t>(static_cast<std::size_t>(points(r.scale))), 0};
      it = by_category.emplace(r.category, std::move(d)).first;
    } else if (it->second.scale != r.scale) {
      throw MixedScale("category '" + std::string(to_string(r.category)) + "' mixes 5- and 7-point ratings");
    }
    if (r.value < 1 || r.value > points(r.scale))
      throw InvalidRating("rating " + std::to_string(r.value) + " is outside the " +
                          std::to_string(points(r.scale)) + "-point scale");
    ++it->second.counts[static_cast<std::size_t>(r.value - 1)];
    ++it->second.total;
  }
  std::vector<LikertDistribution> out;
  for (auto& [_, d] : by_category) out.push_back(std::move(d));
  return out;
}

/// Long-format table for an external plotting step:
/// category, scale, point, count, percent, side (negative/neutral/positive).
inline std::string format_likert_table(const std::vector<LikertDistribution>& dists, char delim = '\t') {
  std::ostringstream out;
  out << "category" << delim << "scale" << delim << "point" << delim << "count" << delim << "percent" << delim
      << "side\n";
  for (const auto& d : dists) {
    for (int k = 1; k <= points(d.scale); ++k) {
      std::string_view side = k < d.midpoint() ? "negative" : k == d.midpoint() ? "neutral" : "positive";
      out << to_string(d.category) << delim << points(d.scale) << delim << k << delim << d.count(k) << delim
          << d.share(k).to_string() << delim << side << "\n";
    }
  }
  return out.str();
}

/// `ratings.table`: subject, category, scale, value; one rating per line.
inline std::string format_ratings_table(const std::vector<LikertRating>& ratings, char delim = '\t') {
  std::ostringstream out;
  out << "subject" << delim << "category" << delim << "scale" << delim << "value\n";
  for (const auto& r : ratings)
    out << r.subject << delim << to_string(r.category) << delim << points(r.scale) << delim << r.value << "\n";
  return out.str();
}

inline std::vector<LikertRating> parse_ratings_table(std::string_view text, char delim = '\t') {
  std::vector<LikertRating> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> cols;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, delim)) cols.push_back(cell);
    if (cols.size() != 4) throw InvalidRating("ratings line " + std::to_string(lineno) + ": expected 4 columns");
    auto cat = rating_category_from(cols[1]);
    if (!cat) throw InvalidRating("ratings line " + std::to_string(lineno) + ": unknown category '" + cols[1] + "'");
    std::optional<LikertScale> scale;
    int value = 0;
    try {
      scale = likert_scale_from(std::stoi(cols[2]));
      value = std::stoi(cols[3]);
    } catch (const std::exception&) {
      throw InvalidRating("ratings line " + std::to_string(lineno) + ": non-numeric scale or value");
    }
    if (!scale) throw InvalidRating("ratings line " + std::to_string(lineno) + ": scale must be 5 or 7");
    LikertRating r{cols[0], *cat, *scale, value};
    check_rating(r);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace repro
