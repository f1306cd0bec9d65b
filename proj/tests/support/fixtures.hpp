#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "repro/repro.hpp"

namespace repro::testing {

/// Smallest legal graph: one hypothesis, one experiment on it, one
/// interpretation tying both together. The experiment declares one metric so
/// that not even a warning is raised.
inline StudyGraph minimal_graph() {
  StudyGraph g;
  g.metadata = {"doe2024minimal", "A minimal study", 1200, {}};
  g.hypotheses = {{"H1", "Method A is faster than method B.", HypothesisKind::stated, {}}};
  Experiment e;
  e.id = "E1";
  e.description = "Time both methods on the benchmark suite.";
  e.hypothesis_ids = {"H1"};
  e.metrics = {{"runtime", std::string("wall-clock time"), std::string("s"), {}}};
  e.statistics = {"median over 10 runs"};
  e.strategy = "Same hardware, warm cache.";
  e.tests = {{TestKind::direct_comparison, "A's median below B's", {}}};
  e.results = {{"runtime", "method A", ScalarValue{0.5, std::nullopt}, "Table 1", false, {}},
               {"runtime", "method B", ScalarValue{0.75, 0.01}, "Table 1", false, {}}};
  g.experiments = {e};
  g.interpretations = {{"I1", "A is faster, as hypothesised.", {"H1"}, {"E1"}, Verdict::supports, {}}};
  return g;
}

/// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("repro_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace repro::testing
