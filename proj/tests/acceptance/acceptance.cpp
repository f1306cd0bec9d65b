// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "repro/repro.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/synthetic_dataset.hpp"

using namespace repro;
using namespace repro::testing;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
  std::vector<std::string> failures;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

using Check = std::function<Outcome()>;

// ---------------------------------------------------------------------------

Outcome levenshtein_oracle() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  auto words = all_strings(U"ab", 6);
  std::size_t pairs = 0;
  for (const auto& a : words)
    for (const auto& b : words) {
      ++pairs;
      std::size_t want = brute_force_distance(a, b);
      o.expect(edit_distance(a, b) == want, to_utf8(a) + " / " + to_utf8(b));
      o.expect(levenshtein(to_utf8(a), to_utf8(b)) == want, "utf8 path " + to_utf8(a) + " / " + to_utf8(b));
    }

  Rng rng(20240601);
  const std::u32string alphabet = U"abcdeé日🙂";
  for (int i = 0; i < 1000; ++i) {
    auto word = [&] {
      std::u32string s(pick(rng, 0, 40), U'a');
      for (auto& c : s) c = alphabet[pick(rng, 0, alphabet.size() - 1)];
      return s;
    };
    std::u32string a = word(), b = word();
    std::size_t want = memo_distance(a, b);
    o.expect(levenshtein(to_utf8(a), to_utf8(b)) == want, "random pair " + to_utf8(a) + " / " + to_utf8(b));
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s exceeds 10 s");
  std::ostringstream d;
  d << pairs << " exhaustive pairs (length <= 6 over {a,b}) + 1000 random pairs (length <= 40)";
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------

Outcome published_proportions() {
  Outcome o;
  Populations p;
  p.hypotheses = 29;
  p.experiments = 32;
  p.interpretations = 37;
  p.result_values = 1584;
  const std::vector<std::tuple<ErrorCategory, std::uint64_t, std::string>> published = {
      {ErrorCategory::hypothesis_statements, 19, "65.52"},
      {ErrorCategory::interpretation_statements, 9, "24.32"},
      {ErrorCategory::experiment_hypothesis_links, 6, "18.75"},
      {ErrorCategory::interpretation_hypothesis_links, 0, "0.00"},
      {ErrorCategory::interpretation_experiment_links, 2, "5.41"},
      {ErrorCategory::experiment_metrics, 15, "46.88"},
      {ErrorCategory::experiment_statistics, 9, "28.12"},
      {ErrorCategory::experiment_strategy, 10, "31.25"},
      {ErrorCategory::experiment_results, 1103, "69.63"},
  };
  ErrorCounts counts;
  for (const auto& [c, n, _] : published) counts[c] = n;
  ErrorReport r = aggregate_counts(counts, p);
  std::string table = format_error_table(r);
  for (const auto& [c, n, pct] : published) {
    std::string line = std::string(label_of(c)) + "\t" + std::to_string(n) + "\t" + pct + "\n";
    o.expect(table.find(line) != std::string::npos, "missing row: " + line.substr(0, line.size() - 1));
  }
  o.detail = "9 of 9 published proportions as formatted strings; the two edit-distance rows need raw strings "
             "and are checked on the synthetic dataset (criterion 3)";
  return o;
}

// ---------------------------------------------------------------------------

std::string expected_table(const InjectionLog& log) {
  // Independent formatting of the expected output from the injection log:
  // proportions by integer half-to-even rounding, mean distances by ceiling,
  // mean relative edits from exact rational sums.
  auto pct = [](std::uint64_t num, std::uint64_t den) {
    std::uint64_t q = num * 10000 / den, rem = num * 10000 % den;
    if (2 * rem > den || (2 * rem == den && q % 2)) ++q;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(q / 100),
                  static_cast<unsigned long long>(q % 100));
    return std::string(buf);
  };
  auto edits = [&](const std::vector<StatementInjection>& v) {
    if (v.empty()) return std::string("-\t-");
    std::uint64_t dist = 0;
    long double rel = 0;
    for (const auto& e : v) {
      dist += e.distance;
      rel += 100.0L * e.distance / e.corrected_len;
    }
    std::uint64_t mean = (dist + v.size() - 1) / v.size();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%llu\t%.2Lf", static_cast<unsigned long long>(mean), rel / v.size());
    return std::string(buf);
  };
  const Populations& p = log.populations;
  std::ostringstream t;
  t << "category\terror_count\tproportion_pct\n";
  for (ErrorCategory c : kErrorCategories) {
    t << label_of(c) << '\t' << log[c] << '\t' << pct(log[c], p.for_category(c)) << '\n';
    if (c == ErrorCategory::hypothesis_statements) t << "Hypothesis Edit Distance\t" << edits(log.hyp_edits) << '\n';
    if (c == ErrorCategory::interpretation_statements)
      t << "Interpretation Edit Distance\t" << edits(log.int_edits) << '\n';
  }
  return t.str();
}

Outcome dataset_replay() {
  Outcome o;
  const std::string published =
      "category\terror_count\tproportion_pct\n"
      "Hypothesis Statements\t19\t65.52\n"
      "Hypothesis Edit Distance\t43\t14.90\n"
      "Interpretation Statements\t9\t24.32\n"
      "Interpretation Edit Distance\t35\t4.79\n"
      "Experiment Hypothesis links\t6\t18.75\n"
      "Interpretation Hypothesis links\t0\t0.00\n"
      "Interpretation Experiment links\t2\t5.41\n"
      "Experiment Metrics\t15\t46.88\n"
      "Experiment Statistics\t9\t28.12\n"
      "Experiment Strategy\t10\t31.25\n"
      "Experiment Results\t1103\t69.63\n";

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SyntheticDataset d = reference_dataset(seed);
    TempDir dir;
    write_dataset(d, dir.path());
    auto studies = load_dataset(dir.path());
    o.expect(studies.size() == 20, "expected 20 studies, found " + std::to_string(studies.size()));
    for (const auto& s : studies) {
      o.expect(validate_graph(s.extracted).clean(), s.name + ": extracted graph invalid");
      o.expect(validate_graph(s.corrected).clean(), s.name + ": corrected graph invalid");
    }
    std::string got = format_error_table(report_dataset(studies).errors);
    std::string want = expected_table(d.log);
    o.expect(got == want, "seed " + std::to_string(seed) + ": report differs from injection log:\n" + got);
    o.expect(want == published, "seed " + std::to_string(seed) + ": injection log does not match published counts");
  }
  o.detail = "published dataset not bundled; 3 synthetic 20-study datasets, report equals injection log "
             "and the published 11-row table";
  return o;
}

// ---------------------------------------------------------------------------

std::set<ViolationCode> error_codes(const StudyGraph& g) {
  std::set<ViolationCode> out;
  for (const auto& v : validate_graph(g).errors()) out.insert(v.code);
  return out;
}

Outcome invariant_suite() {
  Outcome o;
  Rng rng(424242);
  std::size_t mutations = 0;
  for (int i = 0; i < 10000; ++i) {
    const StudyGraph g = random_graph(rng);
    o.expect(validate_graph(g).clean(), "false positive on generated graph " + std::to_string(i));

    // drop a referenced element
    {
      StudyGraph m = g;
      std::vector<Id> hyps, exps;
      for (const auto& e : m.experiments) hyps.insert(hyps.end(), e.hypothesis_ids.begin(), e.hypothesis_ids.end());
      for (const auto& in : m.interpretations) exps.insert(exps.end(), in.experiment_ids.begin(), in.experiment_ids.end());
      std::set<ViolationCode> want{ViolationCode::dangling_reference};
      if (m.hypotheses.size() >= 2 && coin(rng)) {
        Id victim = hyps[pick(rng, 0, hyps.size() - 1)];
        std::erase_if(m.hypotheses, [&](const Hypothesis& h) { return h.id == victim; });
      } else {
        Id victim = exps[pick(rng, 0, exps.size() - 1)];
        std::erase_if(m.experiments, [&](const Experiment& e) { return e.id == victim; });
      }
      o.expect(error_codes(m) == want, "drop referenced element: wrong codes");
      ++mutations;
    }
    // duplicate id
    {
      StudyGraph m = g;
      switch (pick(rng, 0, 2)) {
        case 0: m.hypotheses.push_back(m.hypotheses[pick(rng, 0, m.hypotheses.size() - 1)]); break;
        case 1: m.experiments.push_back(m.experiments[pick(rng, 0, m.experiments.size() - 1)]); break;
        default: m.interpretations.push_back(m.interpretations[pick(rng, 0, m.interpretations.size() - 1)]); break;
      }
      o.expect(error_codes(m) == std::set{ViolationCode::duplicate_id}, "duplicate id: wrong codes");
      ++mutations;
    }
    // empty statement
    {
      StudyGraph m = g;
      std::string blank = coin(rng) ? "" : " \t\n";
      switch (pick(rng, 0, 2)) {
        case 0: m.hypotheses[pick(rng, 0, m.hypotheses.size() - 1)].statement = blank; break;
        case 1: m.experiments[pick(rng, 0, m.experiments.size() - 1)].description = blank; break;
        default: m.interpretations[pick(rng, 0, m.interpretations.size() - 1)].statement = blank; break;
      }
      o.expect(error_codes(m) == std::set{ViolationCode::empty_statement}, "empty statement: wrong codes");
      ++mutations;
    }
    // orphan experiment
    {
      StudyGraph m = g;
      m.experiments[pick(rng, 0, m.experiments.size() - 1)].hypothesis_ids.clear();
      o.expect(error_codes(m) == std::set{ViolationCode::orphan_experiment}, "orphan experiment: wrong codes");
      ++mutations;
    }
  }
  o.detail = "10000 generated graphs clean, " + std::to_string(mutations) + " single mutations flagged exactly";
  return o;
}

// ---------------------------------------------------------------------------

Outcome round_trip() {
  Outcome o;
  auto digest = [&](std::uint64_t seed, bool check) {
    Rng rng(seed);
    std::uint64_t h = 0;
    for (int i = 0; i < 10000; ++i) {
      StudyGraph g = random_graph(rng);
      std::string doc = serialize_graph(g);
      if (check) {
        StudyGraph back = parse_graph(doc);
        o.expect(back == g, "parse(serialize(g)) != g for graph " + std::to_string(i));
        o.expect(serialize_graph(back) == doc, "serialize not a fixpoint for graph " + std::to_string(i));
        o.expect(serialize_graph(g) == doc, "serialize not deterministic for graph " + std::to_string(i));
      }
      h = fnv1a64(hex64(h) + doc);
    }
    return h;
  };
  std::uint64_t first = digest(777, true);
  std::uint64_t second = digest(777, false);
  o.expect(first == second, "byte streams differ between runs");
  o.detail = "10000 graphs, identity and fixpoint; digest " + hex64(first) + " stable across runs";
  return o;
}

// ---------------------------------------------------------------------------

Outcome extraction_paths() {
  Outcome o;
  const DocumentSource doc{"doe2024minimal", "We compare method A and method B.", 1200};
  PromptBundle bundle;
  bundle.instructions = "Extract the study.";
  bundle.few_shot_examples = {{"excerpt", serialize_graph(minimal_graph())}};
  const std::string good = "Sure:\n" + serialize_graph(minimal_graph());

  auto run = [&](std::vector<std::string> script, int max_repairs, std::size_t& calls) -> std::optional<ExtractionLog> {
    MockCompletionClient client(std::move(script));
    ExtractionConfig config;
    config.max_repair_attempts = max_repairs;
    try {
      auto r = extract_study(doc, bundle, config, client);
      calls = client.calls();
      o.expect(r.graph == minimal_graph(), "extracted graph differs");
      return r.log;
    } catch (const ExtractionExhausted& e) {
      calls = client.calls();
      return std::nullopt;
    }
  };

  std::size_t calls = 0;
  auto happy = run({good}, 2, calls);
  o.expect(happy && calls == 1 && happy->attempts.size() == 1, "happy path: expected 1 call");
  auto repair = run({"no idea", good}, 2, calls);
  o.expect(repair && calls == 2 && repair->attempts.size() == 2, "repair path: expected 2 calls");
  for (int k : {0, 1, 2, 5}) {
    auto none = run({"garbage"}, k, calls);
    o.expect(!none && calls == static_cast<std::size_t>(1 + k),
             "exhaustion with max_repair_attempts=" + std::to_string(k) + ": " + std::to_string(calls) + " calls");
  }

  // deterministic logs across repeated runs, including the written files
  std::string first, second;
  for (std::string* out : {&first, &second}) {
    MockCompletionClient client({"no idea", good});
    auto r = extract_study(doc, bundle, {}, client);
    TempDir dir;
    for (const auto& f : write_run_log(r.log, dir.path(), "run")) *out += f.filename().string() + "\n" + read_text_file(f.string());
  }
  o.expect(first == second, "run logs differ between identical runs");
  o.detail = "1 / 2 / (1 + max_repair_attempts) calls; run logs byte-identical";
  return o;
}

// ---------------------------------------------------------------------------

Outcome coverage_scorer() {
  Outcome o;
  Rng rng(99);
  GraphShape shape;
  shape.every_hypothesis_supported = true;

  auto full = [](const StudyGraph& g) {
    ReproductionAttempt a;
    for (const auto& e : g.experiments) a.experiment_outcomes[e.id] = {true, true, {}};
    for (const auto& i : g.interpretations) a.interpretation_verdicts[i.id] = true;
    return a;
  };

  for (int i = 0; i < 1000; ++i) {
    StudyGraph g = random_graph(rng, shape);
    CoverageScore empty = score_reproduction(g, {});
    o.expect(empty.interpretations_upheld == 0.0 && empty.hypotheses_supported == 0.0 &&
                 empty.experiments_reproduced == 0.0,
             "empty attempt scored above 0");
    CoverageScore all = score_reproduction(g, full(g));
    o.expect(all.interpretations_upheld == 1.0 && all.hypotheses_supported == 1.0 && all.experiments_reproduced == 1.0,
             "full attempt scored below 1");
  }

  std::size_t flips = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    StudyGraph g = random_graph(rng, shape);
    ReproductionAttempt a = full(g);
    for (auto& [id, up] : a.interpretation_verdicts) up = coin(rng);
    std::vector<Id> down;
    for (const auto& [id, up] : a.interpretation_verdicts)
      if (!up) down.push_back(id);
    if (down.empty()) a.interpretation_verdicts.begin()->second = false, down.push_back(a.interpretation_verdicts.begin()->first);
    CoverageScore before = score_reproduction(g, a);
    a.interpretation_verdicts[down[pick(rng, 0, down.size() - 1)]] = true;
    CoverageScore after = score_reproduction(g, a);
    ++flips;
    o.expect(after.interpretations_upheld > before.interpretations_upheld, "upheld fraction did not grow");
    o.expect(after.hypotheses_supported >= before.hypotheses_supported, "supported fraction decreased");
    o.expect(after.experiments_reproduced == before.experiments_reproduced, "experiment fraction changed");
    for (const auto& [h, s] : before.per_hypothesis)
      o.expect(!s || after.per_hypothesis.at(h), "hypothesis lost support after an uphold");
  }

  // two supporting interpretations on one hypothesis, all four combinations
  StudyGraph g = minimal_graph();
  g.interpretations.push_back({"I2", "Second reading.", {"H1"}, {"E1"}, Verdict::supports, {}});
  for (int mask = 0; mask < 4; ++mask) {
    ReproductionAttempt a = full(g);
    a.interpretation_verdicts["I1"] = mask & 1;
    a.interpretation_verdicts["I2"] = mask & 2;
    CoverageScore s = score_reproduction(g, a);
    double upheld = ((mask & 1) ? 0.5 : 0.0) + ((mask & 2) ? 0.5 : 0.0);
    o.expect(s.interpretations_upheld == upheld, "hand case: upheld fraction for mask " + std::to_string(mask));
    o.expect(s.hypotheses_supported == (mask == 3 ? 1.0 : 0.0), "hand case: support for mask " + std::to_string(mask));
  }
  o.detail = "bounds on 1000 graphs, " + std::to_string(flips) + " monotone uphold flips, 4-combination hand case";
  return o;
}

// ---------------------------------------------------------------------------

Outcome cross_module() {
  Outcome o;
  Rng rng(8080);
  std::size_t nonempty = 0, rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    StudyGraph g = random_graph(rng);
    ReviewSession s = random_session(rng, g, pick(rng, 1, 25), &rejected);
    CorrectionSet acc = s.corrections();
    CorrectionSet cmp = compare_graphs(s.extracted(), s.working_copy());
    o.expect(acc == cmp, "accumulated set differs from compare_graphs in trial " + std::to_string(i));
    o.expect(validate_graph(s.working_copy()).clean(), "working copy invalid in trial " + std::to_string(i));
    nonempty += acc.empty() ? 0 : 1;
  }
  o.detail = "1000 random sessions (" + std::to_string(nonempty) + " with edits, " + std::to_string(rejected) +
             " events rejected by validation)";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Check>> criteria = {
      {"levenshtein oracle equivalence", levenshtein_oracle},
      {"error-table proportions from published counts", published_proportions},
      {"dataset replay through report", dataset_replay},
      {"graph invariant suite", invariant_suite},
      {"canonical round-trip", round_trip},
      {"extraction pipeline with mock client", extraction_paths},
      {"coverage scorer bounds and monotonicity", coverage_scorer},
      {"compare_graphs equals accumulated corrections", cross_module},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& [name, check] = criteria[i];
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.ok = false;
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::cout << (o.ok ? "PASS" : "FAIL") << "  criterion " << i + 1 << ": " << name << " [" << o.detail << "] ("
              << timing << ")\n";
    for (const auto& f : o.failures) std::cout << "      " << f << "\n";
    failed += o.ok ? 0 : 1;
  }
  std::cout << (failed ? "FAILED: " + std::to_string(failed) + " criterion(s)" : "all criteria passed") << "\n";
  return failed ? 1 : 0;
}
