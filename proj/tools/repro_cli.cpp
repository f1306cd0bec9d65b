#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "repro/default_prompt.hpp"
#include "repro/http_client.hpp"
#include "repro/repro.hpp"
#include "repro/service.hpp"

namespace {

using namespace repro;

// Exit codes: 0 success, 1 the input is well-formed but fails a check,
// 2 usage or I/O problems, 3 extraction gave up.
constexpr int kFindings = 1;
constexpr int kFailure = 2;
constexpr int kExhausted = 3;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

void print_violations(const ValidationReport& report, std::ostream& out) {
  for (const auto& v : report.violations)
    out << (v.severity() == Severity::error ? "error" : "warning") << '\t' << to_string(v.code) << '\t'
        << v.element_id.value_or("-") << '\t' << v.message << '\n';
}

struct ExtractArgs {
  std::string doc;
  std::string prompt;
  std::string model = "default";
  double temperature = 0.0;
  int max_repairs = 2;
  std::string source_id;
  std::string out;
  std::string run_dir;
  std::vector<std::string> mock_responses;
  bool lenient = false;
};

int run_extract(const ExtractArgs& a) {
  DocumentSource doc;
  doc.body = read_text_file(a.doc);
  doc.source_id = a.source_id.empty() ? std::filesystem::path(a.doc).stem().string() : a.source_id;
  PromptBundle bundle = a.prompt.empty() ? default_prompt_bundle() : parse_prompt_bundle(read_text_file(a.prompt));

  ExtractionConfig config;
  config.model_name = a.model;
  config.temperature = a.temperature;
  config.max_repair_attempts = a.max_repairs;
  config.strict_parse = !a.lenient;

  std::unique_ptr<CompletionClient> client;
  if (!a.mock_responses.empty()) {
    std::vector<std::string> scripted;
    for (const auto& f : a.mock_responses) scripted.push_back(read_text_file(f));
    client = std::make_unique<MockCompletionClient>(std::move(scripted));
    config.model_name = "mock";
  } else {
    auto http = HttpCompletionClient::from_environment();
    if (!http) throw std::invalid_argument(std::string(kEndpointEnv) + " is not set (or pass --mock-response)");
    client = std::make_unique<HttpCompletionClient>(std::move(*http));
  }

  const std::string stamp = utc_timestamp();
  try {
    ExtractionResult r = extract_study(doc, bundle, config, *client);
    if (!a.run_dir.empty()) write_run_log(r.log, a.run_dir, stamp);
    if (a.out.empty()) std::cout << serialize_graph(r.graph);
    else save_study(a.out, r.graph);
    std::cerr << "extracted " << r.graph.hypotheses.size() << " hypotheses, " << r.graph.experiments.size()
              << " experiments, " << r.graph.interpretations.size() << " interpretations in "
              << r.log.attempts.size() << " attempt(s)\n";
    return 0;
  } catch (const ExtractionExhausted& e) {
    if (!a.run_dir.empty()) write_run_log(e.log(), a.run_dir, stamp);
    std::cerr << "repro: " << e.what() << '\n';
    return kExhausted;
  }
}

int run_validate(const std::string& file, bool lenient) {
  StudyGraph g = load_study(file, lenient ? ParseMode::lenient : ParseMode::strict);
  ValidationReport report = validate_graph(g);
  print_violations(report, std::cout);
  if (report.empty()) std::cout << "ok\n";
  return report.clean() ? 0 : kFindings;
}

int run_compare(const std::string& extracted, const std::string& corrected, double tolerance) {
  CorrectionSet set = compare_graphs(load_study(extracted), load_study(corrected), {tolerance});
  std::cout << serialize_corrections(set);
  return 0;
}

int run_report(const std::string& dir, bool likert, double tolerance) {
  auto studies = load_dataset(dir);
  if (studies.empty()) {
    std::cerr << "repro: no studies under '" << dir << "'\n";
    return kFailure;
  }
  DatasetReport r = report_dataset(studies, {tolerance});
  std::cout << format_error_table(r.errors);
  if (likert) std::cout << '\n' << format_likert_table(r.likert);
  return 0;
}

int run_score(const std::string& study, const std::string& attempt) {
  StudyGraph g = load_study(study);
  ReproductionAttempt a = parse_attempt(read_text_file(attempt));
  CoverageScore s = score_reproduction(g, a);
  std::cout << "interpretations_upheld\t" << Percent::round(100.0 * s.interpretations_upheld).to_string() << "%\n"
            << "hypotheses_supported\t" << Percent::round(100.0 * s.hypotheses_supported).to_string() << "%\n"
            << "experiments_reproduced\t" << Percent::round(100.0 * s.experiments_reproduced).to_string() << "%\n\n";
  for (const auto& e : explain_score(g, a)) std::cout << e.element_id << '\t' << e.status << '\t' << e.reason << '\n';
  return 0;
}

httplib::Server* g_server = nullptr;

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir;
  std::string static_dir;
  std::vector<std::string> required_ratings;
};

int run_serve(const ServeArgs& a) {
  FinalizeOptions options;
  for (const auto& c : a.required_ratings) {
    auto cat = rating_category_from(c);
    if (!cat) throw std::invalid_argument("unknown rating category '" + c + "'");
    options.required_ratings.insert(*cat);
  }
  const std::string dir = a.data_dir.empty() ? env_or("REPRO_DATA_DIR", "repro-data") : a.data_dir;
  SessionService service(dir, options);
  httplib::Server server;
  mount_routes(server, service);
  if (!a.static_dir.empty() && !server.set_mount_point("/", a.static_dir))
    throw std::invalid_argument("static directory '" + a.static_dir + "' does not exist");

  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  std::cerr << "serving " << service.session_ids().size() << " session(s) from " << dir << " on http://" << a.host
            << ':' << a.port << '\n';
  if (!server.listen(a.host, a.port)) {
    std::cerr << "repro: cannot listen on " << a.host << ':' << a.port << '\n';
    return kFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extract, review and score study graphs of empirical publications."};
  app.require_subcommand(1);
  std::function<int()> command;

  ExtractArgs ex;
  auto* extract = app.add_subcommand("extract", "Extract a study graph from a publication text via an LLM");
  extract->add_option("doc", ex.doc, "Publication text file")->required()->check(CLI::ExistingFile);
  extract->add_option("--prompt", ex.prompt, "Prompt bundle file (default: built-in bundle)")->check(CLI::ExistingFile);
  extract->add_option("--model", ex.model, "Model name sent to the endpoint")->capture_default_str();
  extract->add_option("--temperature", ex.temperature, "Sampling temperature")->capture_default_str()->check(CLI::NonNegativeNumber);
  extract->add_option("--max-repairs", ex.max_repairs, "Repair prompts after a failed parse")->capture_default_str()->check(CLI::NonNegativeNumber);
  extract->add_option("--source-id", ex.source_id, "Study id (default: file stem)");
  extract->add_option("-o,--out", ex.out, "Write the graph here instead of stdout");
  extract->add_option("--run-dir", ex.run_dir, "Directory for prompt/response logs");
  extract->add_option("--mock-response", ex.mock_responses, "Answer from these files instead of an endpoint (repeatable)")
      ->check(CLI::ExistingFile);
  extract->add_flag("--lenient", ex.lenient, "Keep unknown fields as annotations");
  extract->callback([&] { command = [&] { return run_extract(ex); }; });

  std::string file;
  bool lenient = false;
  auto* validate = app.add_subcommand("validate", "Check a .study file against the graph invariants");
  validate->add_option("file", file, ".study file")->required()->check(CLI::ExistingFile);
  validate->add_flag("--lenient", lenient, "Accept unknown fields");
  validate->callback([&] { command = [&] { return run_validate(file, lenient); }; });

  std::string extracted, corrected;
  double tolerance = 0.0;
  auto* compare = app.add_subcommand("compare", "Print the correction set between two graphs of one study");
  compare->add_option("extracted", extracted)->required()->check(CLI::ExistingFile);
  compare->add_option("corrected", corrected)->required()->check(CLI::ExistingFile);
  compare->add_option("--tolerance", tolerance, "Absolute tolerance for numeric results")->check(CLI::NonNegativeNumber);
  compare->callback([&] { command = [&] { return run_compare(extracted, corrected, tolerance); }; });

  std::string dataset;
  bool likert = false;
  auto* report = app.add_subcommand("report", "Error table over a dataset of reviewed studies");
  report->add_option("dataset-dir", dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--likert", likert, "Append the rating distribution table");
  report->add_option("--tolerance", tolerance, "Absolute tolerance for numeric results")->check(CLI::NonNegativeNumber);
  report->callback([&] { command = [&] { return run_report(dataset, likert, tolerance); }; });

  std::string study, attempt;
  auto* score = app.add_subcommand("score", "Coverage of a reproduction attempt");
  score->add_option("study", study, ".study file")->required()->check(CLI::ExistingFile);
  score->add_option("attempt", attempt, ".attempt file")->required()->check(CLI::ExistingFile);
  score->callback([&] { command = [&] { return run_score(study, attempt); }; });

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Run the review-session service");
  serve->add_option("--host", sv.host)->capture_default_str();
  serve->add_option("--port", sv.port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve->add_option("--dataset-dir", sv.data_dir, "Data directory (default: $REPRO_DATA_DIR or ./repro-data)");
  serve->add_option("--static", sv.static_dir, "Serve static files (the review UI build) from this directory");
  serve->add_option("--require-rating", sv.required_ratings,
                    "Category that needs a rating before finalize (repeatable)");
  serve->callback([&] { command = [&] { return run_serve(sv); }; });

  CLI11_PARSE(app, argc, argv);
  try {
    return command();
  } catch (const ParseError& e) {
    std::cerr << "repro: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "repro: " << e.what() << '\n';
  }
  return kFailure;
}
