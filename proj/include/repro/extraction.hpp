#pragma once

// LLM-backed extraction of a study graph from publication text.
//
// extract_study runs a sequential prompt -> parse loop. When a response
// cannot be turned into a valid graph, the failure message is appended
// verbatim to the prompt and the model is asked again, at most
// max_repair_attempts times.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "repro/graph.hpp"
#include "repro/json_util.hpp"
#include "repro/study_io.hpp"
#include "repro/validate.hpp"

namespace repro {

struct DocumentSource {
  std::string source_id;
  std::string body;
  std::optional<std::int64_t> token_count;
};

struct FewShotExample {
  std::string input_excerpt;
  std::string expected_output;

  friend bool operator==(const FewShotExample&, const FewShotExample&) = default;
};

struct PromptBundle {
  std::string version = "1";
  std::string label;
  std::string instructions;
  bool few_shot = true;
  std::vector<FewShotExample> few_shot_examples;
  std::vector<std::string> section_hints;
  std::vector<std::string> keyword_hints;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

struct ExtractionConfig {
  std::string model_name = "mock";
  double temperature = 0.0;
  int max_repair_attempts = 2;
  bool strict_parse = true;
};

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Completion endpoint. Implementations must tolerate concurrent calls and be
/// deterministic whenever the backing service is.
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;
  virtual std::string complete(const std::string& prompt, const ExtractionConfig& config) = 0;
};

/// Returns scripted responses in order; the last one repeats once the script
/// runs out. Records every prompt it receives.
class MockCompletionClient : public CompletionClient {
 public:
  explicit MockCompletionClient(std::vector<std::string> responses) : responses_(std::move(responses)) {}

  std::string complete(const std::string& prompt, const ExtractionConfig&) override {
    std::lock_guard lock(mu_);
    prompts_.push_back(prompt);
    if (responses_.empty()) throw TransportError("mock client has no scripted response");
    std::size_t i = std::min(calls_++, responses_.size() - 1);
    return responses_[i];
  }

  std::size_t calls() const {
    std::lock_guard lock(mu_);
    return calls_;
  }

  std::vector<std::string> prompts() const {
    std::lock_guard lock(mu_);
    return prompts_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> responses_;
  std::vector<std::string> prompts_;
  std::size_t calls_ = 0;
};

inline void check_bundle(const PromptBundle& b) {
  if (b.few_shot && b.few_shot_examples.empty())
    throw std::invalid_argument("few-shot prompting needs at least one example");
}

inline void check_config(const ExtractionConfig& c) {
  if (!(c.temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (c.max_repair_attempts < 0) throw std::invalid_argument("max_repair_attempts must be >= 0");
}

/// Prompt layout: instructions, few-shot examples (input then output, in
/// order), hints when any are given, then the publication text.
inline std::string build_prompt(const DocumentSource& doc, const PromptBundle& bundle) {
  if (doc.body.empty()) throw std::invalid_argument("document body is empty");
  check_bundle(bundle);

  std::string p = bundle.instructions;
  if (!p.empty() && p.back() != '\n') p += '\n';

  if (bundle.few_shot) {
    for (std::size_t i = 0; i < bundle.few_shot_examples.size(); ++i) {
      const auto& ex = bundle.few_shot_examples[i];
      p += "\n### Example " + std::to_string(i + 1) + "\n";
      p += "Input:\n" + ex.input_excerpt;
      if (!ex.input_excerpt.empty() && ex.input_excerpt.back() != '\n') p += '\n';
      p += "Output:\n" + ex.expected_output;
      if (!ex.expected_output.empty() && ex.expected_output.back() != '\n') p += '\n';
    }
  }

  if (!bundle.section_hints.empty() || !bundle.keyword_hints.empty()) {
    p += "\n### Hints\n";
    if (!bundle.section_hints.empty()) {
      p += "Sections that may contain the target information:\n";
      for (const auto& s : bundle.section_hints) p += "- " + s + "\n";
    }
    if (!bundle.keyword_hints.empty()) {
      p += "Keywords that may signal essential information:\n";
      for (const auto& k : bundle.keyword_hints) p += "- " + k + "\n";
    }
  }

  p += "\n### Publication";
  if (!doc.source_id.empty()) p += " (" + doc.source_id + ")";
  p += "\n" + doc.body;
  if (doc.body.back() != '\n') p += '\n';
  return p;
}

inline std::string repair_prompt(const std::string& base_prompt, const std::string& failure) {
  return base_prompt + "\n### Correction request\nYour previous answer could not be used:\n" + failure +
         "\nReturn the complete corrected document only.\n";
}

// ---------------------------------------------------------------------------
// Response parsing

namespace detail {

/// End (one past) of the balanced JSON object starting at `open`, honouring
/// string literals, or npos when the text ends first.
inline std::size_t match_object(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

}  // namespace detail

/// Finds the first well-formed document block in a model response: a
/// balanced JSON object that parses and carries "format_version" or
/// "hypotheses". Surrounding prose and code fences are ignored. The block is
/// then parsed and validated; error-level violations fail the parse. A blank
/// source id or absent token count is taken from `doc` before validation.
inline StudyGraph parse_model_response(std::string_view text, ParseMode mode = ParseMode::strict,
                                       const DocumentSource* doc = nullptr) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
    std::size_t end = detail::match_object(text, open);
    if (end == std::string_view::npos) break;
    Json j;
    try {
      j = Json::parse(text.substr(open, end - open));
    } catch (const nlohmann::json::parse_error&) {
      continue;
    }
    if (!j.is_object() || !(j.contains("format_version") || j.contains("hypotheses"))) continue;

    StudyGraph g;
    try {
      g = graph_from_json(j, mode);
    } catch (const ParseError& e) {
      throw ParseError(e.reason(), e.offset() ? std::optional(*e.offset() + open) : std::nullopt, e.path());
    }
    if (doc) {
      if (g.metadata.source_id.find_first_not_of(" \t\r\n") == std::string::npos) g.metadata.source_id = doc->source_id;
      if (!g.metadata.token_count) g.metadata.token_count = doc->token_count;
    }
    ValidationReport report = validate_graph(g);
    if (!report.clean()) {
      const Violation v = report.errors().front();
      throw ParseError("graph violates invariant " + std::string(to_string(v.code)) + ": " + v.message,
                       std::nullopt, "");
    }
    return g;
  }
  throw ParseError("no document block found in response", std::nullopt, "");
}

// ---------------------------------------------------------------------------
// Pipeline

struct ExtractionAttempt {
  std::size_t index = 0;  // 1-based
  std::string prompt;
  std::string response;
  bool parsed = false;
  std::string outcome;  // "ok" or the parse failure message

  friend bool operator==(const ExtractionAttempt&, const ExtractionAttempt&) = default;
};

struct ExtractionLog {
  std::string source_id;
  std::string model_name;
  double temperature = 0.0;
  std::size_t document_chars = 0;
  std::vector<ExtractionAttempt> attempts;

  friend bool operator==(const ExtractionLog&, const ExtractionLog&) = default;
};

struct ExtractionResult {
  StudyGraph graph;
  ExtractionLog log;
};

class ExtractionExhausted : public std::runtime_error {
 public:
  explicit ExtractionExhausted(ExtractionLog log)
      : std::runtime_error("extraction failed after " + std::to_string(log.attempts.size()) + " attempts: " +
                           (log.attempts.empty() ? std::string() : log.attempts.back().outcome)),
        log_(std::move(log)) {}

  const ExtractionLog& log() const { return log_; }

 private:
  ExtractionLog log_;
};

/// Prompts the client until its response parses into a clean graph.
/// Throws ExtractionExhausted after 1 + max_repair_attempts failures;
/// TransportError propagates from the client untouched.
inline ExtractionResult extract_study(const DocumentSource& doc, const PromptBundle& bundle,
                                      const ExtractionConfig& config, CompletionClient& client) {
  check_config(config);
  const std::string base = build_prompt(doc, bundle);
  const ParseMode mode = config.strict_parse ? ParseMode::strict : ParseMode::lenient;

  ExtractionLog log{doc.source_id, config.model_name, config.temperature, doc.body.size(), {}};
  std::string prompt = base;
  const auto max_calls = static_cast<std::size_t>(config.max_repair_attempts) + 1;
  for (std::size_t call = 1; call <= max_calls; ++call) {
    ExtractionAttempt attempt;
    attempt.index = call;
    attempt.prompt = prompt;
    attempt.response = client.complete(prompt, config);
    try {
      StudyGraph g = parse_model_response(attempt.response, mode, &doc);
      attempt.parsed = true;
      attempt.outcome = "ok";
      log.attempts.push_back(std::move(attempt));
      return {std::move(g), std::move(log)};
    } catch (const ParseError& e) {
      attempt.outcome = e.what();
      prompt = repair_prompt(base, attempt.outcome);
      log.attempts.push_back(std::move(attempt));
    }
  }
  throw ExtractionExhausted(std::move(log));
}

// ---------------------------------------------------------------------------
// Persistence

inline Json to_json(const ExtractionLog& log) {
  Json j = Json::object();
  j["source_id"] = log.source_id;
  j["model_name"] = log.model_name;
  j["temperature"] = log.temperature;
  j["document_chars"] = log.document_chars;
  j["attempts"] = Json::array();
  for (const auto& a : log.attempts) {
    Json e = Json::object();
    e["index"] = a.index;
    e["prompt_chars"] = a.prompt.size();
    e["response_chars"] = a.response.size();
    e["parsed"] = a.parsed;
    e["outcome"] = a.outcome;
    j["attempts"].push_back(std::move(e));
  }
  return j;
}

inline std::string utc_timestamp(std::chrono::system_clock::time_point t = std::chrono::system_clock::now()) {
  std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return out.str();
}

/// Writes one request/response text pair per attempt plus a JSON summary
/// into `run_dir`, file names prefixed with `stamp`. Returns the paths.
inline std::vector<std::filesystem::path> write_run_log(const ExtractionLog& log, const std::filesystem::path& run_dir,
                                                        const std::string& stamp = utc_timestamp()) {
  std::filesystem::create_directories(run_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& a : log.attempts) {
    std::string base = stamp + "_attempt" + std::to_string(a.index);
    auto req = run_dir / (base + ".request.txt");
    auto resp = run_dir / (base + ".response.txt");
    write_text_file(req.string(), a.prompt);
    write_text_file(resp.string(), a.response);
    written.push_back(req);
    written.push_back(resp);
  }
  auto summary = run_dir / (stamp + "_log.json");
  write_text_file(summary.string(), dump_canonical(to_json(log)));
  written.push_back(summary);
  return written;
}

// ---------------------------------------------------------------------------
// Prompt bundle files

inline Json to_json(const PromptBundle& b) {
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["version"] = b.version;
  j["label"] = b.label;
  j["instructions"] = b.instructions;
  j["few_shot"] = b.few_shot;
  j["few_shot_examples"] = Json::array();
  for (const auto& ex : b.few_shot_examples)
    j["few_shot_examples"].push_back(Json{{"input", ex.input_excerpt}, {"output", ex.expected_output}});
  j["section_hints"] = b.section_hints;
  j["keyword_hints"] = b.keyword_hints;
  return j;
}

inline PromptBundle parse_prompt_bundle(std::string_view text) {
  Json j = parse_json_text(text);
  ObjectReader r(j, "");
  check_format_version(r);
  PromptBundle b;
  b.version = r.string("version");
  b.label = r.string_or("label", "");
  b.instructions = r.string("instructions");
  b.few_shot = r.boolean_or("few_shot", true);
  const Json& ex = r.array("few_shot_examples", false);
  for (std::size_t i = 0; i < ex.size(); ++i) {
    ObjectReader e(ex[i], "/few_shot_examples/" + std::to_string(i));
    FewShotExample f{e.string("input"), e.string("output")};
    e.finish(ParseMode::strict);
    b.few_shot_examples.push_back(std::move(f));
  }
  b.section_hints = r.string_list("section_hints", false);
  b.keyword_hints = r.string_list("keyword_hints", false);
  r.finish(ParseMode::strict);
  check_bundle(b);
  return b;
}

inline std::string serialize_prompt_bundle(const PromptBundle& b) { return dump_canonical(to_json(b)); }

}  // namespace repro
