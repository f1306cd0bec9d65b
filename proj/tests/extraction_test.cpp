#include <gtest/gtest.h>

#include <thread>

#include "repro/default_prompt.hpp"
#include "repro/http_client.hpp"
#include "repro/repro.hpp"
#include "support/fixtures.hpp"

using namespace repro;
using repro::testing::minimal_graph;

namespace {

PromptBundle bundle_with(std::size_t examples, bool hints) {
  PromptBundle b;
  b.label = "test";
  b.instructions = "Extract the study.";
  for (std::size_t i = 1; i <= examples; ++i)
    b.few_shot_examples.push_back({"input " + std::to_string(i), "output " + std::to_string(i)});
  b.few_shot = examples > 0;
  if (hints) {
    b.section_hints = {"Results"};
    b.keyword_hints = {"we hypothesise"};
  }
  return b;
}

DocumentSource document() { return {"doe2024minimal", "We compare method A and method B.", 1200}; }

}  // namespace

TEST(BuildPrompt, OmitsHintsWhenEmpty) {
  std::string p = build_prompt(document(), bundle_with(1, false));
  EXPECT_EQ(p.find("### Hints"), std::string::npos);
  EXPECT_NE(p.find("### Publication (doe2024minimal)\nWe compare"), std::string::npos);
}

TEST(BuildPrompt, SectionOrder) {
  std::string p = build_prompt(document(), bundle_with(2, true));
  std::vector<std::size_t> at{p.find("Extract the study."), p.find("input 1"), p.find("output 1"), p.find("input 2"),
                              p.find("output 2"),           p.find("### Hints"), p.find("we hypothesise"),
                              p.find("We compare method A")};
  for (std::size_t k = 0; k < at.size(); ++k) ASSERT_NE(at[k], std::string::npos) << k;
  EXPECT_TRUE(std::is_sorted(at.begin(), at.end()));
}

TEST(BuildPrompt, Deterministic) {
  EXPECT_EQ(build_prompt(document(), bundle_with(2, true)), build_prompt(document(), bundle_with(2, true)));
}

TEST(BuildPrompt, RejectsBadInput) {
  EXPECT_THROW(build_prompt({"x", "", std::nullopt}, bundle_with(1, false)), std::invalid_argument);
  PromptBundle b = bundle_with(0, false);
  b.few_shot = true;
  EXPECT_THROW(build_prompt(document(), b), std::invalid_argument);
}

TEST(ParseResponse, ExactDocument) {
  EXPECT_EQ(parse_model_response(serialize_graph(minimal_graph())), minimal_graph());
}

TEST(ParseResponse, SurroundingProse) {
  std::string text = "Here is the analysis:\n```json\n" + serialize_graph(minimal_graph()) +
                     "```\nLet me know if {anything} needs changes.";
  EXPECT_EQ(parse_model_response(text), minimal_graph());
}

TEST(ParseResponse, SkipsUnrelatedObjects) {
  std::string text = R"(Schema: {"type": "object"} and the answer: )" + serialize_graph(minimal_graph());
  EXPECT_EQ(parse_model_response(text), minimal_graph());
}

TEST(ParseResponse, InvariantViolationIsAParseFailure) {
  StudyGraph g = minimal_graph();
  g.interpretations[0].experiment_ids.clear();
  try {
    parse_model_response(serialize_graph(g));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("interpretation_without_experiment"), std::string::npos) << e.what();
  }
}

TEST(ParseResponse, Garbage) {
  EXPECT_THROW(parse_model_response("I could not read the paper."), ParseError);
  EXPECT_THROW(parse_model_response("{\"hypotheses\": [ oops"), ParseError);
}

TEST(ParseResponse, FillsSourceFromDocument) {
  StudyGraph g = minimal_graph();
  g.metadata.source_id = "";
  g.metadata.token_count.reset();
  DocumentSource doc = document();
  EXPECT_THROW(parse_model_response(serialize_graph(g)), ParseError);
  EXPECT_EQ(parse_model_response(serialize_graph(g), ParseMode::strict, &doc), minimal_graph());
}

TEST(Extract, HappyPath) {
  MockCompletionClient client({serialize_graph(minimal_graph())});
  ExtractionResult r = extract_study(document(), bundle_with(1, false), {}, client);
  EXPECT_EQ(r.graph, minimal_graph());
  ASSERT_EQ(r.log.attempts.size(), 1u);
  EXPECT_TRUE(r.log.attempts[0].parsed);
  EXPECT_EQ(client.calls(), 1u);
}

TEST(Extract, RepairsOnce) {
  MockCompletionClient client({"garbage", serialize_graph(minimal_graph())});
  ExtractionResult r = extract_study(document(), bundle_with(1, false), {}, client);
  ASSERT_EQ(r.log.attempts.size(), 2u);
  EXPECT_FALSE(r.log.attempts[0].parsed);
  EXPECT_TRUE(r.log.attempts[1].parsed);
  EXPECT_NE(client.prompts()[1].find("### Correction request"), std::string::npos);
  EXPECT_NE(client.prompts()[1].find(r.log.attempts[0].outcome), std::string::npos);
}

TEST(Extract, Exhausts) {
  MockCompletionClient client({"garbage"});
  ExtractionConfig config;
  config.max_repair_attempts = 2;
  try {
    extract_study(document(), bundle_with(1, false), config, client);
    FAIL();
  } catch (const ExtractionExhausted& e) {
    EXPECT_EQ(e.log().attempts.size(), 3u);
    EXPECT_EQ(client.calls(), 3u);
  }
}

TEST(Extract, ZeroRepairs) {
  MockCompletionClient client({"garbage", serialize_graph(minimal_graph())});
  ExtractionConfig config;
  config.max_repair_attempts = 0;
  EXPECT_THROW(extract_study(document(), bundle_with(1, false), config, client), ExtractionExhausted);
  EXPECT_EQ(client.calls(), 1u);
}

TEST(Extract, TransportErrorsPropagate) {
  MockCompletionClient client({});
  EXPECT_THROW(extract_study(document(), bundle_with(1, false), {}, client), TransportError);
}

TEST(Extract, LogIsDeterministic) {
  auto run = [] {
    MockCompletionClient client({"garbage", serialize_graph(minimal_graph())});
    return extract_study(document(), bundle_with(2, true), {}, client).log;
  };
  EXPECT_EQ(run(), run());
  EXPECT_EQ(dump_canonical(to_json(run())), dump_canonical(to_json(run())));
}

TEST(Extract, ConcurrentJobsShareAClient) {
  MockCompletionClient client({serialize_graph(minimal_graph())});
  std::vector<std::thread> threads;
  std::vector<StudyGraph> out(4);
  for (std::size_t k = 0; k < out.size(); ++k)
    threads.emplace_back([&, k] { out[k] = extract_study(document(), bundle_with(1, false), {}, client).graph; });
  for (auto& t : threads) t.join();
  for (const auto& g : out) EXPECT_EQ(g, minimal_graph());
  EXPECT_EQ(client.calls(), 4u);
}

TEST(RunLog, WritesRequestResponseAndSummary) {
  repro::testing::TempDir dir;
  MockCompletionClient client({"garbage", serialize_graph(minimal_graph())});
  auto log = extract_study(document(), bundle_with(1, false), {}, client).log;
  auto files = write_run_log(log, dir.path(), "20260101T000000Z");
  ASSERT_EQ(files.size(), 5u);
  EXPECT_EQ(read_text_file((dir.path() / "20260101T000000Z_attempt1.response.txt").string()), "garbage");
  EXPECT_EQ(read_text_file((dir.path() / "20260101T000000Z_attempt2.request.txt").string()), log.attempts[1].prompt);
  Json summary = parse_json_text(read_text_file((dir.path() / "20260101T000000Z_log.json").string()));
  EXPECT_EQ(summary["attempts"].size(), 2u);
}

TEST(PromptBundleFormat, DefaultBundleRoundTrips) {
  PromptBundle b = default_prompt_bundle();
  EXPECT_NE(b.label.find("reconstructed"), std::string::npos);
  std::string doc = serialize_prompt_bundle(b);
  EXPECT_EQ(parse_prompt_bundle(doc), b);
  EXPECT_EQ(parse_model_response(b.few_shot_examples.at(0).expected_output), default_example_graph());
}

TEST(PromptBundleFormat, ShippedBundleMatchesDefault) {
  std::string shipped = read_text_file(std::string(REPRO_DATA_DIR_SRC) + "/prompts/default.bundle.json");
  EXPECT_EQ(parse_prompt_bundle(shipped), default_prompt_bundle());
}

TEST(HttpClient, EndpointAndBodies) {
  auto [base, path] = split_endpoint("http://localhost:8080/v1/complete");
  EXPECT_EQ(base, "http://localhost:8080");
  EXPECT_EQ(path, "/v1/complete");
  EXPECT_EQ(completion_text_from_body(R"({"text": "a"})"), "a");
  EXPECT_EQ(completion_text_from_body(R"({"choices": [{"message": {"content": "b"}}]})"), "b");
  EXPECT_EQ(completion_text_from_body(R"({"other": 1})"), R"({"other": 1})");
  EXPECT_EQ(completion_text_from_body("plain text"), "plain text");
  EXPECT_THROW(split_endpoint("not a url"), std::invalid_argument);
}
