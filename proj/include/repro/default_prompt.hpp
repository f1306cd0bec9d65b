#pragma once

// Built-in prompt bundle. This is a reconstruction written for this toolkit;
// the original study prompt is published separately and is not bundled.
// Deployments are expected to keep their prompts as versioned bundle files
// (see data/prompts/) and pass them with --prompt.

#include "repro/extraction.hpp"
#include "repro/study_io.hpp"

namespace repro {

inline StudyGraph default_example_graph() {
  StudyGraph g;
  g.metadata = {"example2024pruning", "Magnitude pruning of small convolutional networks", std::nullopt, {}};
  g.hypotheses = {
      {"H1", "Magnitude pruning to 50% sparsity does not reduce CIFAR-10 accuracy by more than one percentage point.",
       HypothesisKind::post_hoc, {}},
  };
  Experiment e;
  e.id = "E1";
  e.description = "Train a ResNet-20 on CIFAR-10, prune 50% of weights by magnitude, fine-tune, and compare test "
                  "accuracy with the dense model over five seeds.";
  e.hypothesis_ids = {"H1"};
  e.metrics = {{"accuracy", std::string("top-1 test accuracy"), std::string("%"), {}}};
  e.statistics = {"mean over 5 seeds", "standard deviation"};
  e.strategy = "Dense training, one-shot magnitude pruning, 20 epochs of fine-tuning.";
  e.tests = {{TestKind::direct_comparison, "pruned mean accuracy within 1 point of dense mean accuracy", {}}};
  e.results = {
      {"accuracy", "dense", ScalarValue{91.3, 0.2}, "Table 2", false, {}},
      {"accuracy", "pruned 50%", ScalarValue{90.8, 0.3}, "Table 2", false, {}},
  };
  g.experiments = {e};
  g.interpretations = {
      {"I1", "The pruned network loses 0.5 points of accuracy, within the one-point margin.", {"H1"}, {"E1"},
       Verdict::supports, {}},
  };
  return g;
}

inline PromptBundle default_prompt_bundle() {
  PromptBundle b;
  b.version = "1";
  b.label = "reconstructed default (not the original study prompt)";
  b.instructions =
      "You analyse an empirical study and represent it as a graph of hypotheses, experiments and "
      "interpretations.\n"
      "- Hypotheses: the claims the study tests. When the study states research questions or findings instead "
      "of explicit hypotheses, formulate the hypothesis they imply and mark it with kind \"post_hoc\".\n"
      "- Experiments: what was run to test the hypotheses. Give a description, the ids of the hypotheses it "
      "tests, the metrics measured, the statistics applied, the strategy, the assessment tests "
      "(statistical, direct_comparison or visual) and every reported result value with its metric, context and "
      "location (table or paragraph).\n"
      "- Interpretations: how the authors read the outcomes, linked to at least one hypothesis and one "
      "experiment, with verdict supports, repudiates or inconclusive.\n"
      "Take values from tables and prose only; do not read values off figures. Use ids H1.., E1.., I1.. in "
      "order of appearance. Answer with a single JSON document in the format shown in the examples.\n";
  b.few_shot = true;
  b.few_shot_examples = {
      {"We prune 50% of the weights of a ResNet-20 by magnitude and fine-tune for 20 epochs. Table 2 reports "
       "test accuracy over five seeds: dense 91.3 +- 0.2, pruned 90.8 +- 0.3. The pruned network stays within "
       "one point of the dense baseline.",
       serialize_graph(default_example_graph())},
  };
  b.section_hints = {"Abstract", "Introduction (research questions, contributions)", "Method",
                     "Experimental setup", "Results", "Discussion", "Conclusion"};
  b.keyword_hints = {"we hypothesise", "research question", "we expect", "we evaluate", "we measure",
                     "significant", "baseline", "outperforms", "Table", "ablation"};
  return b;
}

}  // namespace repro
