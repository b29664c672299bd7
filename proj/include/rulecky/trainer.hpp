#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_set>
#include <vector>

#include "rulecky/chart.hpp"
#include "rulecky/grammar.hpp"
#include "rulecky/rule_chart.hpp"
#include "rulecky/scorer.hpp"
#include "rulecky/tree.hpp"

namespace rulecky {

struct TrainConfig {
  double lambda = 0.4;
  double learning_rate = 0.01;
  int32_t epochs = 20;
  int32_t batch_size = 16;
  uint64_t seed = 777;
};

void validate_train_config(const TrainConfig& config);
// Flat key=value text: lambda, lr, epochs, batch, seed. Keys absent from the
// file keep their values from `base`.
TrainConfig load_train_config(const std::string& path, TrainConfig base = {});

/// A gold binarized tree plus its labeled-span membership set.
struct GoldAnnotation {
  BinaryTree tree;
  std::vector<LabeledSpan> spans;
  int32_t n = 0;

  static GoldAnnotation from_tree(BinaryTree tree);
  bool contains(int32_t i, int32_t j, int32_t label) const;

 private:
  std::unordered_set<uint64_t> keys_;
};

/// Adds +1 to every cell outside the gold span set (the per-span Hamming
/// margin); the input chart is left untouched.
SpanScores hamming_augment(const SpanScores& scores,
                           const GoldAnnotation& gold);

/// Sum of chart scores over the tree's labeled spans.
double tree_score(const SpanScores& scores, const BinaryTree& tree);

enum class DecoderMode { Conventional, RuleBased };

struct HingeResult {
  double loss = 0.0;
  BinaryTree violating_tree;   // decoder winner on the augmented chart
  double augmented_best = 0.0; // its augmented score
};

/// max(0, best augmented rival - gold score). RuleBased mode requires rules
/// and a gold tree derivable under them.
HingeResult hinge_loss(const SpanScores& scores, const GoldAnnotation& gold,
                       DecoderMode mode, const RuleTensor* rules = nullptr);

/// (1 - lambda) * conventional + lambda * rule-based, one chart, two decodes.
double joint_loss(const SpanScores& scores, const GoldAnnotation& gold,
                  const RuleTensor& rules, double lambda);

struct TrainSentence {
  std::vector<std::string> words;
  GoldAnnotation gold;
};

struct EpochStats {
  int32_t epoch = 0;
  double mean_conventional_loss = 0.0;
  double mean_rule_loss = 0.0;
  double mean_joint_loss = 0.0;
};

using EpochCallback = std::function<void(const EpochStats&, const ScorerModel&)>;

/// Minibatch subgradient descent on the joint hinge objective. Sentences are
/// reshuffled every epoch from cfg.seed; runs with identical inputs produce
/// bit-identical models.
ScorerModel train(ScorerModel model, const std::vector<TrainSentence>& corpus,
                  const RuleTensor& rules, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace rulecky
