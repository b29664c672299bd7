#include "rulecky/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "rulecky/rng.hpp"

namespace rulecky {

void validate_train_config(const TrainConfig& config) {
  if (config.lambda < 0.0 || config.lambda > 1.0)
    throw Error(ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
  if (config.learning_rate <= 0.0)
    throw Error(ErrorCode::InvalidArgument, "learning rate must be positive");
  if (config.epochs < 1 || config.batch_size < 1)
    throw Error(ErrorCode::InvalidArgument,
                "epochs and batch size must be at least 1");
}

TrainConfig load_train_config(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  TrainConfig config = base;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::IoError,
                  "expected key=value on line " + std::to_string(line_no),
                  line_no);
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    if (key == "lambda") config.lambda = std::stod(value);
    else if (key == "lr") config.learning_rate = std::stod(value);
    else if (key == "epochs") config.epochs = std::stoi(value);
    else if (key == "batch") config.batch_size = std::stoi(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else
      throw Error(ErrorCode::IoError, "unknown config key '" + key + "'",
                  line_no);
  }
  validate_train_config(config);
  return config;
}

namespace {

uint64_t span_key(int32_t i, int32_t j, int32_t label) {
  return (static_cast<uint64_t>(i) << 42) | (static_cast<uint64_t>(j) << 21) |
         static_cast<uint64_t>(label);
}

}  // namespace

GoldAnnotation GoldAnnotation::from_tree(BinaryTree tree) {
  GoldAnnotation gold;
  gold.n = tree.length();
  gold.spans = labeled_spans(tree);
  gold.tree = std::move(tree);
  for (const LabeledSpan& span : gold.spans)
    gold.keys_.insert(span_key(span.begin, span.end, span.label));
  return gold;
}

bool GoldAnnotation::contains(int32_t i, int32_t j, int32_t label) const {
  return keys_.count(span_key(i, j, label)) > 0;
}

SpanScores hamming_augment(const SpanScores& scores,
                           const GoldAnnotation& gold) {
  if (gold.n != scores.n())
    throw Error(ErrorCode::DimensionMismatch,
                "gold tree spans " + std::to_string(gold.n) +
                    " words, chart has " + std::to_string(scores.n()));
  for (const LabeledSpan& span : gold.spans)
    if (span.label < 0 || span.label >= scores.num_labels())
      throw Error(ErrorCode::DimensionMismatch,
                  "gold label " + std::to_string(span.label) +
                      " outside the chart label set");
  SpanScores augmented = scores;
  for (int32_t i = 0; i < scores.n(); ++i)
    for (int32_t j = i + 1; j <= scores.n(); ++j)
      for (int32_t l = 0; l < scores.num_labels(); ++l)
        if (!gold.contains(i, j, l)) augmented(i, j, l) += 1.0;
  return augmented;
}

double tree_score(const SpanScores& scores, const BinaryTree& tree) {
  double total = 0.0;
  for (const LabeledSpan& span : labeled_spans(tree)) {
    if (span.label < 0 || span.label >= scores.num_labels())
      throw Error(ErrorCode::LabelOutOfVocab, std::to_string(span.label));
    total += scores.at(span.begin, span.end, span.label);
  }
  return total;
}

HingeResult hinge_loss(const SpanScores& scores, const GoldAnnotation& gold,
                       DecoderMode mode, const RuleTensor* rules) {
  if (mode == DecoderMode::RuleBased && rules == nullptr)
    throw Error(ErrorCode::InvalidArgument,
                "rule-based hinge loss needs a rule table");
  SpanScores augmented = hamming_augment(scores, gold);
  HingeResult result;
  if (mode == DecoderMode::Conventional) {
    ChartResult chart = cky_fast(augmented);
    result.violating_tree = decode_tree(augmented, chart);
    result.augmented_best = chart.root_score();
  } else {
    RuleChartResult chart = rule_cky_fast(augmented, *rules);
    result.violating_tree = rule_decode_tree(augmented, chart, *rules);
    result.augmented_best = chart.best_root_score();
  }
  double gold_score = tree_score(scores, gold.tree);
  result.loss = std::max(0.0, result.augmented_best - gold_score);
  return result;
}

double joint_loss(const SpanScores& scores, const GoldAnnotation& gold,
                  const RuleTensor& rules, double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw Error(ErrorCode::InvalidArgument, "lambda must be in [0, 1]");
  HingeResult conventional =
      hinge_loss(scores, gold, DecoderMode::Conventional);
  HingeResult rule_based =
      hinge_loss(scores, gold, DecoderMode::RuleBased, &rules);
  return (1.0 - lambda) * conventional.loss + lambda * rule_based.loss;
}

namespace {

// Cell -> per-label subgradient coefficients, ordered for deterministic
// accumulation. Winner spans get +weight, gold spans -weight.
using CellGradients = std::map<std::pair<int32_t, int32_t>,
                               std::map<int32_t, double>>;

void add_tree_spans(CellGradients& cells, const BinaryTree& tree,
                    double weight) {
  for (const LabeledSpan& span : labeled_spans(tree))
    cells[{span.begin, span.end}][span.label] += weight;
}

}  // namespace

ScorerModel train(ScorerModel model, const std::vector<TrainSentence>& corpus,
                  const RuleTensor& rules, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  validate_train_config(cfg);
  if (corpus.empty())
    throw Error(ErrorCode::InvalidArgument, "training corpus is empty");

  // The encoder is fixed, so sentences are encoded once.
  std::vector<EncodedSentence> encodings;
  encodings.reserve(corpus.size());
  for (const TrainSentence& sentence : corpus)
    encodings.push_back(encode(model, sentence.words));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  DetRng shuffler(cfg.seed);

  for (int32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffler.shuffle(order);
    double sum_conventional = 0.0;
    double sum_rule = 0.0;
    double sum_joint = 0.0;

    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      std::size_t stop = std::min(order.size(),
                                  start + static_cast<std::size_t>(cfg.batch_size));
      ScorerGradients grads(model);
      for (std::size_t b = start; b < stop; ++b) {
        const TrainSentence& sentence = corpus[order[b]];
        const EncodedSentence& enc = encodings[order[b]];
        SpanScores scores = score_spans(model, enc);

        HingeResult conventional =
            hinge_loss(scores, sentence.gold, DecoderMode::Conventional);
        HingeResult rule_based =
            hinge_loss(scores, sentence.gold, DecoderMode::RuleBased, &rules);
        sum_conventional += conventional.loss;
        sum_rule += rule_based.loss;
        sum_joint += (1.0 - cfg.lambda) * conventional.loss +
                     cfg.lambda * rule_based.loss;

        CellGradients cells;
        if (conventional.loss > 0.0) {
          add_tree_spans(cells, conventional.violating_tree, 1.0 - cfg.lambda);
          add_tree_spans(cells, sentence.gold.tree, -(1.0 - cfg.lambda));
        }
        if (rule_based.loss > 0.0) {
          add_tree_spans(cells, rule_based.violating_tree, cfg.lambda);
          add_tree_spans(cells, sentence.gold.tree, -cfg.lambda);
        }
        for (const auto& [span, labels] : cells) {
          std::vector<std::pair<int32_t, double>> coeffs;
          for (const auto& [label, coef] : labels)
            if (coef != 0.0) coeffs.emplace_back(label, coef);
          if (!coeffs.empty())
            accumulate_span_gradient(model, enc, span.first, span.second,
                                     coeffs, grads);
        }
      }
      grads.scale(1.0 / static_cast<double>(stop - start));
      apply_gradients(model, grads, cfg.learning_rate);
    }

    if (on_epoch) {
      EpochStats stats;
      stats.epoch = epoch;
      stats.mean_conventional_loss = sum_conventional / corpus.size();
      stats.mean_rule_loss = sum_rule / corpus.size();
      stats.mean_joint_loss = sum_joint / corpus.size();
      on_epoch(stats, model);
    }
  }
  return model;
}

}  // namespace rulecky
