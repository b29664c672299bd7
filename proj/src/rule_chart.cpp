#include "rulecky/rule_chart.hpp"

#include <cmath>
#include <stack>

#include "bulk.hpp"

namespace rulecky {

namespace {

void validate_rule_scores(const SpanScores& scores) {
  for (int32_t i = 0; i < scores.n(); ++i)
    for (int32_t j = i + 1; j <= scores.n(); ++j)
      for (int32_t l = 0; l < scores.num_labels(); ++l) {
        double v = scores(i, j, l);
        if (!std::isfinite(v) || std::abs(v) >= kMaxScoreMagnitude)
          throw Error(ErrorCode::NonFiniteScore,
                      "span (" + std::to_string(i) + "," + std::to_string(j) +
                          ") label " + std::to_string(l));
      }
}

// Working chart with one extra label column. The pad column stays at the
// sentinel, so gathering a padded rule slot yields an unreachable candidate.
struct PaddedChart {
  int32_t n;
  int32_t width;  // num_labels + 1
  std::vector<double> t;

  PaddedChart(const SpanScores& scores)
      : n(scores.n()),
        width(scores.num_labels() + 1),
        t(static_cast<std::size_t>(n + 1) * (n + 1) * width,
          kNegativeSentinel) {
    for (int32_t i = 0; i < n; ++i)
      for (int32_t l = 0; l < scores.num_labels(); ++l)
        at(i, i + 1, l) = scores(i, i + 1, l);
  }

  std::size_t index(int32_t i, int32_t j, int32_t label) const {
    return (static_cast<std::size_t>(i) * (n + 1) + j) * width + label;
  }
  double& at(int32_t i, int32_t j, int32_t label) {
    return t[index(i, j, label)];
  }
  double at(int32_t i, int32_t j, int32_t label) const {
    return t[index(i, j, label)];
  }
};

}  // namespace

int32_t RuleChartResult::best_root_label() const {
  int32_t best = 0;
  for (int32_t l = 1; l < num_labels; ++l)
    if (t[index(0, n, l)] > t[index(0, n, best)]) best = l;
  return t[index(0, n, best)] > kDerivableThreshold ? best : -1;
}

double RuleChartResult::best_root_score() const {
  double best = t[index(0, n, 0)];
  for (int32_t l = 1; l < num_labels; ++l)
    best = std::max(best, t[index(0, n, l)]);
  return best;
}

RuleChartResult rule_cky_sequential(const SpanScores& scores,
                                    const RuleSet& rules) {
  if (rules.empty()) throw Error(ErrorCode::EmptyRuleSet, "no rules");
  validate_rule_scores(scores);
  int32_t n = scores.n();
  int32_t L = scores.num_labels();
  RuleTensor tensor = build_rule_tensor(rules, L);
  int32_t rmax = tensor.max_rules;

  PaddedChart padded(scores);
  RuleChartResult result(n, L);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t l = 0; l < L; ++l)
      result.t[result.index(i, i + 1, l)] = scores(i, i + 1, l);

  for (int32_t ss = 2; ss <= n; ++ss) {
    for (int32_t i = 0; i + ss <= n; ++i) {
      int32_t j = i + ss;
      for (int32_t l = 0; l < L; ++l) {
        double sij = scores(i, j, l);
        // Padded slots are scanned too so the argmax replays the bulk
        // reduction exactly, slot order included.
        double best_val = 0.0;
        int32_t best_split = -1;
        int32_t best_rule = -1;
        for (int32_t s = 0; s < ss - 1; ++s) {
          int32_t k = i + 1 + s;
          double split_val = 0.0;
          int32_t split_rule = 0;
          for (int32_t r = 0; r < rmax; ++r) {
            const int32_t* rule = tensor.rule(l, r);
            double cand =
                (sij + padded.at(i, k, rule[1])) + padded.at(k, j, rule[2]);
            if (r == 0 || cand > split_val) {
              split_val = cand;
              split_rule = r;
            }
          }
          if (s == 0 || split_val > best_val) {
            best_val = split_val;
            best_split = k;
            best_rule = split_rule;
          }
        }
        padded.at(i, j, l) = best_val;
        std::size_t idx = result.index(i, j, l);
        result.t[idx] = best_val;
        result.split[idx] = best_split;
        result.rule[idx] = best_rule;
      }
    }
  }
  return result;
}

RuleChartResult rule_cky_fast(const SpanScores& scores,
                              const RuleTensor& tensor) {
  if (tensor.max_rules == 0 || tensor.table.empty())
    throw Error(ErrorCode::EmptyRuleSet, "no rules");
  if (tensor.num_labels != scores.num_labels())
    throw Error(ErrorCode::DimensionMismatch,
                "rule table built for a different label set");
  validate_rule_scores(scores);
  int32_t n = scores.n();
  int32_t L = scores.num_labels();
  int32_t rmax = tensor.max_rules;
  int32_t width = L + 1;

  PaddedChart padded(scores);
  RuleChartResult result(n, L);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t l = 0; l < L; ++l)
      result.t[result.index(i, i + 1, l)] = scores(i, i + 1, l);

  // Child-label offsets per (label, rule slot), reused across span sizes.
  std::vector<int32_t> left_label(static_cast<std::size_t>(L) * rmax);
  std::vector<int32_t> right_label(left_label.size());
  for (int32_t l = 0; l < L; ++l)
    for (int32_t r = 0; r < rmax; ++r) {
      const int32_t* rule = tensor.rule(l, r);
      left_label[static_cast<std::size_t>(l) * rmax + r] = rule[1];
      right_label[static_cast<std::size_t>(l) * rmax + r] = rule[2];
    }

  std::vector<int32_t> left_idx, right_idx;
  std::vector<double> cand, child_vals, split_vals;
  std::vector<int32_t> split_rule, best_split;
  std::vector<double> best_vals;
  for (int32_t ss = 2; ss <= n; ++ss) {
    std::size_t num = static_cast<std::size_t>(n - ss + 1);
    std::size_t splits = static_cast<std::size_t>(ss - 1);
    std::size_t lanes = num * L * splits * rmax;  // [span][label][split][slot]
    left_idx.resize(lanes);
    right_idx.resize(lanes);
    cand.resize(lanes);
    child_vals.resize(lanes);
    for (std::size_t p = 0; p < num; ++p) {
      int32_t i = static_cast<int32_t>(p);
      int32_t j = i + ss;
      for (int32_t l = 0; l < L; ++l) {
        double sij = scores(i, j, l);
        for (std::size_t s = 0; s < splits; ++s) {
          int32_t k = i + 1 + static_cast<int32_t>(s);
          std::size_t base = ((p * L + l) * splits + s) * rmax;
          std::size_t lcell = (static_cast<std::size_t>(i) * (n + 1) + k) * width;
          std::size_t rcell = (static_cast<std::size_t>(k) * (n + 1) + j) * width;
          for (int32_t r = 0; r < rmax; ++r) {
            left_idx[base + r] =
                static_cast<int32_t>(lcell) +
                left_label[static_cast<std::size_t>(l) * rmax + r];
            right_idx[base + r] =
                static_cast<int32_t>(rcell) +
                right_label[static_cast<std::size_t>(l) * rmax + r];
            cand[base + r] = sij;  // broadcast span score
          }
        }
      }
    }
    // cand = (s + t_left) + t_right, then reduce over rule slots, then splits.
    bulk::gather(padded.t.data(), left_idx.data(), child_vals.data(), lanes);
    bulk::add_into(cand.data(), child_vals.data(), lanes);
    bulk::gather(padded.t.data(), right_idx.data(), child_vals.data(), lanes);
    bulk::add_into(cand.data(), child_vals.data(), lanes);
    split_vals.resize(num * L * splits);
    split_rule.resize(num * L * splits);
    bulk::row_max(cand.data(), num * L * splits, rmax, split_vals.data(),
                  split_rule.data());
    best_vals.resize(num * L);
    best_split.resize(num * L);
    bulk::row_max(split_vals.data(), num * L, splits, best_vals.data(),
                  best_split.data());
    for (std::size_t p = 0; p < num; ++p) {
      int32_t i = static_cast<int32_t>(p);
      int32_t j = i + ss;
      for (int32_t l = 0; l < L; ++l) {
        std::size_t row = p * L + l;
        padded.at(i, j, l) = best_vals[row];
        std::size_t idx = result.index(i, j, l);
        result.t[idx] = best_vals[row];
        result.split[idx] = i + 1 + best_split[row];
        result.rule[idx] = split_rule[row * splits + best_split[row]];
      }
    }
    bulk::count_step();
  }
  return result;
}

BinaryTree rule_decode_tree(const SpanScores& scores,
                            const RuleChartResult& chart,
                            const RuleTensor& rules) {
  if (chart.n != scores.n() || chart.num_labels != scores.num_labels())
    throw Error(ErrorCode::DimensionMismatch, "chart and scores disagree");
  int32_t n = chart.n;
  int32_t root_label = chart.best_root_label();
  if (root_label < 0)
    throw Error(ErrorCode::NoDerivation,
                "no rule-conforming tree spans the sentence");
  BinaryTree root(root_label, 0, n);
  std::stack<BinaryTree*> work;
  work.push(&root);
  while (!work.empty()) {
    BinaryTree* node = work.top();
    work.pop();
    if (node->length() == 1) continue;
    std::size_t idx = chart.index(node->begin, node->end, node->label_id);
    int32_t k = chart.split[idx];
    int32_t r = chart.rule[idx];
    if (k <= node->begin || k >= node->end || r < 0 ||
        r >= rules.valid_counts[node->label_id])
      throw Error(ErrorCode::InconsistentChart,
                  "no applicable rule recorded for span (" +
                      std::to_string(node->begin) + "," +
                      std::to_string(node->end) + ")");
    const int32_t* rule = rules.rule(node->label_id, r);
    node->left = std::make_unique<BinaryTree>(rule[1], node->begin, k);
    node->right = std::make_unique<BinaryTree>(rule[2], k, node->end);
    work.push(node->left.get());
    work.push(node->right.get());
  }
  return root;
}

}  // namespace rulecky
