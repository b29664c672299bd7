#pragma once

#include <cstdint>
#include <vector>

#include "rulecky/chart.hpp"
#include "rulecky/grammar.hpp"
#include "rulecky/tree.hpp"

namespace rulecky {

// Scores below kDerivableThreshold mark span/label pairs with no derivation
// under the rule set. Real span scores must stay under kMaxScoreMagnitude so
// sums of sentinels and scores never cross the threshold.
inline constexpr double kNegativeSentinel = -1e18;
inline constexpr double kDerivableThreshold = -1e15;
inline constexpr double kMaxScoreMagnitude = 1e12;

/// Per-label chart: sub-tree score t, split point and applied-rule slot for
/// every (span, label). Layout is cell-major with num_labels entries per
/// cell, cell = i*(n+1)+j.
struct RuleChartResult {
  int32_t n = 0;
  int32_t num_labels = 0;
  std::vector<double> t;
  std::vector<int32_t> split;
  std::vector<int32_t> rule;

  RuleChartResult(int32_t n_, int32_t num_labels_)
      : n(n_),
        num_labels(num_labels_),
        t(static_cast<std::size_t>(n_ + 1) * (n_ + 1) * num_labels_,
          kNegativeSentinel),
        split(t.size(), -1),
        rule(t.size(), -1) {}

  std::size_t index(int32_t i, int32_t j, int32_t label) const {
    return (static_cast<std::size_t>(i) * (n + 1) + j) * num_labels + label;
  }
  double score(int32_t i, int32_t j, int32_t label) const {
    return t[index(i, j, label)];
  }
  bool derivable(int32_t i, int32_t j, int32_t label) const {
    return t[index(i, j, label)] > kDerivableThreshold;
  }

  /// Best root label (smallest id on ties), or -1 when nothing is derivable.
  int32_t best_root_label() const;
  double best_root_score() const;

  bool operator==(const RuleChartResult&) const = default;
};

/// Reference rule-constrained chart filler. For each (span, label) the
/// argmax runs over splits (ascending) and the label's rule slots in
/// RuleTensor order; ties keep the smallest split, then the smallest slot.
RuleChartResult rule_cky_sequential(const SpanScores& scores,
                                    const RuleSet& rules);

/// Bit-identical to rule_cky_sequential; one bulk pass per span size with a
/// max-reduce over rule slots followed by a max-reduce over splits.
RuleChartResult rule_cky_fast(const SpanScores& scores,
                              const RuleTensor& rules);

/// Reads out the best rule-conforming tree: the root takes argmax_l t[0,n,l]
/// and children labels come from the rule applied at each split. Throws
/// NoDerivation when no root label is derivable.
BinaryTree rule_decode_tree(const SpanScores& scores,
                            const RuleChartResult& chart,
                            const RuleTensor& rules);

}  // namespace rulecky
