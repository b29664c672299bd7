#pragma once

// Shared random-instance generators for the test suites.

#include <string>
#include <vector>

#include "rulecky/chart.hpp"
#include "rulecky/grammar.hpp"
#include "rulecky/rng.hpp"
#include "rulecky/tree.hpp"

namespace rulecky::testing {

/// Chart of uniform continuous scores in [-5, 5).
inline SpanScores random_chart(DetRng& rng, int32_t n, int32_t num_labels) {
  SpanScores scores(n, num_labels);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j <= n; ++j)
      for (int32_t l = 0; l < num_labels; ++l)
        scores(i, j, l) = rng.next_uniform(-5.0, 5.0);
  return scores;
}

/// Chart of small integer scores; sums of these are exact in doubles, which
/// keeps cross-algorithm score comparisons tolerance-free.
inline SpanScores random_integer_chart(DetRng& rng, int32_t n,
                                       int32_t num_labels, int32_t magnitude = 8) {
  SpanScores scores(n, num_labels);
  for (int32_t i = 0; i < n; ++i)
    for (int32_t j = i + 1; j <= n; ++j)
      for (int32_t l = 0; l < num_labels; ++l)
        scores(i, j, l) = static_cast<double>(
            rng.next_below(2 * magnitude + 1) - magnitude);
  return scores;
}

inline RuleSet random_ruleset(DetRng& rng, int32_t num_labels,
                              int32_t num_rules) {
  RuleSet rules;
  for (int32_t r = 0; r < num_rules; ++r)
    rules.add(static_cast<int32_t>(rng.next_below(num_labels)),
              static_cast<int32_t>(rng.next_below(num_labels)),
              static_cast<int32_t>(rng.next_below(num_labels)));
  return rules;
}

inline RuleSet complete_ruleset(int32_t num_labels) {
  RuleSet rules;
  for (int32_t p = 0; p < num_labels; ++p)
    for (int32_t l = 0; l < num_labels; ++l)
      for (int32_t r = 0; r < num_labels; ++r) rules.add(p, l, r);
  return rules;
}

/// Random n-ary tree over `leaves` words with fanouts up to `max_fanout`;
/// single-child nodes over leaves (one-word constituents) are allowed, deeper
/// unary chains are not, so the result is already unary-collapsed.
inline Tree random_nary_tree(DetRng& rng, int32_t leaves, int32_t max_fanout) {
  static const std::vector<std::string> kLabels = {"S", "NP", "VP", "PP", "X"};
  static const std::vector<std::string> kPos = {"DT", "NN", "VB", "JJ"};
  auto build = [&](auto&& self, int32_t begin, int32_t count,
                   bool allow_unary) -> Tree {
    if (count == 1) {
      Tree leaf(kPos[static_cast<std::size_t>(rng.next_below(kPos.size()))],
                "w" + std::to_string(begin));
      if (allow_unary && rng.next_below(4) == 0) {
        std::string label =
            kLabels[static_cast<std::size_t>(rng.next_below(kLabels.size()))];
        return Tree(label, std::vector<Tree>{std::move(leaf)});
      }
      return leaf;
    }
    int32_t fanout = static_cast<int32_t>(
        2 + rng.next_below(std::min(max_fanout, count) - 1));
    // Split `count` leaves into `fanout` nonempty parts.
    std::vector<int32_t> parts(fanout, 1);
    for (int32_t extra = count - fanout; extra > 0; --extra)
      ++parts[static_cast<std::size_t>(rng.next_below(fanout))];
    Tree node(
        kLabels[static_cast<std::size_t>(rng.next_below(kLabels.size()))],
        std::vector<Tree>{});
    int32_t offset = begin;
    for (int32_t part : parts) {
      node.children.push_back(self(self, offset, part, true));
      offset += part;
    }
    return node;
  };
  if (leaves == 1) {
    Tree leaf(kPos[0], "w0");
    return Tree(kLabels[0], std::vector<Tree>{std::move(leaf)});
  }
  return build(build, 0, leaves, false);
}

}  // namespace rulecky::testing
