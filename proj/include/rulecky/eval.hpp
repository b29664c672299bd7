#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rulecky/grammar.hpp"
#include "rulecky/tree.hpp"

namespace rulecky {

/// Labeled bracketing scores, micro-averaged over sentences. lr/lp/f1 are
/// percentages in [0, 100].
struct EvalResult {
  int64_t matched = 0;
  int64_t gold_total = 0;
  int64_t pred_total = 0;
  double lr = 0.0;
  double lp = 0.0;
  double f1 = 0.0;

  std::string report_line() const;
};

/// Labeled precision/recall/F1 over internal (non-preterminal) constituents,
/// matched as multisets of (begin, end, label) per sentence. Preterminals are
/// ignored; the root constituent counts.
EvalResult evaluate(const std::vector<Tree>& gold,
                    const std::vector<Tree>& pred);

/// Rule recall of an evaluation corpus against a training rule set.
CoverageStats coverage_report(const RuleSet& train_rules,
                              const std::vector<BinaryTree>& eval_corpus);

}  // namespace rulecky
