#include "rulecky/eval.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace rulecky {

namespace {

// Constituents of one tree: (begin, end, label) with multiplicities,
// preterminal leaves excluded.
using ConstituentCounts = std::map<std::tuple<int32_t, int32_t, std::string>, int64_t>;

int32_t collect_constituents(const Tree& node, int32_t offset,
                             ConstituentCounts& counts) {
  if (node.is_leaf()) return offset + 1;
  int32_t end = offset;
  for (const Tree& child : node.children)
    end = collect_constituents(child, end, counts);
  ++counts[{offset, end, node.label}];
  return end;
}

}  // namespace

std::string EvalResult::report_line() const {
  std::ostringstream out;
  out << matched << '\t' << gold_total << '\t' << pred_total << '\t' << lr
      << '\t' << lp << '\t' << f1;
  return out.str();
}

EvalResult evaluate(const std::vector<Tree>& gold,
                    const std::vector<Tree>& pred) {
  if (gold.size() != pred.size())
    throw Error(ErrorCode::LengthMismatch,
                "gold has " + std::to_string(gold.size()) + " trees, pred " +
                    std::to_string(pred.size()));
  EvalResult result;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (leaf_count(gold[k]) != leaf_count(pred[k]))
      throw Error(ErrorCode::YieldMismatch,
                  "sentence " + std::to_string(k) + ": gold has " +
                      std::to_string(leaf_count(gold[k])) + " words, pred " +
                      std::to_string(leaf_count(pred[k])),
                  k);
    ConstituentCounts gold_counts, pred_counts;
    collect_constituents(gold[k], 0, gold_counts);
    collect_constituents(pred[k], 0, pred_counts);
    for (const auto& [key, count] : gold_counts) result.gold_total += count;
    for (const auto& [key, count] : pred_counts) {
      result.pred_total += count;
      auto it = gold_counts.find(key);
      if (it != gold_counts.end())
        result.matched += std::min(count, it->second);
    }
  }
  result.lr = result.gold_total > 0
                  ? 100.0 * result.matched / result.gold_total
                  : 0.0;
  result.lp = result.pred_total > 0
                  ? 100.0 * result.matched / result.pred_total
                  : 0.0;
  result.f1 = (result.lr + result.lp) > 0.0
                  ? 2.0 * result.lp * result.lr / (result.lp + result.lr)
                  : 0.0;
  return result;
}

CoverageStats coverage_report(const RuleSet& train_rules,
                              const std::vector<BinaryTree>& eval_corpus) {
  RuleSet eval_rules = extract_rules(eval_corpus);
  return rule_coverage(train_rules, eval_rules);
}

}  // namespace rulecky
