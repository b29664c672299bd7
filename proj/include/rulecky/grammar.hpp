#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rulecky/tree.hpp"

namespace rulecky {

/// Binary productions parent -> left right with occurrence counts, keyed and
/// iterated in (parent, left, right) order.
class RuleSet {
 public:
  using Key = std::array<int32_t, 3>;
  using Map = std::map<Key, int64_t>;

  void add(int32_t parent, int32_t left, int32_t right, int64_t count = 1);
  bool contains(int32_t parent, int32_t left, int32_t right) const;
  int64_t count(int32_t parent, int32_t left, int32_t right) const;

  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  int64_t total_count() const;

  Map::const_iterator begin() const { return rules_.begin(); }
  Map::const_iterator end() const { return rules_.end(); }

 private:
  Map rules_;
};

/// Padded per-parent rule table of shape |L| x Rmax x 3. Row r of parent p
/// holds (p, left, right) for r < valid_counts[p]; padding slots hold pad_id
/// in all three positions and must score as unreachable.
struct RuleTensor {
  int32_t num_labels = 0;
  int32_t max_rules = 0;
  int32_t pad_id = 0;  // == num_labels; never a real label
  std::vector<int32_t> table;         // num_labels * max_rules * 3
  std::vector<int32_t> valid_counts;  // per parent label

  const int32_t* rule(int32_t parent, int32_t r) const {
    return table.data() + (static_cast<std::size_t>(parent) * max_rules + r) * 3;
  }
};

struct CoverageStats {
  double raw_recall = 0.0;
  double weighted_recall = 0.0;
  int64_t matched_types = 0;
  int64_t test_types = 0;
  int64_t unseen_types = 0;
};

/// One rule per internal node occurrence across the corpus.
RuleSet extract_rules(const std::vector<BinaryTree>& corpus);
void accumulate_rules(const BinaryTree& tree, RuleSet& rules);

RuleTensor build_rule_tensor(const RuleSet& rules, int32_t num_labels);
RuleTensor build_rule_tensor(const RuleSet& rules, const LabelVocab& vocab);

/// Reconstructs the rule keys reachable from non-padded tensor slots.
RuleSet rules_from_tensor(const RuleTensor& tensor);

CoverageStats rule_coverage(const RuleSet& train, const RuleSet& test);

// Rule file format: one rule per line, "parent<TAB>left<TAB>right<TAB>count".
void save_rules_tsv(const std::string& path, const RuleSet& rules,
                    const LabelVocab& vocab);
/// Strict load: every label must already be present in `vocab`.
RuleSet load_rules_tsv(const std::string& path, const LabelVocab& vocab);
/// Extending load: unknown labels are interned into `vocab`.
RuleSet load_rules_tsv_extend(const std::string& path, LabelVocab& vocab);

}  // namespace rulecky
