#include "rulecky/grammar.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stack>

namespace rulecky {

void RuleSet::add(int32_t parent, int32_t left, int32_t right, int64_t count) {
  if (count <= 0)
    throw Error(ErrorCode::InvalidArgument, "rule count must be positive");
  rules_[{parent, left, right}] += count;
}

bool RuleSet::contains(int32_t parent, int32_t left, int32_t right) const {
  return rules_.count({parent, left, right}) > 0;
}

int64_t RuleSet::count(int32_t parent, int32_t left, int32_t right) const {
  auto it = rules_.find({parent, left, right});
  return it == rules_.end() ? 0 : it->second;
}

int64_t RuleSet::total_count() const {
  int64_t total = 0;
  for (const auto& [key, count] : rules_) total += count;
  return total;
}

void accumulate_rules(const BinaryTree& tree, RuleSet& rules) {
  std::stack<const BinaryTree*> work;
  work.push(&tree);
  while (!work.empty()) {
    const BinaryTree* node = work.top();
    work.pop();
    if (node->is_leaf()) continue;
    rules.add(node->label_id, node->left->label_id, node->right->label_id);
    work.push(node->left.get());
    work.push(node->right.get());
  }
}

RuleSet extract_rules(const std::vector<BinaryTree>& corpus) {
  RuleSet rules;
  for (const BinaryTree& tree : corpus) accumulate_rules(tree, rules);
  return rules;
}

RuleTensor build_rule_tensor(const RuleSet& rules, int32_t num_labels) {
  if (rules.empty())
    throw Error(ErrorCode::EmptyRuleSet, "cannot build a rule table");
  RuleTensor tensor;
  tensor.num_labels = num_labels;
  tensor.pad_id = num_labels;
  tensor.valid_counts.assign(num_labels, 0);
  for (const auto& [key, count] : rules) {
    for (int32_t id : key)
      if (id < 0 || id >= num_labels)
        throw Error(ErrorCode::LabelOutOfVocab,
                    "rule label id " + std::to_string(id));
    ++tensor.valid_counts[key[0]];
  }
  tensor.max_rules =
      *std::max_element(tensor.valid_counts.begin(), tensor.valid_counts.end());
  tensor.table.assign(
      static_cast<std::size_t>(num_labels) * tensor.max_rules * 3,
      tensor.pad_id);
  // RuleSet iterates in (parent, left, right) order, which fixes the slot
  // order used for argmax tie-breaking.
  std::vector<int32_t> next_slot(num_labels, 0);
  for (const auto& [key, count] : rules) {
    int32_t parent = key[0];
    std::size_t base =
        (static_cast<std::size_t>(parent) * tensor.max_rules +
         next_slot[parent]++) * 3;
    tensor.table[base] = key[0];
    tensor.table[base + 1] = key[1];
    tensor.table[base + 2] = key[2];
  }
  return tensor;
}

RuleTensor build_rule_tensor(const RuleSet& rules, const LabelVocab& vocab) {
  return build_rule_tensor(rules, vocab.size());
}

RuleSet rules_from_tensor(const RuleTensor& tensor) {
  RuleSet rules;
  for (int32_t parent = 0; parent < tensor.num_labels; ++parent) {
    for (int32_t r = 0; r < tensor.valid_counts[parent]; ++r) {
      const int32_t* row = tensor.rule(parent, r);
      rules.add(row[0], row[1], row[2]);
    }
  }
  return rules;
}

CoverageStats rule_coverage(const RuleSet& train, const RuleSet& test) {
  if (test.empty())
    throw Error(ErrorCode::EmptyTestSet, "no rules in the test set");
  CoverageStats stats;
  int64_t matched_occurrences = 0;
  int64_t total_occurrences = 0;
  for (const auto& [key, count] : test) {
    ++stats.test_types;
    total_occurrences += count;
    if (train.contains(key[0], key[1], key[2])) {
      ++stats.matched_types;
      matched_occurrences += count;
    }
  }
  stats.unseen_types = stats.test_types - stats.matched_types;
  stats.raw_recall =
      static_cast<double>(stats.matched_types) / stats.test_types;
  stats.weighted_recall =
      static_cast<double>(matched_occurrences) / total_occurrences;
  return stats;
}

void save_rules_tsv(const std::string& path, const RuleSet& rules,
                    const LabelVocab& vocab) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& [key, count] : rules) {
    out << vocab.label(key[0]) << '\t' << vocab.label(key[1]) << '\t'
        << vocab.label(key[2]) << '\t' << count << '\n';
  }
}

namespace {

template <typename LabelFn>
RuleSet load_rules_impl(const std::string& path, LabelFn&& label_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  RuleSet rules;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string parent, left, right, count_text;
    if (!std::getline(fields, parent, '\t') ||
        !std::getline(fields, left, '\t') ||
        !std::getline(fields, right, '\t') ||
        !std::getline(fields, count_text, '\t'))
      throw Error(ErrorCode::IoError,
                  "malformed rule line " + std::to_string(line_no) + " in " +
                      path, line_no);
    rules.add(label_id(parent), label_id(left), label_id(right),
              std::stoll(count_text));
  }
  return rules;
}

}  // namespace

RuleSet load_rules_tsv(const std::string& path, const LabelVocab& vocab) {
  return load_rules_impl(path, [&](const std::string& label) {
    auto id = vocab.find(label);
    if (!id)
      throw Error(ErrorCode::LabelOutOfVocab,
                  "label '" + label + "' not in vocab");
    return *id;
  });
}

RuleSet load_rules_tsv_extend(const std::string& path, LabelVocab& vocab) {
  return load_rules_impl(
      path, [&](const std::string& label) { return vocab.add(label); });
}

}  // namespace rulecky
