#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rulecky/error.hpp"

namespace rulecky {

// Label given to collapsed part-of-speech tags at binary-tree leaves.
inline constexpr const char* kPosLabel = "@";
// Prefix of labels assigned to nodes generated during binarization.
inline constexpr const char* kGeneratedPrefix = "$";
// Separator used when collapsing unary chains into a compound label.
inline constexpr const char* kChainSeparator = "::";

/// An n-ary constituency tree. Leaves are preterminals: a POS label plus the
/// surface word. A node has a word iff it has no children.
struct Tree {
  std::string label;
  std::vector<Tree> children;
  std::string word;

  Tree() = default;
  Tree(std::string label_, std::vector<Tree> children_)
      : label(std::move(label_)), children(std::move(children_)) {}
  Tree(std::string label_, std::string word_)
      : label(std::move(label_)), word(std::move(word_)) {}

  bool is_leaf() const { return children.empty(); }
  bool operator==(const Tree& other) const = default;
};

/// Strictly binary tree over half-open token spans. Either both children are
/// set (internal node) or neither (leaf spanning one token).
struct BinaryTree {
  int32_t label_id = -1;
  int32_t begin = 0;
  int32_t end = 0;
  std::unique_ptr<BinaryTree> left;
  std::unique_ptr<BinaryTree> right;

  BinaryTree() = default;
  BinaryTree(int32_t label, int32_t b, int32_t e)
      : label_id(label), begin(b), end(e) {}

  bool is_leaf() const { return left == nullptr; }
  int32_t length() const { return end - begin; }
  BinaryTree clone() const;
};

bool structurally_equal(const BinaryTree& a, const BinaryTree& b);

struct LabeledSpan {
  int32_t begin = 0;
  int32_t end = 0;
  int32_t label = -1;

  auto operator<=>(const LabeledSpan&) const = default;
};

/// Dense, stable string<->id map for constituent labels.
class LabelVocab {
 public:
  int32_t add(std::string_view label);
  std::optional<int32_t> find(std::string_view label) const;
  bool contains(std::string_view label) const { return find(label).has_value(); }
  const std::string& label(int32_t id) const;
  int32_t size() const { return static_cast<int32_t>(labels_.size()); }

  void save(const std::string& path) const;
  static LabelVocab load(const std::string& path);

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int32_t> index_;
};

enum class LabelingScheme {
  DollarOnly,           // every generated node is labeled "$"
  DollarPlusLeftChild,  // generated nodes are labeled "$" + left child label
};

// ---------------------------------------------------------------------------
// Bracketed text format

std::vector<Tree> parse_bracketed(std::string_view text);
std::string serialize_bracketed(const Tree& tree);

std::vector<Tree> read_tree_file(const std::string& path);
void write_tree_file(const std::string& path, const std::vector<Tree>& trees);

// ---------------------------------------------------------------------------
// Treebank normalization

/// Drops trace subtrees (preterminal label "-NONE-") and truncates
/// non-terminal labels at the first '-' or '=' (labels that start with '-',
/// e.g. "-LRB-", are kept whole). Returns nullopt if the whole tree is empty
/// after trace removal.
std::optional<Tree> strip_annotations(const Tree& tree);

/// Merges unary chains over identical spans into compound labels joined by
/// "::". A node whose single child is a preterminal leaf is left alone.
Tree collapse_unary_chains(const Tree& tree);

// ---------------------------------------------------------------------------
// Binarization

/// Left-branching binarization with POS tags collapsed to "@". For a node
/// with children c1..ck the generated nodes group from the left:
/// (((c1 c2) c3) ... ck); the topmost node keeps the original label. New
/// labels are interned into `vocab`. A constituent spanning a single word
/// becomes a leaf carrying the constituent label instead of "@".
BinaryTree binarize_left(const Tree& tree, LabelingScheme scheme,
                         LabelVocab& vocab);

/// Inverse of binarize_left: splices out "$"-labeled nodes, re-expands "::"
/// compound labels into unary chains and rebuilds preterminals from
/// `original_pos` and `words` (both of length n).
Tree debinarize(const BinaryTree& btree, const LabelVocab& vocab,
                const std::vector<std::string>& original_pos,
                const std::vector<std::string>& words);

/// All (begin, end, label) triples of the tree, one per node, in depth-first
/// order. A binary tree over n words yields exactly 2n-1 entries.
std::vector<LabeledSpan> labeled_spans(const BinaryTree& btree);

// ---------------------------------------------------------------------------
// Yield helpers

int32_t leaf_count(const Tree& tree);
std::vector<std::string> tree_words(const Tree& tree);
std::vector<std::string> tree_pos_tags(const Tree& tree);

}  // namespace rulecky
