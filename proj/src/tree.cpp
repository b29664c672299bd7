#include "rulecky/tree.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stack>

namespace rulecky {

// ---------------------------------------------------------------------------
// BinaryTree

BinaryTree BinaryTree::clone() const {
  BinaryTree copy(label_id, begin, end);
  // Pairs of (source, destination); children are attached iteratively so the
  // depth of left-branching trees never hits the call stack.
  std::stack<std::pair<const BinaryTree*, BinaryTree*>> work;
  work.push({this, &copy});
  while (!work.empty()) {
    auto [src, dst] = work.top();
    work.pop();
    if (src->is_leaf()) continue;
    dst->left = std::make_unique<BinaryTree>(src->left->label_id,
                                             src->left->begin, src->left->end);
    dst->right = std::make_unique<BinaryTree>(
        src->right->label_id, src->right->begin, src->right->end);
    work.push({src->left.get(), dst->left.get()});
    work.push({src->right.get(), dst->right.get()});
  }
  return copy;
}

bool structurally_equal(const BinaryTree& a, const BinaryTree& b) {
  std::stack<std::pair<const BinaryTree*, const BinaryTree*>> work;
  work.push({&a, &b});
  while (!work.empty()) {
    auto [x, y] = work.top();
    work.pop();
    if (x->label_id != y->label_id || x->begin != y->begin || x->end != y->end)
      return false;
    if (x->is_leaf() != y->is_leaf()) return false;
    if (!x->is_leaf()) {
      work.push({x->left.get(), y->left.get()});
      work.push({x->right.get(), y->right.get()});
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// LabelVocab

int32_t LabelVocab::add(std::string_view label) {
  auto it = index_.find(std::string(label));
  if (it != index_.end()) return it->second;
  int32_t id = static_cast<int32_t>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(labels_.back(), id);
  return id;
}

std::optional<int32_t> LabelVocab::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& LabelVocab::label(int32_t id) const {
  if (id < 0 || id >= size())
    throw Error(ErrorCode::IndexOutOfRange,
                "label id " + std::to_string(id) + " out of range");
  return labels_[id];
}

void LabelVocab::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const auto& label : labels_) out << label << '\n';
}

LabelVocab LabelVocab::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  LabelVocab vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    vocab.add(line);
  }
  return vocab;
}

// ---------------------------------------------------------------------------
// Bracketed format

namespace {

struct Token {
  char kind;  // '(', ')' or 's' for a symbol
  std::string text;
  std::size_t position;  // byte offset in the input
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '(' || c == ')') {
      tokens.push_back({c, std::string(1, c), i});
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else {
      std::size_t start = i;
      while (i < text.size() && text[i] != '(' && text[i] != ')' &&
             !std::isspace(static_cast<unsigned char>(text[i])))
        ++i;
      tokens.push_back({'s', std::string(text.substr(start, i - start)), start});
    }
  }
  return tokens;
}

class BracketParser {
 public:
  explicit BracketParser(std::string_view text)
      : tokens_(tokenize(text)), text_size_(text.size()) {}

  std::vector<Tree> parse_all() {
    std::vector<Tree> trees;
    while (pos_ < tokens_.size()) {
      if (tokens_[pos_].kind != '(')
        throw Error(ErrorCode::MalformedNode,
                    "expected '(' at top level", tokens_[pos_].position);
      Tree t = parse_node();
      // An unlabeled single-child wrapper around a whole tree is stripped.
      if (t.label.empty()) {
        if (t.children.size() == 1) {
          Tree unwrapped = std::move(t.children.front());
          t = std::move(unwrapped);
        } else {
          throw Error(ErrorCode::EmptyNode, "node without a label",
                      tokens_[pos_ > 0 ? pos_ - 1 : 0].position);
        }
      }
      trees.push_back(std::move(t));
    }
    return trees;
  }

 private:
  Tree parse_node() {
    std::size_t open_pos = tokens_[pos_].position;
    ++pos_;  // consume '('
    Tree node;
    if (pos_ < tokens_.size() && tokens_[pos_].kind == 's') {
      node.label = tokens_[pos_].text;
      ++pos_;
    }
    bool saw_word = false;
    while (true) {
      if (pos_ >= tokens_.size())
        throw Error(ErrorCode::UnbalancedParens, "missing ')'", open_pos);
      const Token& tok = tokens_[pos_];
      if (tok.kind == ')') {
        ++pos_;
        break;
      }
      if (tok.kind == 's') {
        if (saw_word || !node.children.empty())
          throw Error(ErrorCode::MalformedNode,
                      "word token mixed with children", tok.position);
        node.word = tok.text;
        saw_word = true;
        ++pos_;
      } else {  // '('
        if (saw_word)
          throw Error(ErrorCode::MalformedNode,
                      "child after a word token", tok.position);
        Tree child = parse_node();
        if (child.label.empty())
          throw Error(ErrorCode::EmptyNode, "node without a label",
                      tok.position);
        node.children.push_back(std::move(child));
      }
    }
    if (node.label.empty() && node.children.empty())
      throw Error(ErrorCode::EmptyNode, "empty node", open_pos);
    if (!node.label.empty() && node.children.empty() && !saw_word)
      throw Error(ErrorCode::LeafWithoutWord,
                  "leaf '" + node.label + "' has no word", open_pos);
    return node;
  }

  std::vector<Token> tokens_;
  std::size_t text_size_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<Tree> parse_bracketed(std::string_view text) {
  // A ')' with no matching '(' is caught here; a missing ')' inside a node is
  // caught by the parser.
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '(') ++depth;
    if (text[i] == ')') {
      --depth;
      if (depth < 0)
        throw Error(ErrorCode::UnbalancedParens, "unexpected ')'", i);
    }
  }
  if (depth != 0)
    throw Error(ErrorCode::UnbalancedParens,
                "unclosed '(' in input", text.size());
  return BracketParser(text).parse_all();
}

namespace {

void serialize_into(const Tree& tree, std::string& out) {
  out += '(';
  out += tree.label;
  if (tree.is_leaf()) {
    out += ' ';
    out += tree.word;
  } else {
    for (const Tree& child : tree.children) {
      out += ' ';
      serialize_into(child, out);
    }
  }
  out += ')';
}

}  // namespace

std::string serialize_bracketed(const Tree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

std::vector<Tree> read_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_bracketed(buffer.str());
}

void write_tree_file(const std::string& path, const std::vector<Tree>& trees) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  for (const Tree& tree : trees) out << serialize_bracketed(tree) << '\n';
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

std::string strip_label(const std::string& label, bool is_leaf) {
  if (is_leaf || label.empty() || label.front() == '-') return label;
  auto cut = label.find_first_of("-=");
  return cut == std::string::npos ? label : label.substr(0, cut);
}

std::optional<Tree> strip_node(const Tree& node) {
  if (node.is_leaf()) {
    if (node.label == "-NONE-") return std::nullopt;
    return Tree(node.label, node.word);
  }
  Tree out;
  out.label = strip_label(node.label, false);
  for (const Tree& child : node.children) {
    if (auto kept = strip_node(child)) out.children.push_back(std::move(*kept));
  }
  if (out.children.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::optional<Tree> strip_annotations(const Tree& tree) {
  return strip_node(tree);
}

Tree collapse_unary_chains(const Tree& tree) {
  if (tree.is_leaf()) return tree;
  Tree out;
  out.label = tree.label;
  const Tree* node = &tree;
  while (node->children.size() == 1 && !node->children.front().is_leaf()) {
    node = &node->children.front();
    out.label += kChainSeparator;
    out.label += node->label;
  }
  for (const Tree& child : node->children)
    out.children.push_back(collapse_unary_chains(child));
  return out;
}

// ---------------------------------------------------------------------------
// Binarization

namespace {

struct Binarizer {
  LabelingScheme scheme;
  LabelVocab& vocab;
  int32_t next_leaf = 0;

  std::string generated_label(const BinaryTree& left_child) const {
    if (scheme == LabelingScheme::DollarOnly) return kGeneratedPrefix;
    return std::string(kGeneratedPrefix) + vocab.label(left_child.label_id);
  }

  std::unique_ptr<BinaryTree> convert(const Tree& node) {
    if (node.is_leaf()) {
      int32_t i = next_leaf++;
      return std::make_unique<BinaryTree>(vocab.add(kPosLabel), i, i + 1);
    }
    if (node.children.size() == 1) {
      // Single-leaf constituents keep their (possibly compound) label on the
      // leaf itself; the POS tag is recoverable only via original_pos.
      if (!node.children.front().is_leaf())
        throw Error(ErrorCode::InvalidArgument,
                    "unary chain not collapsed at '" + node.label + "'");
      int32_t i = next_leaf++;
      return std::make_unique<BinaryTree>(vocab.add(node.label), i, i + 1);
    }
    // Left-branching: fold children c1..ck as (((c1 c2) c3) ... ck).
    auto acc = convert(node.children[0]);
    for (std::size_t m = 1; m < node.children.size(); ++m) {
      auto right = convert(node.children[m]);
      bool topmost = (m + 1 == node.children.size());
      std::string label = topmost ? node.label : generated_label(*acc);
      auto parent = std::make_unique<BinaryTree>(vocab.add(label), acc->begin,
                                                 right->end);
      parent->left = std::move(acc);
      parent->right = std::move(right);
      acc = std::move(parent);
    }
    return acc;
  }
};

}  // namespace

BinaryTree binarize_left(const Tree& tree, LabelingScheme scheme,
                         LabelVocab& vocab) {
  if (leaf_count(tree) == 0)
    throw Error(ErrorCode::EmptySentence, "tree has no leaves");
  Binarizer binarizer{scheme, vocab};
  auto root = binarizer.convert(tree);
  return std::move(*root);
}

namespace {

std::vector<std::string> split_chain(const std::string& label) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  const std::string sep = kChainSeparator;
  while (true) {
    auto pos = label.find(sep, start);
    if (pos == std::string::npos) {
      parts.push_back(label.substr(start));
      break;
    }
    parts.push_back(label.substr(start, pos - start));
    start = pos + sep.size();
  }
  return parts;
}

Tree wrap_chain(const std::string& label, std::vector<Tree> children) {
  auto parts = split_chain(label);
  Tree node(parts.back(), std::move(children));
  for (auto it = std::next(parts.rbegin()); it != parts.rend(); ++it)
    node = Tree(*it, std::vector<Tree>{std::move(node)});
  return node;
}

// Returns the (possibly multiple, for spliced generated nodes) n-ary trees a
// binary node expands to.
std::vector<Tree> debinarize_node(const BinaryTree& node,
                                  const LabelVocab& vocab,
                                  const std::vector<std::string>& pos,
                                  const std::vector<std::string>& words,
                                  bool is_root) {
  const std::string& label = vocab.label(node.label_id);
  if (node.is_leaf()) {
    Tree leaf(pos[node.begin], words[node.begin]);
    if (label == kPosLabel) {
      std::vector<Tree> out;
      out.push_back(std::move(leaf));
      return out;
    }
    std::vector<Tree> children;
    children.push_back(std::move(leaf));
    std::vector<Tree> out;
    out.push_back(wrap_chain(label, std::move(children)));
    return out;
  }
  std::vector<Tree> children =
      debinarize_node(*node.left, vocab, pos, words, false);
  std::vector<Tree> right =
      debinarize_node(*node.right, vocab, pos, words, false);
  std::move(right.begin(), right.end(), std::back_inserter(children));
  // Generated nodes dissolve into their parent's child list. A generated
  // label at the root (possible for decoder output) is kept as a plain node.
  if (!is_root && label.starts_with(kGeneratedPrefix)) return children;
  std::vector<Tree> out;
  out.push_back(wrap_chain(label, std::move(children)));
  return out;
}

}  // namespace

Tree debinarize(const BinaryTree& btree, const LabelVocab& vocab,
                const std::vector<std::string>& original_pos,
                const std::vector<std::string>& words) {
  int32_t n = btree.length();
  if (static_cast<int32_t>(original_pos.size()) != n ||
      static_cast<int32_t>(words.size()) != n)
    throw Error(ErrorCode::LengthMismatch,
                "expected " + std::to_string(n) + " POS tags and words");
  auto trees = debinarize_node(btree, vocab, original_pos, words, true);
  return std::move(trees.front());
}

std::vector<LabeledSpan> labeled_spans(const BinaryTree& btree) {
  std::vector<LabeledSpan> spans;
  std::stack<const BinaryTree*> work;
  work.push(&btree);
  while (!work.empty()) {
    const BinaryTree* node = work.top();
    work.pop();
    spans.push_back({node->begin, node->end, node->label_id});
    if (!node->is_leaf()) {
      work.push(node->right.get());
      work.push(node->left.get());
    }
  }
  return spans;
}

// ---------------------------------------------------------------------------
// Yield helpers

namespace {

template <typename Fn>
void for_each_leaf(const Tree& tree, Fn&& fn) {
  std::stack<const Tree*> work;
  work.push(&tree);
  while (!work.empty()) {
    const Tree* node = work.top();
    work.pop();
    if (node->is_leaf()) {
      fn(*node);
    } else {
      for (auto it = node->children.rbegin(); it != node->children.rend(); ++it)
        work.push(&*it);
    }
  }
}

}  // namespace

int32_t leaf_count(const Tree& tree) {
  int32_t count = 0;
  for_each_leaf(tree, [&](const Tree&) { ++count; });
  return count;
}

std::vector<std::string> tree_words(const Tree& tree) {
  std::vector<std::string> words;
  for_each_leaf(tree, [&](const Tree& leaf) { words.push_back(leaf.word); });
  return words;
}

std::vector<std::string> tree_pos_tags(const Tree& tree) {
  std::vector<std::string> tags;
  for_each_leaf(tree, [&](const Tree& leaf) { tags.push_back(leaf.label); });
  return tags;
}

}  // namespace rulecky
