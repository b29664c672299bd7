#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rulecky/tree.hpp"

namespace rulecky {

/// Dense span-score chart s[i][j][l] for 0 <= i < j <= n. Rows are laid out
/// with stride (n+1) so a span (i, j) maps to cell i*(n+1)+j.
class SpanScores {
 public:
  SpanScores(int32_t n, int32_t num_labels, double fill = 0.0);

  int32_t n() const { return n_; }
  int32_t num_labels() const { return num_labels_; }
  int32_t stride() const { return n_ + 1; }
  int32_t cell(int32_t i, int32_t j) const { return i * (n_ + 1) + j; }

  double& at(int32_t i, int32_t j, int32_t label);
  double at(int32_t i, int32_t j, int32_t label) const;

  double& operator()(int32_t i, int32_t j, int32_t label) {
    return data_[static_cast<std::size_t>(cell(i, j)) * num_labels_ + label];
  }
  double operator()(int32_t i, int32_t j, int32_t label) const {
    return data_[static_cast<std::size_t>(cell(i, j)) * num_labels_ + label];
  }

  const double* cell_scores(int32_t c) const {
    return data_.data() + static_cast<std::size_t>(c) * num_labels_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  int32_t n_;
  int32_t num_labels_;
  std::vector<double> data_;
};

/// Throws NonFiniteScore if any addressable (i < j) entry is not finite.
void validate_scores(const SpanScores& scores);

/// Best sub-tree score t and split point K per span, stride (n+1) like
/// SpanScores. Cells outside i < j keep their fill values (0 and -1).
struct ChartResult {
  int32_t n = 0;
  std::vector<double> t;
  std::vector<int32_t> split;

  explicit ChartResult(int32_t n_)
      : n(n_),
        t(static_cast<std::size_t>(n_ + 1) * (n_ + 1), 0.0),
        split(static_cast<std::size_t>(n_ + 1) * (n_ + 1), -1) {}

  int32_t cell(int32_t i, int32_t j) const { return i * (n + 1) + j; }
  double score(int32_t i, int32_t j) const { return t[cell(i, j)]; }
  int32_t split_at(int32_t i, int32_t j) const { return split[cell(i, j)]; }
  double root_score() const { return t[cell(0, n)]; }

  bool operator==(const ChartResult&) const = default;
};

/// Reference chart filler: one span at a time, splits scanned in ascending
/// order, ties broken toward the smallest split and smallest label id.
ChartResult cky_sequential(const SpanScores& scores);

/// Same results bit-for-bit, computed as one gather + add + max-reduce pass
/// per span size over flat index vectors.
ChartResult cky_fast(const SpanScores& scores);

/// Reads the tree out of a filled chart with an explicit stack; each node
/// gets the argmax label of its own span.
BinaryTree decode_tree(const SpanScores& scores, const ChartResult& chart);

/// Number of bulk reduce passes executed by the fast decoders on this thread
/// since the last reset: one per span size, n-1 per decode.
int64_t bulk_step_count();
void reset_bulk_step_count();

// Chart file format: header line "n num_labels", then one line "i j label
// score" per addressable cell.
void save_span_scores(const std::string& path, const SpanScores& scores);
SpanScores load_span_scores(const std::string& path);

}  // namespace rulecky
