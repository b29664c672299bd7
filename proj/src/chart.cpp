#include "rulecky/chart.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stack>

#include "bulk.hpp"

namespace rulecky {

namespace bulk {
thread_local int64_t step_counter = 0;
}

int64_t bulk_step_count() { return bulk::step_counter; }
void reset_bulk_step_count() { bulk::step_counter = 0; }

SpanScores::SpanScores(int32_t n, int32_t num_labels, double fill)
    : n_(n), num_labels_(num_labels) {
  if (n < 1) throw Error(ErrorCode::EmptySentence, "chart needs n >= 1");
  if (num_labels < 1)
    throw Error(ErrorCode::InvalidArgument, "chart needs at least one label");
  data_.assign(static_cast<std::size_t>(n + 1) * (n + 1) * num_labels, fill);
}

double& SpanScores::at(int32_t i, int32_t j, int32_t label) {
  if (i < 0 || j > n_ || i >= j || label < 0 || label >= num_labels_)
    throw Error(ErrorCode::IndexOutOfRange,
                "span (" + std::to_string(i) + "," + std::to_string(j) +
                    ") label " + std::to_string(label));
  return (*this)(i, j, label);
}

double SpanScores::at(int32_t i, int32_t j, int32_t label) const {
  return const_cast<SpanScores&>(*this).at(i, j, label);
}

void validate_scores(const SpanScores& scores) {
  for (int32_t i = 0; i < scores.n(); ++i)
    for (int32_t j = i + 1; j <= scores.n(); ++j)
      for (int32_t l = 0; l < scores.num_labels(); ++l)
        if (!std::isfinite(scores(i, j, l)))
          throw Error(ErrorCode::NonFiniteScore,
                      "span (" + std::to_string(i) + "," + std::to_string(j) +
                          ") label " + std::to_string(l));
}

namespace {

// Label-max of each addressable cell; reduction order (ascending label id,
// strict improvement) is shared by both decoders.
std::vector<double> span_label_max(const SpanScores& scores) {
  int32_t n = scores.n();
  int32_t L = scores.num_labels();
  std::vector<double> smax(static_cast<std::size_t>(n + 1) * (n + 1), 0.0);
  for (int32_t i = 0; i < n; ++i) {
    for (int32_t j = i + 1; j <= n; ++j) {
      const double* row = scores.cell_scores(scores.cell(i, j));
      double best = row[0];
      for (int32_t l = 1; l < L; ++l)
        if (row[l] > best) best = row[l];
      smax[scores.cell(i, j)] = best;
    }
  }
  return smax;
}

}  // namespace

ChartResult cky_sequential(const SpanScores& scores) {
  validate_scores(scores);
  int32_t n = scores.n();
  std::vector<double> smax = span_label_max(scores);
  ChartResult chart(n);
  for (int32_t i = 0; i < n; ++i)
    chart.t[chart.cell(i, i + 1)] = smax[chart.cell(i, i + 1)];
  for (int32_t ss = 2; ss <= n; ++ss) {
    for (int32_t i = 0; i + ss <= n; ++i) {
      int32_t j = i + ss;
      double best = chart.t[chart.cell(i, i + 1)] + chart.t[chart.cell(i + 1, j)];
      int32_t best_k = i + 1;
      for (int32_t k = i + 2; k < j; ++k) {
        double cand = chart.t[chart.cell(i, k)] + chart.t[chart.cell(k, j)];
        if (cand > best) {
          best = cand;
          best_k = k;
        }
      }
      chart.t[chart.cell(i, j)] = smax[chart.cell(i, j)] + best;
      chart.split[chart.cell(i, j)] = best_k;
    }
  }
  return chart;
}

ChartResult cky_fast(const SpanScores& scores) {
  validate_scores(scores);
  int32_t n = scores.n();
  std::vector<double> smax = span_label_max(scores);
  ChartResult chart(n);
  for (int32_t i = 0; i < n; ++i)
    chart.t[chart.cell(i, i + 1)] = smax[chart.cell(i, i + 1)];

  std::vector<int32_t> span_cells, left_idx, right_idx;
  std::vector<double> left_vals, right_vals, best_vals;
  std::vector<int32_t> best_split;
  for (int32_t ss = 2; ss <= n; ++ss) {
    std::size_t num = static_cast<std::size_t>(n - ss + 1);
    std::size_t splits = static_cast<std::size_t>(ss - 1);
    span_cells.resize(num);
    left_idx.resize(num * splits);
    right_idx.resize(num * splits);
    for (std::size_t p = 0; p < num; ++p) {
      int32_t i = static_cast<int32_t>(p);
      int32_t j = i + ss;
      span_cells[p] = chart.cell(i, j);
      for (std::size_t s = 0; s < splits; ++s) {
        int32_t k = i + 1 + static_cast<int32_t>(s);
        left_idx[p * splits + s] = chart.cell(i, k);
        right_idx[p * splits + s] = chart.cell(k, j);
      }
    }
    left_vals.resize(num * splits);
    right_vals.resize(num * splits);
    best_vals.resize(num);
    best_split.resize(num);
    bulk::gather(chart.t.data(), left_idx.data(), left_vals.data(),
                 num * splits);
    bulk::gather(chart.t.data(), right_idx.data(), right_vals.data(),
                 num * splits);
    bulk::add_into(left_vals.data(), right_vals.data(), num * splits);
    bulk::row_max(left_vals.data(), num, splits, best_vals.data(),
                  best_split.data());
    for (std::size_t p = 0; p < num; ++p) {
      chart.t[span_cells[p]] = smax[span_cells[p]] + best_vals[p];
      chart.split[span_cells[p]] =
          static_cast<int32_t>(p) + 1 + best_split[p];
    }
    bulk::count_step();
  }
  return chart;
}

namespace {

int32_t argmax_label(const SpanScores& scores, int32_t i, int32_t j) {
  const double* row = scores.cell_scores(scores.cell(i, j));
  int32_t best = 0;
  for (int32_t l = 1; l < scores.num_labels(); ++l)
    if (row[l] > row[best]) best = l;
  return best;
}

}  // namespace

BinaryTree decode_tree(const SpanScores& scores, const ChartResult& chart) {
  if (chart.n != scores.n())
    throw Error(ErrorCode::DimensionMismatch, "chart and scores disagree on n");
  int32_t n = scores.n();
  BinaryTree root(argmax_label(scores, 0, n), 0, n);
  std::stack<BinaryTree*> work;
  work.push(&root);
  while (!work.empty()) {
    BinaryTree* node = work.top();
    work.pop();
    if (node->length() == 1) continue;
    int32_t k = chart.split_at(node->begin, node->end);
    if (k <= node->begin || k >= node->end)
      throw Error(ErrorCode::InconsistentChart,
                  "split " + std::to_string(k) + " outside span (" +
                      std::to_string(node->begin) + "," +
                      std::to_string(node->end) + ")");
    node->left = std::make_unique<BinaryTree>(
        argmax_label(scores, node->begin, k), node->begin, k);
    node->right = std::make_unique<BinaryTree>(
        argmax_label(scores, k, node->end), k, node->end);
    work.push(node->left.get());
    work.push(node->right.get());
  }
  return root;
}

void save_span_scores(const std::string& path, const SpanScores& scores) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.precision(17);
  out << scores.n() << '\t' << scores.num_labels() << '\n';
  for (int32_t i = 0; i < scores.n(); ++i)
    for (int32_t j = i + 1; j <= scores.n(); ++j)
      for (int32_t l = 0; l < scores.num_labels(); ++l)
        out << i << '\t' << j << '\t' << l << '\t' << scores(i, j, l) << '\n';
}

SpanScores load_span_scores(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
  int32_t n = 0, num_labels = 0;
  if (!(in >> n >> num_labels))
    throw Error(ErrorCode::IoError, "missing chart header in " + path);
  SpanScores scores(n, num_labels);
  std::vector<bool> seen(scores.data().size(), false);
  int32_t i, j, l;
  double value;
  while (in >> i >> j >> l >> value) {
    scores.at(i, j, l) = value;
    seen[static_cast<std::size_t>(scores.cell(i, j)) * num_labels + l] = true;
  }
  for (int32_t a = 0; a < n; ++a)
    for (int32_t b = a + 1; b <= n; ++b)
      for (int32_t c = 0; c < num_labels; ++c)
        if (!seen[static_cast<std::size_t>(scores.cell(a, b)) * num_labels + c])
          throw Error(ErrorCode::IoError,
                      "chart file " + path + " is missing cells");
  return scores;
}

}  // namespace rulecky
