#pragma once

// Flat-array kernels used by the fast decoders. Each decoder performs one
// gather + elementwise add + max-reduce pass per span size; the thread-local
// counter records those passes for the step-structure checks and the bench.

#include <cstddef>
#include <cstdint>

namespace rulecky::bulk {

extern thread_local int64_t step_counter;

inline void count_step() { ++step_counter; }

inline void gather(const double* src, const int32_t* idx, double* dst,
                   std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) dst[k] = src[idx[k]];
}

inline void add_into(double* dst, const double* src, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) dst[k] += src[k];
}

// Row-wise max with the index of the first maximum; reduction scans left to
// right so ties resolve to the smallest index in both decoders.
inline void row_max(const double* values, std::size_t rows, std::size_t cols,
                    double* out_val, int32_t* out_idx) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = values + r * cols;
    double best = row[0];
    int32_t best_idx = 0;
    for (std::size_t c = 1; c < cols; ++c) {
      if (row[c] > best) {
        best = row[c];
        best_idx = static_cast<int32_t>(c);
      }
    }
    out_val[r] = best;
    out_idx[r] = best_idx;
  }
}

}  // namespace rulecky::bulk
