#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rulecky {

/// Deterministic PRNG helpers on top of mt19937_64 that avoid the
/// implementation-defined std distributions, so identical seeds give
/// identical streams on every platform.
class DetRng {
 public:
  explicit DetRng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  double next_unit() {  // [0, 1)
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  int64_t next_below(int64_t n) {  // [0, n)
    return static_cast<int64_t>(gen_() % static_cast<uint64_t>(n));
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(static_cast<int64_t>(i)));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

/// FNV-1a, the word-to-row hash of the embedding tables.
inline uint64_t fnv1a_hash(std::string_view text) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace rulecky
