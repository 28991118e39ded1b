#pragma once
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mgbid {

// Every randomized routine derives its values from raw mt19937_64 words
// through the helpers below instead of std::*_distribution, so the draw
// sequence is portable across standard libraries. The order and count of
// draws is part of each module's reproducibility contract; independent
// re-implementations (test oracles) replay it from these four primitives.
using Rng = std::mt19937_64;

// +1 or -1 from the low bit.
inline int sign_draw(Rng& rng) { return (rng() & 1ull) ? +1 : -1; }

// Uniform double in [0,1) from the top 53 bits.
inline double unit_draw(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Index in [0,n). Modulo bias is ~n/2^64, irrelevant at the sizes used here.
inline std::size_t index_draw(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline double uniform_draw(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_draw(rng);
}

// In-place Fisher-Yates shuffle driven by index_draw.
template <typename T>
void shuffle_draw(Rng& rng, std::vector<T>& v) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = index_draw(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace mgbid
