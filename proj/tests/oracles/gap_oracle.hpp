#pragma once

// Brute-force reference for gap-pair emission: enumerate every position
// triple a < b < c, keep the ones whose outer distance is in range, and sort
// by (left position, distance, inner position).

#include <algorithm>
#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

struct GapTriple {
  std::size_t left;
  std::size_t right;
  std::size_t inner;
};

inline std::vector<GapTriple> brute_force_gaps(std::size_t n, int k_min, int k_max) {
  std::vector<GapTriple> out;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c) {
        if (!(a < b && b < c)) continue;
        const auto k = static_cast<int>(c - a);
        if (k < k_min || k > k_max) continue;
        out.push_back({a, c, b});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const GapTriple& x, const GapTriple& y) {
    return std::make_tuple(x.left, x.right - x.left, x.inner) <
           std::make_tuple(y.left, y.right - y.left, y.inner);
  });
  return out;
}

}  // namespace oracle
