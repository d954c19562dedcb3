#pragma once

// Random instance generators shared by the test binaries.

#include <cstdint>

#include "qgame/qgame.hpp"

namespace qgame::testing {

/// B'B with B of size rank x n, so rank(result) <= rank.
inline Matrix random_psd(CounterRng& rng, Index n, Index rank) {
  const Matrix b = rng.normal_matrix(rank, n);
  Matrix m = b.transpose() * b;
  return 0.5 * (m + m.transpose());
}

inline Matrix random_psd(CounterRng& rng, Index n) {
  const Index rank = 1 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(n + 1));
  return random_psd(rng, n, std::min(rank, n));
}

inline Matrix random_symmetric(CounterRng& rng, Index n) {
  const Matrix a = rng.normal_matrix(n, n);
  return 0.5 * (a + a.transpose());
}

/// A game whose assembled matrix is B'B (PSD), with optional rank deficiency and
/// a linear term d1 = M11 t (always in R(M11)) and generic d2.
inline PartitionedQuadratic random_psd_game(CounterRng& rng, Index m, Index n, bool linear = true,
                                            bool full_rank = false) {
  const Index k = m + n;
  const Index rank =
      full_rank ? k : 1 + static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(k));
  const Matrix full = random_psd(rng, k, std::min(rank, k));
  const Matrix m11 = full.topLeftCorner(m, m);
  const Matrix m12 = full.topRightCorner(m, n);
  const Matrix m22 = full.bottomRightCorner(n, n);
  if (!linear) return {m11, m12, m22};
  const Vector d1 = m11 * rng.normal_vector(m);
  const Vector d2 = rng.normal_vector(n);
  return {m11, m12, m22, d1, d2};
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace qgame::testing
