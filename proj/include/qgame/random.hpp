#pragma once

// Counter-based pseudo-random source shared by the oracles and samplers.
//
// Draw k from a generator seeded with s is splitmix64(s + (k+1) * 0x9E3779B97F4A7C15),
// i.e. the SplitMix64 finalizer applied to a Weyl sequence. Uniform doubles take
// the top 53 bits; normals use the cosine branch of Box-Muller on two uniforms.
// The stream depends only on the seed and the draw count, so two generators with
// the same seed produce the same numbers on every platform with an IEEE libm.

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace qgame {

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    ++counter_;
    std::uint64_t z = seed_ + counter_ * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal();
    return m;
  }

  /// Uniform on the unit sphere in R^n (normalized Gaussian; redrawn on a zero draw).
  Eigen::VectorXd unit_vector(Eigen::Index n) {
    for (;;) {
      Eigen::VectorXd v = normal_vector(n);
      const double norm = v.norm();
      if (norm > 0.0) return v / norm;
    }
  }

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace qgame
