#pragma once

// Two-player quadratic games
//
//   V(u, w) = 1/2 [u; w]' [[M11, M12], [M12', M22]] [u; w] + [u; w]' [d1; d2]
//
// and their Lagrangian with the sphere multiplier,
//
//   L(u, w, lambda) = V(u, w) - lambda/2 (w'w - 1),
//
// whose quadratic part is M(lambda) = [[M11, M12], [M12', M22 - lambda I]].
//
// u (dimension m) is the minimizing player and w (dimension n) the maximizing one.

#include <cstdint>
#include <optional>
#include <vector>

#include "qgame/matrix.hpp"
#include "qgame/random.hpp"

namespace qgame {

class PartitionedQuadratic {
 public:
  PartitionedQuadratic(const Matrix& m11, const Matrix& m12, const Matrix& m22, const Vector& d1,
                       const Vector& d2, const Tolerances& tol = {})
      : m11_(symmetrized(m11, "M11", tol)),
        m12_(m12),
        m22_(symmetrized(m22, "M22", tol)),
        d1_(d1),
        d2_(d2) {
    (void)assemble(m11_, m12_, m22_);
    require_finite(m12_, "M12");
    require_finite(d1_, "d1");
    require_finite(d2_, "d2");
    if (d1_.size() != m11_.rows() || d2_.size() != m22_.rows())
      throw DimensionError("PartitionedQuadratic: d1/d2 have " + std::to_string(d1_.size()) +
                           "/" + std::to_string(d2_.size()) + " entries, expected " +
                           std::to_string(m11_.rows()) + "/" + std::to_string(m22_.rows()));
  }

  /// Homogeneous game (d1 = d2 = 0).
  PartitionedQuadratic(const Matrix& m11, const Matrix& m12, const Matrix& m22,
                       const Tolerances& tol = {})
      : PartitionedQuadratic(m11, m12, m22, Vector::Zero(m11.rows()), Vector::Zero(m22.rows()),
                             tol) {}

  [[nodiscard]] const Matrix& m11() const { return m11_; }
  [[nodiscard]] const Matrix& m12() const { return m12_; }
  [[nodiscard]] const Matrix& m22() const { return m22_; }
  [[nodiscard]] const Vector& d1() const { return d1_; }
  [[nodiscard]] const Vector& d2() const { return d2_; }
  [[nodiscard]] Index m() const { return m11_.rows(); }
  [[nodiscard]] Index n() const { return m22_.rows(); }

  [[nodiscard]] bool is_homogeneous() const { return d1_.isZero(0.0) && d2_.isZero(0.0); }

  /// M(lambda); M(0) is the game matrix M.
  [[nodiscard]] Matrix assembled(double lambda = 0.0) const {
    return assemble(m11_, m12_, m22_ - lambda * Matrix::Identity(n(), n()));
  }

  [[nodiscard]] Vector linear_term() const {
    Vector d(m() + n());
    d << d1_, d2_;
    return d;
  }

  [[nodiscard]] double value(const Vector& u, const Vector& w) const {
    check(u, w);
    return 0.5 * u.dot(m11_ * u) + u.dot(m12_ * w) + 0.5 * w.dot(m22_ * w) + u.dot(d1_) +
           w.dot(d2_);
  }

  [[nodiscard]] double lagrangian(const Vector& u, const Vector& w, double lambda) const {
    return value(u, w) - 0.5 * lambda * (w.squaredNorm() - 1.0);
  }

 private:
  void check(const Vector& u, const Vector& w) const {
    if (u.size() != m() || w.size() != n())
      throw DimensionError("PartitionedQuadratic: point (" + std::to_string(u.size()) + ", " +
                           std::to_string(w.size()) + ") does not match (" +
                           std::to_string(m()) + ", " + std::to_string(n()) + ")");
  }

  Matrix m11_;
  Matrix m12_;
  Matrix m22_;
  Vector d1_;
  Vector d2_;
};

/// Existence threshold of min_u max_w L: ||M22||.
inline double minmax_threshold(const PartitionedQuadratic& pq) {
  return spectral_norm(pq.m22());
}

/// Existence threshold of max_w min_u L: ||M22 - M12' M11^+ M12||.
inline double maxmin_threshold(const PartitionedQuadratic& pq, const Tolerances& tol = {}) {
  return spectral_norm(schur_complements(pq.m11(), pq.m12(), pq.m22(), 0.0, tol).schur11);
}

inline void require_psd_game(const PartitionedQuadratic& pq, const Tolerances& tol = {}) {
  if (!is_psd(pq.assembled(), tol))
    throw PreconditionError("game matrix M(0) is not positive semidefinite");
}

// ---------------------------------------------------------------------------
// Unconstrained saddle points

/// Saddle points of V as one affine set over the stacked (u, w) vector.
struct SaddleSolution {
  AffineSolutionSet joint;
  double value;
  Index m;

  [[nodiscard]] Vector u_star() const { return joint.particular.head(m); }
  [[nodiscard]] Vector w_star() const { return joint.particular.tail(joint.particular.size() - m); }
  [[nodiscard]] AffineSolutionSet u_set() const { return project(joint, 0, m); }
  [[nodiscard]] AffineSolutionSet w_set() const {
    return project(joint, m, joint.particular.size() - m);
  }
};

/// Saddle points of V for M11 >= 0 and M22 <= 0. They exist iff d in R(M); then
/// (u*, w*) in -M^+ d + N(M) with value -1/2 d'M^+ d. std::nullopt: no solution.
inline std::optional<SaddleSolution> solve_saddle(const PartitionedQuadratic& pq,
                                                  const Tolerances& tol = {}) {
  if (!is_psd(pq.m11(), tol)) throw PreconditionError("solve_saddle: M11 is not PSD");
  if (!is_nsd(pq.m22(), tol)) throw PreconditionError("solve_saddle: M22 is not NSD");
  const Vector d = pq.linear_term();
  const LinearSolveResult stationary = solve_linear(pq.assembled(), -d, tol);
  if (!stationary.consistent()) return std::nullopt;
  return SaddleSolution{stationary.solutions, 0.5 * d.dot(stationary.solutions.particular),
                        pq.m()};
}

/// Sampled check of V(u*, w) <= V(u*, w*) <= V(u, w*). Draws are Gaussian around
/// (u*, w*) with standard deviation 1 + ||(u*, w*)||; each inequality gets a slack
/// of 1e-9 (1 + |V(u*, w*)|).
inline bool verify_saddle(const PartitionedQuadratic& pq, const Vector& u_star,
                          const Vector& w_star, std::size_t samples, std::uint64_t seed) {
  const double v_star = pq.value(u_star, w_star);
  const double slack = 1e-9 * (1.0 + std::abs(v_star));
  const double spread = 1.0 + std::sqrt(u_star.squaredNorm() + w_star.squaredNorm());
  CounterRng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector u = u_star + spread * rng.normal_vector(pq.m());
    const Vector w = w_star + spread * rng.normal_vector(pq.n());
    if (pq.value(u_star, w) > v_star + slack) return false;
    if (v_star > pq.value(u, w_star) + slack) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// The lambda-parameterized Lagrangian

enum class LambdaStatus {
  Finite,
  Infinite,        // +infinity: lambda below the existence threshold (or the boundary fails)
  UnboundedBelow,  // -infinity: d1 outside R(M11), so min_u is unbounded for every w
};

struct LagrangianOptimum {
  double value;
  AffineSolutionSet u_set;
  AffineSolutionSet w_set;
};

/// Solution of min_u max_w L(., ., lambda) or max_w min_u L(., ., lambda).
///
/// For minmax, u_set is the outer minimizer set and w_set the inner response to
/// its particular member. For maxmin, w_set is the outer maximizer set and u_set
/// the inner response to its particular member.
struct LambdaSolve {
  double lambda;
  LambdaStatus status;
  std::optional<LagrangianOptimum> optimum;  // present iff status == Finite

  [[nodiscard]] bool finite() const { return status == LambdaStatus::Finite; }
  [[nodiscard]] double value() const { return optimum.value().value; }
};

namespace detail {

inline double threshold_slack(double threshold, const Tolerances& tol) {
  return tol.threshold_slack * (1.0 + std::abs(threshold));
}

inline bool d1_in_range(const PartitionedQuadratic& pq, const Tolerances& tol) {
  return in_range(svd(pq.m11(), tol), pq.d1(), tol) || pq.d1().isZero(0.0);
}

// min_u max_w L for lambda >= ||M22||. M(lambda) then has M11 >= 0 and
// M22 - lambda I <= 0, so its saddle points are the stationary points of the joint
// system M(lambda) z = -d and the value is lambda/2 - 1/2 d'M(lambda)^+ d. The
// saddle set is a product, so its u-projection is the outer minimizer set.
inline LambdaSolve minmax_unchecked(const PartitionedQuadratic& pq, double lambda,
                                    const Tolerances& tol) {
  const double threshold = minmax_threshold(pq);
  if (lambda < threshold - threshold_slack(threshold, tol))
    return {lambda, LambdaStatus::Infinite, std::nullopt};
  if (!d1_in_range(pq, tol)) return {lambda, LambdaStatus::UnboundedBelow, std::nullopt};
  const double effective = std::max(lambda, threshold);
  const Vector d = pq.linear_term();
  const LinearSolveResult joint = solve_linear(pq.assembled(effective), -d, tol);
  if (!joint.consistent()) return {lambda, LambdaStatus::Infinite, std::nullopt};

  const double value = 0.5 * effective + 0.5 * d.dot(joint.solutions.particular);
  AffineSolutionSet u_set = project(joint.solutions, 0, pq.m(), tol);
  const Matrix shifted = pq.m22() - effective * Matrix::Identity(pq.n(), pq.n());
  const Vector rhs = pq.m12().transpose() * u_set.particular + pq.d2();
  AffineSolutionSet w_set = solve_linear(shifted, -rhs, tol).solutions;
  return {lambda, LambdaStatus::Finite, LagrangianOptimum{value, std::move(u_set), std::move(w_set)}};
}

// max_w min_u L, solved in the nested order: the inner minimizer is
// -M11^+ (M12 w + d1) + N(M11), leaving the concave quadratic
// 1/2 w'S(lambda) w + w'(d2 - M12' M11^+ d1) - 1/2 d1'M11^+ d1 + lambda/2
// with S(lambda) = (M22 - lambda I) - M12' M11^+ M12.
inline LambdaSolve maxmin_unchecked(const PartitionedQuadratic& pq, double lambda,
                                    const Tolerances& tol) {
  const SvdFactors f11 = svd(pq.m11(), tol);
  if (!(in_range(f11, pq.d1(), tol) || pq.d1().isZero(0.0)))
    return {lambda, LambdaStatus::UnboundedBelow, std::nullopt};
  const Matrix p11 = pseudoinverse(f11);
  const Matrix coupling = pq.m12().transpose() * p11 * pq.m12();
  const Matrix schur = cancelled_difference(pq.m22(), coupling, tol);
  const double threshold = spectral_norm(schur);
  if (lambda < threshold - threshold_slack(threshold, tol))
    return {lambda, LambdaStatus::Infinite, std::nullopt};
  const double effective = std::max(lambda, threshold);

  const Matrix outer = schur - effective * Matrix::Identity(pq.n(), pq.n());
  const Vector rhs = pq.d2() - pq.m12().transpose() * (p11 * pq.d1());
  const LinearSolveResult w_stationary = solve_linear(outer, -rhs, tol);
  if (!w_stationary.consistent()) return {lambda, LambdaStatus::Infinite, std::nullopt};

  const double value = 0.5 * effective - 0.5 * pq.d1().dot(p11 * pq.d1()) +
                       0.5 * rhs.dot(w_stationary.solutions.particular);
  AffineSolutionSet w_set = w_stationary.solutions;
  const Vector u_rhs = pq.m12() * w_set.particular + pq.d1();
  AffineSolutionSet u_set = solve_linear(f11, -u_rhs, tol).solutions;
  return {lambda, LambdaStatus::Finite, LagrangianOptimum{value, std::move(u_set), std::move(w_set)}};
}

}  // namespace detail

/// min_u max_w L(u, w, lambda) for a game with M(0) >= 0. Finite iff
/// lambda >= ||M22|| (and, at the threshold itself, d in R(M(lambda))).
inline LambdaSolve minmax_at_lambda(const PartitionedQuadratic& pq, double lambda,
                                    const Tolerances& tol = {}) {
  require_psd_game(pq, tol);
  return detail::minmax_unchecked(pq, lambda, tol);
}

/// max_w min_u L(u, w, lambda) for a game with M(0) >= 0. Finite iff
/// lambda >= ||M22 - M12' M11^+ M12|| (and the outer problem is bounded there).
inline LambdaSolve maxmin_at_lambda(const PartitionedQuadratic& pq, double lambda,
                                    const Tolerances& tol = {}) {
  require_psd_game(pq, tol);
  return detail::maxmin_unchecked(pq, lambda, tol);
}

enum class DualityKind { StrongDuality, InfiniteGap, BothInfinite };

struct DualityReport {
  DualityKind kind;
  std::optional<double> value;  // the common value under strong duality
  LambdaSolve minmax;
  LambdaSolve maxmin;
};

/// Compare both orders of play at lambda. BothInfinite also covers the case where
/// both values are -infinity (d1 outside R(M11)).
inline DualityReport duality_report(const PartitionedQuadratic& pq, double lambda,
                                    const Tolerances& tol = {}) {
  require_psd_game(pq, tol);
  LambdaSolve up = detail::minmax_unchecked(pq, lambda, tol);
  LambdaSolve down = detail::maxmin_unchecked(pq, lambda, tol);
  if (up.finite() && down.finite())
    return {DualityKind::StrongDuality, up.value(), std::move(up), std::move(down)};
  if (down.finite()) return {DualityKind::InfiniteGap, std::nullopt, std::move(up), std::move(down)};
  return {DualityKind::BothInfinite, std::nullopt, std::move(up), std::move(down)};
}

/// One row of the optimal value functions versus lambda.
struct LambdaCurvePoint {
  double lambda;
  LambdaStatus minmax_status;
  double minmax;  // meaningful only when minmax_status == Finite
  LambdaStatus maxmin_status;
  double maxmin;
};

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t steps) {
  if (!(lo < hi)) throw std::invalid_argument("grid: lambda_min must be below lambda_max");
  if (steps < 2) throw std::invalid_argument("grid: at least 2 steps are required");
  std::vector<double> grid(steps);
  for (std::size_t i = 0; i < steps; ++i)
    grid[i] = i + 1 == steps ? hi
                             : lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(steps - 1);
  return grid;
}

/// Both value functions on a uniform lambda grid, ascending.
inline std::vector<LambdaCurvePoint> lambda_curve(const PartitionedQuadratic& pq,
                                                  double lambda_min, double lambda_max,
                                                  std::size_t steps, const Tolerances& tol = {}) {
  const std::vector<double> grid = uniform_grid(lambda_min, lambda_max, steps);
  require_psd_game(pq, tol);
  std::vector<LambdaCurvePoint> curve;
  curve.reserve(steps);
  for (double lambda : grid) {
    const LambdaSolve up = detail::minmax_unchecked(pq, lambda, tol);
    const LambdaSolve down = detail::maxmin_unchecked(pq, lambda, tol);
    curve.push_back({lambda, up.status, up.finite() ? up.value() : 0.0, down.status,
                     down.finite() ? down.value() : 0.0});
  }
  return curve;
}

}  // namespace qgame
