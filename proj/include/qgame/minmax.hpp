#pragma once

// Sphere-constrained games
//
//   min_u max_{w in W} V(u, w)     and     max_{w in W} min_u V(u, w),   W = {w : w'w = 1},
//
// for a game matrix M >= 0. Both reduce to a scalar problem over the multiplier:
// lambda0 minimizes L(lambda) = lambda/2 - 1/2 d'M(lambda)^+ d on [threshold, inf),
// with threshold ||M22|| for minmax and ||M22 - M12' M11^+ M12|| for maxmin.
// Without a linear term lambda0 is the threshold itself.

#include <cmath>
#include <optional>
#include <string>

#include "qgame/game.hpp"
#include "qgame/sphere.hpp"

namespace qgame {

enum class Direction { MinMax, MaxMin };

inline const char* to_string(Direction dir) {
  return dir == Direction::MinMax ? "minmax" : "maxmin";
}

inline double threshold(const PartitionedQuadratic& pq, Direction dir, const Tolerances& tol = {}) {
  return dir == Direction::MinMax ? minmax_threshold(pq) : maxmin_threshold(pq, tol);
}

struct SearchDiagnostics {
  bool at_threshold = false;   // lambda0 is the threshold (boundary case)
  int doublings = 0;           // bracket expansions
  int iterations = 0;          // bisection (or golden-section) steps
  bool golden_fallback = false;
  double residual = 0.0;       // ||w(lambda0)|| - 1 (0 at the threshold when the set is a sphere cap)
};

struct ConstrainedGameSolution {
  Direction direction;
  double value;
  double lambda0;
  AffineSolutionSet u_set;
  SphereSolutionSet w_set;
  SearchDiagnostics diagnostics;

  [[nodiscard]] Vector w() const { return w_set.representative(); }
  [[nodiscard]] Vector u() const { return u_set.particular; }
};

namespace detail {

inline void require_constrained_game(const PartitionedQuadratic& pq, const Tolerances& tol) {
  if (pq.n() == 0) throw DimensionError("constrained game: w must have at least one component");
  require_psd_game(pq, tol);
}

inline LambdaSolve solve_at(const PartitionedQuadratic& pq, double lambda, Direction dir,
                            const Tolerances& tol) {
  return dir == Direction::MinMax ? minmax_unchecked(pq, lambda, tol)
                                  : maxmin_unchecked(pq, lambda, tol);
}

// ||w-response(lambda)|| with +inf standing for an infinite L(lambda).
inline double response_norm(const PartitionedQuadratic& pq, double lambda, Direction dir,
                            const Tolerances& tol) {
  const LambdaSolve s = solve_at(pq, lambda, dir, tol);
  if (!s.finite()) return std::numeric_limits<double>::infinity();
  return s.optimum->w_set.particular.norm();
}

// lim ||w(lambda)|| as lambda decreases to the threshold, where w(lambda) is the
// w-response at lambda. For MaxMin the outer matrix S - lambda I keeps its
// eigenvectors, so the limit is the pseudoinverse point. For MinMax the
// eigenvectors of M(lambda) rotate with lambda: with A = M(threshold) and K an
// orthonormal basis of N(A), the limit is z0 = -A^+ d + K c with K'E z0 = 0
// (E keeps the w-block), so its w-part is the min-norm w-part of -A^+ d with
// the range of the w-block of K projected out.
inline double threshold_response_norm(const PartitionedQuadratic& pq, double thr, Direction dir,
                                      const Tolerances& tol) {
  if (dir == Direction::MaxMin) return response_norm(pq, thr, dir, tol);
  if (!d1_in_range(pq, tol)) return std::numeric_limits<double>::infinity();
  const SvdFactors f = svd(pq.assembled(thr), tol);
  const LinearSolveResult joint = solve_linear(f, -pq.linear_term(), tol);
  if (!joint.consistent()) return std::numeric_limits<double>::infinity();
  const Vector w_p = joint.solutions.particular.tail(pq.n());
  const Matrix k_w = f.v2.bottomRows(pq.n());
  if (k_w.cols() == 0) return w_p.norm();
  const Matrix q = range_space(k_w, tol);
  return (w_p - q * (q.transpose() * w_p)).norm();
}

// Member of the inner response set for the MaxMin u-player at a fixed w.
inline AffineSolutionSet u_response(const PartitionedQuadratic& pq, const Vector& w,
                                    const Tolerances& tol) {
  return solve_linear(pq.m11(), -(pq.m12() * w + pq.d1()), tol).solutions;
}

inline SphereSolutionSet clip_to_sphere(AffineSolutionSet set, const Tolerances& tol) {
  // The search accepts ||w|| <= 1 + 1e-8 at the threshold; pull such points onto W.
  const double norm = set.particular.norm();
  if (norm > 1.0 && norm <= 1.0 + 1e-8) set.particular /= norm;
  if (set.basis.cols() == 0 && std::abs(norm - 1.0) <= 1e-8 && norm > 0.0)
    set.particular /= norm;
  return sphere_intersect(set, tol);
}

}  // namespace detail

/// Closed form for d = 0: lambda0 is the threshold and the value is lambda0 / 2.
///   MinMax: u0 in N(S22(lambda0)), w0 in N(M22 - lambda0 I) on W.
///   MaxMin: w0 in N(S11(lambda0)) on W, u0 in -M11^+ M12 w0 + N(M11).
inline ConstrainedGameSolution solve_homogeneous(const PartitionedQuadratic& pq, Direction dir,
                                                 const Tolerances& tol = {}) {
  if (!pq.is_homogeneous())
    throw PreconditionError("solve_homogeneous: the game has a linear term");
  detail::require_constrained_game(pq, tol);
  const double lambda0 = threshold(pq, dir, tol);
  const SchurPair schur = schur_complements(pq.m11(), pq.m12(), pq.m22(), lambda0, tol);
  const Index m = pq.m();
  const Index n = pq.n();

  ConstrainedGameSolution sol{dir, 0.5 * lambda0, lambda0, {}, {}, {}};
  sol.diagnostics.at_threshold = true;
  if (dir == Direction::MinMax) {
    sol.u_set = {Vector::Zero(m), null_space(schur.schur22, tol)};
    const Matrix shifted = pq.m22() - lambda0 * Matrix::Identity(n, n);
    sol.w_set = sphere_intersect({Vector::Zero(n), null_space(shifted, tol)}, tol);
  } else {
    sol.w_set = sphere_intersect({Vector::Zero(n), null_space(schur.schur11, tol)}, tol);
    sol.u_set = detail::u_response(pq, sol.w(), tol);
  }
  return sol;
}

struct LambdaSearchResult {
  double lambda0;
  SearchDiagnostics diagnostics;
};

/// Minimizer of the convex function L(lambda) on [threshold, inf).
///
/// If the response at the threshold exists and its limit from the right has
/// ||w|| <= 1 + 1e-8, the threshold is returned. Otherwise the bracket [threshold + delta, ...] is doubled until
/// ||w(lambda)|| < 1, and ||w(lambda)|| - 1 is bisected to 1e-10 (tol.secular).
/// dL/dlambda = 1/2 (1 - ||w(lambda)||^2), so the root is the stationary point.
/// If the root does not beat the bracket ends on L, golden-section search on L
/// over the bracket replaces it and the diagnostics say so.
inline LambdaSearchResult lambda_search(const PartitionedQuadratic& pq, double threshold,
                                        Direction dir = Direction::MinMax,
                                        const Tolerances& tol = {}) {
  detail::require_constrained_game(pq, tol);
  SearchDiagnostics diag;
  const double at_threshold = detail::threshold_response_norm(pq, threshold, dir, tol);
  if (at_threshold <= 1.0 + 1e-8) {
    diag.at_threshold = true;
    diag.residual = at_threshold - 1.0;
    return {threshold, diag};
  }

  auto g = [&](double lambda) { return detail::response_norm(pq, lambda, dir, tol) - 1.0; };
  double lo = threshold;
  double delta = 1e-3 * (1.0 + std::abs(threshold));
  double hi = threshold + delta;
  double g_hi = g(hi);
  while (g_hi >= 0.0) {
    if (++diag.doublings > 60)
      throw NumericalError("lambda_search: bracket expansion exceeded 60 doublings");
    lo = hi;
    delta *= 2.0;
    hi = threshold + delta;
    g_hi = g(hi);
  }
  const double bracket_lo = lo;
  const double bracket_hi = hi;

  double lambda0 = hi;
  double g0 = g_hi;
  for (int iter = 0; iter < 400; ++iter) {
    ++diag.iterations;
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    lambda0 = mid;
    g0 = gm;
    if (std::abs(gm) <= tol.secular) break;
    if (gm > 0.0) lo = mid; else hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) break;
  }
  diag.residual = g0;

  // L is convex, so the stationary point must not lose to the bracket ends.
  auto L = [&](double lambda) {
    const LambdaSolve s = detail::solve_at(pq, lambda, dir, tol);
    return s.finite() ? s.value() : std::numeric_limits<double>::infinity();
  };
  const double l0 = L(lambda0);
  const double slack = 1e-9 * (1.0 + std::abs(l0));
  if (l0 > L(bracket_lo) + slack || l0 > L(bracket_hi) + slack) {
    diag.golden_fallback = true;
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = bracket_lo;
    double b = bracket_hi;
    double c = b - ratio * (b - a);
    double e = a + ratio * (b - a);
    double fc = L(c);
    double fe = L(e);
    while (b - a > 1e-12 * (1.0 + std::abs(b)) && diag.iterations < 2000) {
      ++diag.iterations;
      if (fc < fe) {
        b = e; e = c; fe = fc; c = b - ratio * (b - a); fc = L(c);
      } else {
        a = c; c = e; fc = fe; e = a + ratio * (b - a); fe = L(e);
      }
    }
    lambda0 = 0.5 * (a + b);
    diag.residual = g(lambda0);
  }
  return {lambda0, diag};
}

/// General sphere-constrained game with a linear term.
///
/// MinMax: u0 in the u-projection of the saddle set of M(lambda0),
///         w0 = argmax over W of V(u0, .), a trust-region problem.
/// MaxMin: w0 in (-S11(lambda0)^+ (d2 - M12' M11^+ d1) + N(S11(lambda0))) on W,
///         u0 in -M11^+ (M12 w0 + d1) + N(M11).
/// value = lambda0/2 - 1/2 d'M(lambda0)^+ d.
///
/// std::nullopt: d1 is outside R(M11) and both problems are unbounded below.
inline std::optional<ConstrainedGameSolution> solve_linear_term(const PartitionedQuadratic& pq,
                                                                Direction dir,
                                                                const Tolerances& tol = {}) {
  detail::require_constrained_game(pq, tol);
  if (!detail::d1_in_range(pq, tol)) return std::nullopt;
  if (pq.is_homogeneous()) return solve_homogeneous(pq, dir, tol);

  const LambdaSearchResult search = lambda_search(pq, threshold(pq, dir, tol), dir, tol);
  const LambdaSolve at = detail::solve_at(pq, search.lambda0, dir, tol);
  if (!at.finite())
    throw NumericalError(std::string("solve_linear_term: ") + to_string(dir) +
                         " value is infinite at the certified lambda0");

  ConstrainedGameSolution sol{dir, at.value(), search.lambda0, {}, {}, search.diagnostics};
  if (dir == Direction::MinMax) {
    // Every u in the Lagrangian set is optimal; w0(u0) maximizes V(u0, .) on W.
    sol.u_set = at.optimum->u_set;
    const Vector linear = pq.m12().transpose() * sol.u() + pq.d2();
    sol.w_set = solve_trust_region(pq.m22(), linear, tol).w_star;
  } else {
    sol.w_set = detail::clip_to_sphere(at.optimum->w_set, tol);
    sol.u_set = detail::u_response(pq, sol.w(), tol);
  }
  return sol;
}

/// Dispatch on the linear term: closed form when d = 0, lambda search otherwise.
inline std::optional<ConstrainedGameSolution> solve_constrained(const PartitionedQuadratic& pq,
                                                                Direction dir,
                                                                const Tolerances& tol = {}) {
  return solve_linear_term(pq, dir, tol);
}

}  // namespace qgame
