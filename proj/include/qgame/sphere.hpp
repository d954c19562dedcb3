#pragma once

// Maximization of a convex quadratic V(w) = 1/2 w'Dw + w'd over the unit sphere
// W = {w : w'w = 1}, through the Lagrangian L(w, lambda) = V(w) - lambda/2 (w'w - 1).
//
// The optimal multiplier lambda_P is the largest real eigenvalue of the companion
// matrix P = [[D, I], [dd', D]]. It always satisfies lambda_P >= ||D||. Either
// lambda_P = ||D|| (boundary case: d in R(D - ||D|| I) and ||(D - ||D|| I)^+ d|| <= 1),
// or lambda_P > ||D|| is the unique root of ||(D - lambda I)^{-1} d|| = 1 (interior case).

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qgame/matrix.hpp"

namespace qgame {

/// (particular + span(basis)) intersected with the unit sphere. The basis is
/// orthonormal, particular is orthogonal to it, and every point
/// particular + radius_residual * b with b a unit vector in span(basis) is on W.
struct SphereSolutionSet {
  Vector particular;
  Matrix basis;
  double radius_residual = 0.0;

  [[nodiscard]] bool is_singleton() const { return basis.cols() == 0 || radius_residual == 0.0; }

  /// Deterministic representative: positive coefficient on the first free direction.
  [[nodiscard]] Vector representative() const {
    Vector w = particular;
    if (basis.cols() > 0) w += radius_residual * basis.col(0);
    return w / w.norm();
  }

  /// The member reached by moving along the unit direction basis * coefficients.
  [[nodiscard]] Vector point(const Vector& coefficients) const {
    if (coefficients.size() != basis.cols())
      throw DimensionError("SphereSolutionSet::point: coefficient count mismatch");
    const double norm = coefficients.norm();
    if (norm == 0.0) return representative();
    return particular + radius_residual * (basis * coefficients) / norm;
  }
};

/// Intersect an affine set with the unit sphere.
/// Throws NumericalError when the intersection is empty.
inline SphereSolutionSet sphere_intersect(const AffineSolutionSet& set, const Tolerances& tol = {}) {
  SphereSolutionSet s;
  s.basis = set.basis;
  s.particular = set.particular - set.basis * (set.basis.transpose() * set.particular);
  const double norm = s.particular.norm();
  if (norm > 1.0 + tol.sphere)
    throw NumericalError("sphere_intersect: particular point has norm " + std::to_string(norm) +
                         " > 1, the intersection is empty");
  if (s.basis.cols() == 0) {
    if (std::abs(norm - 1.0) > tol.unit)
      throw NumericalError("sphere_intersect: isolated point has norm " + std::to_string(norm) +
                           ", not on the unit sphere");
    s.radius_residual = 0.0;
    return s;
  }
  s.radius_residual = std::sqrt(std::max(0.0, 1.0 - norm * norm));
  return s;
}

/// P = [[D, I], [dd', D]].
inline Matrix companion_matrix(const Matrix& D, const Vector& d, const Tolerances& tol = {}) {
  const Matrix sym = symmetrized(D, "companion_matrix D", tol);
  if (d.size() != sym.rows()) throw DimensionError("companion_matrix: d does not match D");
  require_finite(d, "companion_matrix d");
  if (!is_psd(sym, tol)) throw PreconditionError("companion_matrix: D is not PSD");
  const Index n = sym.rows();
  Matrix p(2 * n, 2 * n);
  p << sym, Matrix::Identity(n, n), d * d.transpose(), sym;
  return p;
}

namespace detail {

// Spectral data of D used by the secular equation ||(D - lambda I)^{-1} d|| = 1.
struct SecularData {
  Matrix q;      // eigenvectors of D
  Vector mu;     // eigenvalues of D, ascending
  Vector y;      // Q'd
  double top;    // ||D|| = mu.maxCoeff() for D >= 0

  explicit SecularData(const Matrix& D, const Vector& d) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(D);
    q = eig.eigenvectors();
    mu = eig.eigenvalues();
    y = q.transpose() * d;
    top = mu.size() > 0 ? std::max(0.0, mu.maxCoeff()) : 0.0;
  }

  // -(D - lambda I)^{-1} d for lambda > top.
  [[nodiscard]] Vector response(double lambda) const {
    return q * (y.array() / (lambda - mu.array())).matrix();
  }

  // ||(D - lambda I)^{-1} d|| for lambda > top.
  [[nodiscard]] double response_norm(double lambda) const {
    return (y.array() / (lambda - mu.array())).matrix().norm();
  }
};

// Root of h(lambda) = 1/||(D - lambda I)^{-1} d|| - 1 on (top, infinity), or top
// when h >= 0 just above top (no interior root). h is increasing and concave
// there, so Newton from the left of the root climbs monotonically; steps leaving
// the bracket fall back to bisection.
inline double secular_root(const SecularData& s, double start) {
  const double dnorm = s.y.norm();
  if (dnorm == 0.0) return s.top;
  const double eps = std::numeric_limits<double>::epsilon();
  double lo = s.top;
  double hi = s.top + dnorm;  // ||(D - lambda I)^{-1} d|| <= ||d|| / (lambda - top)
  const double near = s.top + 64.0 * eps * (1.0 + s.top);
  if (s.response_norm(near) <= 1.0) return s.top;
  lo = near;

  double x = (start > lo && start < hi) ? start : 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const Vector gap = (x - s.mu.array()).matrix();
    const double g = (s.y.array() / gap.array()).matrix().norm();
    const double h = 1.0 / g - 1.0;
    if (h < 0.0) lo = x; else hi = x;
    if (h == 0.0 || hi - lo <= 4.0 * eps * hi) return x;
    // d(1/g)/dlambda = sum y^2 / (lambda - mu)^3 / g^3
    const double dh = (s.y.array().square() / gap.array().cube()).sum() / (g * g * g);
    double next = x - h / dh;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 2.0 * eps * std::abs(x)) return next;
    x = next;
  }
  return x;
}

}  // namespace detail

/// How lambda_P was obtained: the raw companion-matrix eigenvalue and the
/// certified value after refinement on the secular equation.
struct LambdaPCertificate {
  double value;           // lambda_P
  double raw_eigenvalue;  // largest real eigenvalue reported by the eigensolver (-inf if none)
  double norm_d_matrix;   // ||D||
};

inline LambdaPCertificate lambda_p_certificate(const Matrix& D, const Vector& d,
                                               const Tolerances& tol = {}) {
  const Matrix p = companion_matrix(D, d, tol);
  const Matrix sym = 0.5 * (D + D.transpose());
  if (sym.rows() == 0) throw PreconditionError("lambda_p: empty D");
  const Eigen::EigenSolver<Matrix> eig(p, false);
  if (eig.info() != Eigen::Success) throw NumericalError("lambda_p: eigensolver failed on P");

  double raw = -std::numeric_limits<double>::infinity();
  for (const auto& ev : eig.eigenvalues())
    if (std::abs(ev.imag()) <= tol.imag * (1.0 + std::abs(ev.real()))) raw = std::max(raw, ev.real());

  const detail::SecularData s(sym, d);
  const double norm = spectral_norm(sym);
  // lambda_P >= ||D||; a defective eigenvalue at ||D|| can split slightly below it.
  const double start = std::max(raw, norm);
  const double value = detail::secular_root(s, start);
  return {std::max(value, norm), raw, norm};
}

/// Largest real eigenvalue of the companion matrix P.
inline double lambda_p(const Matrix& D, const Vector& d, const Tolerances& tol = {}) {
  return lambda_p_certificate(D, d, tol).value;
}

/// Conditions characterizing lambda_P = ||D||:
/// (i) d in R(D - ||D|| I) and (ii) ||(D - ||D|| I)^+ d|| <= 1.
struct BoundaryConditions {
  bool range_holds;     // (i)
  bool norm_holds;      // (ii)
  double pinv_norm;     // ||(D - ||D|| I)^+ d||

  [[nodiscard]] bool both() const { return range_holds && norm_holds; }
};

inline BoundaryConditions boundary_conditions(const Matrix& D, const Vector& d,
                                              const Tolerances& tol = {}) {
  const Matrix sym = symmetrized(D, "boundary_conditions D", tol);
  if (d.size() != sym.rows()) throw DimensionError("boundary_conditions: d does not match D");
  if (!is_psd(sym, tol)) throw PreconditionError("boundary_conditions: D is not PSD");
  const Matrix shifted = sym - spectral_norm(sym) * Matrix::Identity(sym.rows(), sym.cols());
  const SvdFactors f = svd(shifted, tol);
  const bool range = d.isZero(0.0) || in_range(f, d, tol);
  const double pinv_norm = (pseudoinverse(f) * d).norm();
  return {range, pinv_norm <= 1.0, pinv_norm};
}

enum class TrustRegionCase { Boundary, Interior };

struct TrustRegionSolution {
  double value;
  double lambda_p;
  TrustRegionCase region;
  SphereSolutionSet w_star;
  double raw_eigenvalue;  // companion-matrix eigenvalue before refinement
  bool hard_case = false; // both branches were evaluated near ||(D - ||D|| I)^+ d|| = 1
};

namespace detail {

struct Branch {
  double lambda;
  TrustRegionCase region;
  SphereSolutionSet set;
  double value;  // -1/2 d'(D - lambda I)^+ d + lambda/2
};

// Boundary: (-(D - ||D|| I)^+ d + N(D - ||D|| I)) on W.
// Interior: the single point -(D - lambda I)^{-1} d, which lies on W at lambda_P.
inline std::optional<Branch> branch_at(const Matrix& D, const Vector& d, const SecularData& s,
                                       double lambda, TrustRegionCase region,
                                       const Tolerances& tol) {
  AffineSolutionSet set;
  double value = 0.5 * lambda;
  if (region == TrustRegionCase::Boundary) {
    const Matrix shifted = D - lambda * Matrix::Identity(D.rows(), D.cols());
    set = solve_linear(shifted, -d, tol).solutions;
    value += 0.5 * d.dot(set.particular);
  } else {
    set = {s.response(lambda), Matrix(D.rows(), 0)};
    value += 0.5 * (s.y.array().square() / (lambda - s.mu.array())).sum();
  }
  try {
    return Branch{lambda, region, sphere_intersect(set, tol), value};
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// max over ||w|| = 1 of 1/2 w'Dw + w'd for D >= 0.
/// value = -1/2 d'(D - lambda_P I)^+ d + lambda_P / 2.
inline TrustRegionSolution solve_trust_region(const Matrix& D, const Vector& d,
                                              const Tolerances& tol = {}) {
  const LambdaPCertificate cert = lambda_p_certificate(D, d, tol);
  const Matrix sym = 0.5 * (D + D.transpose());
  const double norm = cert.norm_d_matrix;
  const double edge = norm + tol.boundary * (1.0 + norm);

  const detail::SecularData s(sym, d);
  std::vector<detail::Branch> candidates;
  bool hard = false;
  const BoundaryConditions bc = boundary_conditions(sym, d, tol);
  if (bc.range_holds && std::abs(bc.pinv_norm - 1.0) < tol.hard_case) {
    hard = true;
    if (auto b = detail::branch_at(sym, d, s, norm, TrustRegionCase::Boundary, tol))
      candidates.push_back(*b);
    const double root = detail::secular_root(s, norm);
    if (root > norm)
      if (auto b = detail::branch_at(sym, d, s, root, TrustRegionCase::Interior, tol))
        candidates.push_back(*b);
  } else {
    const TrustRegionCase region =
        cert.value <= edge ? TrustRegionCase::Boundary : TrustRegionCase::Interior;
    const double lambda = region == TrustRegionCase::Boundary ? norm : cert.value;
    if (auto b = detail::branch_at(sym, d, s, lambda, region, tol)) candidates.push_back(*b);
  }
  if (candidates.empty())
    throw NumericalError("solve_trust_region: no sphere point satisfies the optimality conditions");

  auto objective = [&](const Vector& w) { return 0.5 * w.dot(sym * w) + w.dot(d); };
  const detail::Branch* best = &candidates.front();
  for (const auto& c : candidates)
    if (objective(c.set.representative()) > objective(best->set.representative())) best = &c;

  return {best->value, best->lambda, best->region, best->set, cert.raw_eigenvalue, hard};
}

/// One point of lambda -> L(w0(lambda), lambda), the dual function.
struct DualCurvePoint {
  double lambda;
  bool finite;
  double value;                 // meaningful only when finite
  std::optional<double> slope;  // dL/dlambda (right derivative at ||D||)
};

/// The dual function on a uniform grid. For lambda > ||D||:
///   L = -1/2 d'(D - lambda I)^{-1} d + lambda/2,  dL/dlambda = 1/2 (1 - d'(D - lambda I)^{-2} d).
/// At lambda = ||D|| it is finite iff d in R(D - ||D|| I); below ||D|| it is +inf.
inline std::vector<DualCurvePoint> dual_curve(const Matrix& D, const Vector& d, double lambda_min,
                                              double lambda_max, std::size_t steps,
                                              const Tolerances& tol = {}) {
  if (!(lambda_min < lambda_max)) throw std::invalid_argument("dual_curve: empty lambda range");
  if (steps < 2) throw std::invalid_argument("dual_curve: at least 2 steps are required");
  const Matrix sym = symmetrized(D, "dual_curve D", tol);
  if (!is_psd(sym, tol)) throw PreconditionError("dual_curve: D is not PSD");
  if (d.size() != sym.rows()) throw DimensionError("dual_curve: d does not match D");
  const detail::SecularData s(sym, d);
  const double norm = spectral_norm(sym);
  const double slack = tol.threshold_slack * (1.0 + norm);
  const BoundaryConditions bc = boundary_conditions(sym, d, tol);
  const Matrix at_norm = pseudoinverse(sym - norm * Matrix::Identity(sym.rows(), sym.cols()), tol);

  std::vector<DualCurvePoint> curve;
  curve.reserve(steps);
  for (std::size_t i = 0; i < steps; ++i) {
    const double lambda =
        i + 1 == steps ? lambda_max
                       : lambda_min + (lambda_max - lambda_min) * static_cast<double>(i) /
                                          static_cast<double>(steps - 1);
    if (lambda < norm - slack) {
      curve.push_back({lambda, false, 0.0, std::nullopt});
    } else if (lambda <= norm + slack) {
      if (!bc.range_holds) {
        curve.push_back({lambda, false, 0.0, std::nullopt});
        continue;
      }
      const Vector w = at_norm * d;
      curve.push_back({lambda, true, -0.5 * d.dot(w) + 0.5 * norm, 0.5 * (1.0 - w.squaredNorm())});
    } else {
      const Eigen::ArrayXd gap = lambda - s.mu.array();
      const double quad = (s.y.array().square() / gap).sum();           // -d'(D - lambda I)^{-1} d
      const double quad2 = (s.y.array().square() / gap.square()).sum();  // d'(D - lambda I)^{-2} d
      curve.push_back({lambda, true, 0.5 * quad + 0.5 * lambda, 0.5 * (1.0 - quad2)});
    }
  }
  return curve;
}

}  // namespace qgame
