#pragma once

// Single-player quadratic forms V(u) = 1/2 u'Du + u'd + c.

#include <optional>

#include "qgame/matrix.hpp"

namespace qgame {

class QuadraticForm {
 public:
  QuadraticForm(const Matrix& D, const Vector& d, double c = 0.0, const Tolerances& tol = {})
      : D_(symmetrized(D, "QuadraticForm D", tol)), d_(d), c_(c) {
    if (d.size() != D.rows())
      throw DimensionError("QuadraticForm: D is " + std::to_string(D.rows()) + "x" +
                           std::to_string(D.cols()) + " but d has " + std::to_string(d.size()) +
                           " entries");
    require_finite(d_, "QuadraticForm d");
    if (!std::isfinite(c_)) throw PreconditionError("QuadraticForm c: non-finite");
  }

  [[nodiscard]] const Matrix& D() const { return D_; }
  [[nodiscard]] const Vector& d() const { return d_; }
  [[nodiscard]] double c() const { return c_; }
  [[nodiscard]] Index dimension() const { return d_.size(); }

  [[nodiscard]] double evaluate(const Vector& u) const {
    check(u);
    return 0.5 * u.dot(D_ * u) + u.dot(d_) + c_;
  }

  [[nodiscard]] Vector gradient(const Vector& u) const {
    check(u);
    return D_ * u + d_;
  }

  [[nodiscard]] QuadraticForm negated() const { return {-D_, -d_, -c_}; }

 private:
  void check(const Vector& u) const {
    if (u.size() != d_.size())
      throw DimensionError("QuadraticForm: point has " + std::to_string(u.size()) +
                           " entries, expected " + std::to_string(d_.size()));
  }

  Matrix D_;
  Vector d_;
  double c_;
};

inline double evaluate(const QuadraticForm& q, const Vector& u) { return q.evaluate(u); }

/// Convex iff D >= 0.
inline bool is_convex(const QuadraticForm& q, const Tolerances& tol = {}) {
  return is_psd(q.D(), tol);
}

/// Optimizer set and optimal value of a bounded quadratic problem.
struct QuadMinResult {
  AffineSolutionSet minimizers;
  double value;
};

/// min_u V(u) for D >= 0. Bounded iff d in R(D); then the minimizers are
/// -D^+ d + N(D) with value -1/2 d'D^+ d + c. std::nullopt means unbounded below.
inline std::optional<QuadMinResult> minimize(const QuadraticForm& q, const Tolerances& tol = {}) {
  if (!is_convex(q, tol)) throw PreconditionError("minimize: D is not positive semidefinite");
  const LinearSolveResult stationary = solve_linear(q.D(), -q.d(), tol);
  if (!stationary.consistent()) return std::nullopt;
  // -1/2 d'D^+ d = 1/2 d'x with x = -D^+ d.
  const double value = 0.5 * q.d().dot(stationary.solutions.particular) + q.c();
  return QuadMinResult{stationary.solutions, value};
}

/// max_u V(u) for D <= 0, by negation. std::nullopt means unbounded above.
inline std::optional<QuadMinResult> maximize(const QuadraticForm& q, const Tolerances& tol = {}) {
  if (!is_nsd(q.D(), tol)) throw PreconditionError("maximize: D is not negative semidefinite");
  auto result = minimize(q.negated(), tol);
  if (result) result->value = -result->value;
  return result;
}

}  // namespace qgame
