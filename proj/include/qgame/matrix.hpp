#pragma once

// Dense linear-algebra primitives: SVD with an explicit numerical rank,
// pseudoinverse, range/null bases, PSD tests, Schur complements and the
// solution set of A x = b.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qgame {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input violates a mathematical precondition (symmetry, definiteness, finiteness).
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not certify its result.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tolerances used throughout the library. Every comparison against an exact
/// set-membership or sign condition goes through one of these.
struct Tolerances {
  double rank = 1e-12;             // sigma_i <= rank * sigma_max * max(rows, cols) counts as zero
  double range = 1e-9;             // ||U2' b|| <= range * max(1, ||b||)
  double symmetry = 1e-9;          // ||M - M'|| <= symmetry * ||M||
  double psd = 1e-9;               // lambda_min >= -psd * max(1, ||M||)
  double imag = 1e-8;              // |Im| <= imag * (1 + |Re|) counts as a real eigenvalue
  double boundary = 1e-8;          // lambda_P <= ||D|| + boundary * (1 + ||D||) is the boundary case
  double threshold_slack = 1e-9;   // lambda >= threshold - slack * (1 + threshold) counts as attained
  double hard_case = 1e-6;         // | ||(D - ||D|| I)^+ d|| - 1 | below this triggers both branches
  double secular = 1e-10;          // | ||w(lambda)|| - 1 | target of the lambda search
  double sphere = 1e-9;            // ||particular|| <= 1 + sphere for a sphere intersection
  double unit = 1e-7;              // | ||w|| - 1 | allowed for an isolated sphere point

  /// Every tolerance multiplied by `factor` (the rank threshold included).
  [[nodiscard]] Tolerances scaled(double factor) const {
    Tolerances t = *this;
    for (double* v : {&t.rank, &t.range, &t.symmetry, &t.psd, &t.imag, &t.boundary,
                      &t.threshold_slack, &t.hard_case, &t.secular, &t.sphere, &t.unit})
      *v *= factor;
    return t;
  }
};

inline void require_finite(const Matrix& a, const std::string& name) {
  if (!a.allFinite()) throw PreconditionError(name + ": non-finite entry");
}

inline void require_finite(const Vector& v, const std::string& name) {
  if (!v.allFinite()) throw PreconditionError(name + ": non-finite entry");
}

/// Row-major construction with the length check the raw data needs.
inline Matrix make_matrix(Index rows, Index cols, const std::vector<double>& entries) {
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != entries.size())
    throw DimensionError("matrix: " + std::to_string(entries.size()) + " entries for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = entries[static_cast<std::size_t>(i * cols + j)];
  require_finite(m, "matrix");
  return m;
}

/// A = [U1 U2] diag(Sigma_r, 0) [V1 V2]'. Columns of U1, U2, V1, V2 are bases of
/// R(A), N(A'), R(A'), N(A). A zero matrix has rank 0 with empty U1/V1; a square
/// invertible matrix has empty U2/V2.
struct SvdFactors {
  Matrix u1, u2, v1, v2;
  Vector sigma;  // retained singular values, descending
  Index rank = 0;

  [[nodiscard]] Matrix reconstruct() const { return u1 * sigma.asDiagonal() * v1.transpose(); }
};

inline SvdFactors svd(const Matrix& a, const Tolerances& tol = {}) {
  require_finite(a, "svd");
  const Index m = a.rows();
  const Index n = a.cols();
  SvdFactors f;
  if (m == 0 || n == 0) {
    f.u1 = Matrix(m, 0);
    f.v1 = Matrix(n, 0);
    f.u2 = Matrix::Identity(m, m);
    f.v2 = Matrix::Identity(n, n);
    f.sigma = Vector(0);
    return f;
  }
  const Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& s = solver.singularValues();
  const double cutoff = tol.rank * s(0) * static_cast<double>(std::max(m, n));
  Index r = 0;
  while (r < s.size() && s(r) > cutoff) ++r;
  f.rank = r;
  f.sigma = s.head(r);
  f.u1 = solver.matrixU().leftCols(r);
  f.u2 = solver.matrixU().rightCols(m - r);
  f.v1 = solver.matrixV().leftCols(r);
  f.v2 = solver.matrixV().rightCols(n - r);
  return f;
}

/// A^+ = V1 Sigma_r^{-1} U1'.
inline Matrix pseudoinverse(const SvdFactors& f) {
  return f.v1 * f.sigma.cwiseInverse().asDiagonal() * f.u1.transpose();
}

inline Matrix pseudoinverse(const Matrix& a, const Tolerances& tol = {}) {
  return pseudoinverse(svd(a, tol));
}

/// Largest singular value; 0 for the zero (or empty) matrix.
inline double spectral_norm(const Matrix& a) {
  require_finite(a, "spectral_norm");
  if (a.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(a).singularValues()(0);
}

/// Orthonormal basis of N(A).
inline Matrix null_space(const Matrix& a, const Tolerances& tol = {}) { return svd(a, tol).v2; }

/// Orthonormal basis of R(A).
inline Matrix range_space(const Matrix& a, const Tolerances& tol = {}) { return svd(a, tol).u1; }

/// b in R(A), tested as ||U2' b|| <= tol.range * max(1, ||b||).
inline bool in_range(const SvdFactors& f, const Vector& b, const Tolerances& tol = {}) {
  if (f.u2.cols() == 0) return true;
  return (f.u2.transpose() * b).norm() <= tol.range * std::max(1.0, b.norm());
}

/// R(B) subset of R(A), tested as ||U2' B|| <= tol.range * ||B||.
inline bool range_contains(const SvdFactors& f, const Matrix& b, const Tolerances& tol = {}) {
  if (f.u2.cols() == 0 || b.size() == 0) return true;
  const Matrix residual = f.u2.transpose() * b;
  return spectral_norm(residual) <= tol.range * spectral_norm(b);
}

inline void require_square(const Matrix& m, const std::string& name) {
  if (m.rows() != m.cols())
    throw DimensionError(name + ": expected a square matrix, got " + std::to_string(m.rows()) +
                         "x" + std::to_string(m.cols()));
}

inline double asymmetry(const Matrix& m) { return spectral_norm(m - m.transpose()); }

/// (M + M')/2, provided ||M - M'|| <= tol.symmetry * ||M||; otherwise rejected.
inline Matrix symmetrized(const Matrix& m, const std::string& name, const Tolerances& tol = {}) {
  require_square(m, name);
  require_finite(m, name);
  if (asymmetry(m) > tol.symmetry * spectral_norm(m))
    throw PreconditionError(name + ": matrix is not symmetric");
  return 0.5 * (m + m.transpose());
}

inline bool is_psd(const Matrix& m, const Tolerances& tol = {}) {
  require_square(m, "is_psd");
  require_finite(m, "is_psd");
  if (m.size() == 0) return true;
  if (asymmetry(m) > tol.symmetry * spectral_norm(m)) return false;
  const Matrix sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev(0) >= -tol.psd * scale;
}

inline bool is_nsd(const Matrix& m, const Tolerances& tol = {}) { return is_psd(-m, tol); }

/// Blocks of M = [[M11, M12], [M12', M22]].
inline Matrix assemble(const Matrix& m11, const Matrix& m12, const Matrix& m22) {
  const Index m = m11.rows();
  const Index n = m22.rows();
  if (m11.cols() != m || m22.cols() != n || m12.rows() != m || m12.cols() != n)
    throw DimensionError("assemble: blocks " + std::to_string(m11.rows()) + "x" +
                         std::to_string(m11.cols()) + ", " + std::to_string(m12.rows()) + "x" +
                         std::to_string(m12.cols()) + ", " + std::to_string(m22.rows()) + "x" +
                         std::to_string(m22.cols()) + " do not partition a square matrix");
  Matrix full(m + n, m + n);
  full.topLeftCorner(m, m) = m11;
  full.topRightCorner(m, n) = m12;
  full.bottomLeftCorner(n, m) = m12.transpose();
  full.bottomRightCorner(n, n) = m22;
  return full;
}

/// Schur complements with the parameter shift on M22:
///   schur11 = (M22 - lambda I) - M12' M11^+ M12
///   schur22 = M11 - M12 (M22 - lambda I)^+ M12'
struct SchurPair {
  Matrix schur11;
  Matrix schur22;
};

/// Symmetric part of A - B with cancellation noise removed: eigenvalues within
/// tol.rank * n * (||A|| + ||B||) of zero become exact zeros.
inline Matrix cancelled_difference(const Matrix& a, const Matrix& b, const Tolerances& tol = {}) {
  Matrix diff = a - b;
  diff = 0.5 * (diff + diff.transpose());
  if (diff.size() == 0) return diff;
  const double noise = tol.rank * static_cast<double>(diff.rows()) * (spectral_norm(a) + spectral_norm(b));
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(diff);
  Vector values = eig.eigenvalues();
  bool snapped = false;
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) != 0.0 && std::abs(values(i)) <= noise) {
      values(i) = 0.0;
      snapped = true;
    }
  }
  if (!snapped) return diff;
  if (values.isZero(0.0)) return Matrix::Zero(diff.rows(), diff.cols());
  diff = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (diff + diff.transpose());
}

inline SchurPair schur_complements(const Matrix& m11, const Matrix& m12, const Matrix& m22,
                                   double lambda = 0.0, const Tolerances& tol = {}) {
  (void)assemble(m11, m12, m22);  // dimension check
  const Matrix eye = Matrix::Identity(m22.rows(), m22.cols());
  const Matrix shifted = m22 - lambda * eye;
  const Matrix s11 =
      cancelled_difference(m22, m12.transpose() * pseudoinverse(m11, tol) * m12, tol) - lambda * eye;
  Matrix s22 = m11 - m12 * pseudoinverse(shifted, tol) * m12.transpose();
  return {s11, 0.5 * (s22 + s22.transpose())};
}

/// M >= 0 iff M11 >= 0, M22 - M12' M11^+ M12 >= 0 and R(M12) subset of R(M11).
inline bool is_psd_partitioned(const Matrix& m11, const Matrix& m12, const Matrix& m22,
                               const Tolerances& tol = {}) {
  (void)assemble(m11, m12, m22);
  const Matrix a = symmetrized(m11, "M11", tol);
  const Matrix c = symmetrized(m22, "M22", tol);
  if (!is_psd(a, tol)) return false;
  const SvdFactors f = svd(a, tol);
  if (!range_contains(f, m12, tol)) return false;
  const Matrix schur = c - m12.transpose() * pseudoinverse(f) * m12;
  return is_psd(0.5 * (schur + schur.transpose()), tol);
}

/// x in particular + span(basis). `basis` has orthonormal columns and `particular`
/// is orthogonal to them (the minimum-norm member of the set).
struct AffineSolutionSet {
  Vector particular;
  Matrix basis;

  [[nodiscard]] Index ambient_dimension() const { return particular.size(); }
  [[nodiscard]] Index free_dimension() const { return basis.cols(); }
  [[nodiscard]] bool is_singleton() const { return basis.cols() == 0; }

  [[nodiscard]] Vector point(const Vector& coefficients) const {
    if (coefficients.size() != basis.cols())
      throw DimensionError("AffineSolutionSet::point: coefficient count mismatch");
    return particular + basis * coefficients;
  }

  /// Distance from x to the set.
  [[nodiscard]] double distance(const Vector& x) const {
    const Vector offset = x - particular;
    return (offset - basis * (basis.transpose() * offset)).norm();
  }
};

/// Orthonormalize `directions`, then make `point` orthogonal to them.
inline AffineSolutionSet make_affine_set(const Vector& point, const Matrix& directions,
                                         const Tolerances& tol = {}) {
  AffineSolutionSet s;
  s.basis = directions.cols() == 0 ? Matrix(point.size(), 0) : range_space(directions, tol);
  s.particular = point - s.basis * (s.basis.transpose() * point);
  return s;
}

/// Coordinates [offset, offset + count) of every member of `set`.
inline AffineSolutionSet project(const AffineSolutionSet& set, Index offset, Index count,
                                 const Tolerances& tol = {}) {
  return make_affine_set(set.particular.segment(offset, count),
                         set.basis.middleRows(offset, count), tol);
}

enum class LinearStatus { Consistent, LeastSquares };

/// A^+ b + N(A). For b outside R(A) the same set minimizes ||A x - b|| and
/// residual_norm = ||U2' b||.
struct LinearSolveResult {
  LinearStatus status;
  AffineSolutionSet solutions;
  double residual_norm;

  [[nodiscard]] bool consistent() const { return status == LinearStatus::Consistent; }
};

inline LinearSolveResult solve_linear(const SvdFactors& f, const Vector& b,
                                      const Tolerances& tol = {}) {
  const Vector x = pseudoinverse(f) * b;
  const double residual = f.u2.cols() == 0 ? 0.0 : (f.u2.transpose() * b).norm();
  const bool ok = b.isZero(0.0) || in_range(f, b, tol);
  return {ok ? LinearStatus::Consistent : LinearStatus::LeastSquares, {x, f.v2}, residual};
}

inline LinearSolveResult solve_linear(const Matrix& a, const Vector& b,
                                      const Tolerances& tol = {}) {
  if (a.rows() != b.size())
    throw DimensionError("solve_linear: A has " + std::to_string(a.rows()) + " rows, b has " +
                         std::to_string(b.size()) + " entries");
  require_finite(b, "solve_linear b");
  return solve_linear(svd(a, tol), b, tol);
}

}  // namespace qgame
