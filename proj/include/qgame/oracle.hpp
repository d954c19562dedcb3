#pragma once

// Brute-force reference values for desk-scale instances (dimensions <= 4 for the
// sphere sampler, <= 2 per player for the nested searches). They are probabilistic
// or grid-limited bounds, not certificates. Nothing here calls the SVD-based
// solvers: least-squares steps use Eigen's complete orthogonal decomposition.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/QR>

#include "qgame/game.hpp"
#include "qgame/minmax.hpp"
#include "qgame/quadratic.hpp"
#include "qgame/random.hpp"

namespace qgame {

struct OracleConfig {
  std::uint64_t seed = 20240601;
  std::size_t samples = 100000;
  std::size_t grid_points = 2000;
  double box_radius = 0.0;  // 0 picks 2 (1 + ||M^+ d||) and doubles while the value moves
  double fd_step = 1e-5;

  void validate() const {
    if (samples < 1) throw std::invalid_argument("oracle: samples must be at least 1");
    if (grid_points < 2) throw std::invalid_argument("oracle: grid_points must be at least 2");
    if (!(fd_step > 0.0) || !std::isfinite(fd_step))
      throw std::invalid_argument("oracle: fd_step must be positive");
    if (!(box_radius >= 0.0) || !std::isfinite(box_radius))
      throw std::invalid_argument("oracle: box_radius must be non-negative");
  }
};

inline constexpr Index kSamplerMaxDimension = 4;
inline constexpr Index kGridMaxDimension = 2;

// ---------------------------------------------------------------------------
// Finite differences

/// Central differences, one coordinate at a time.
template <class F>
Vector fd_gradient(F&& f, const Vector& x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_gradient: step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + step;
    const double up = f(probe);
    probe(i) = x(i) - step;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * step);
  }
  return g;
}

template <class F>
double fd_derivative(F&& f, double x, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fd_derivative: step must be positive");
  return (f(x + step) - f(x - step)) / (2.0 * step);
}

// ---------------------------------------------------------------------------
// Sphere sampling

struct SphereMaxResult {
  double value;
  Vector argmax;
};

/// Best of cfg.samples uniform unit vectors, then 100 projected-gradient ascent
/// steps of length 1/(||D|| + 1) that are kept only when they improve.
inline SphereMaxResult sphere_max(const QuadraticForm& q, const OracleConfig& cfg = {}) {
  cfg.validate();
  const Index n = q.dimension();
  if (n < 1) throw DimensionError("sphere_max: dimension must be at least 1");
  if (n > kSamplerMaxDimension)
    throw DimensionError("sphere_max: dimension " + std::to_string(n) + " exceeds the oracle limit " +
                         std::to_string(kSamplerMaxDimension));
  CounterRng rng(cfg.seed);
  Vector best = rng.unit_vector(n);
  double best_value = q.evaluate(best);
  for (std::size_t k = 1; k < cfg.samples; ++k) {
    const Vector w = rng.unit_vector(n);
    const double v = q.evaluate(w);
    if (v > best_value) {
      best_value = v;
      best = w;
    }
  }
  const double step = 1.0 / (q.D().cwiseAbs().rowwise().sum().maxCoeff() + 1.0);
  for (int iter = 0; iter < 100; ++iter) {
    Vector next = best + step * q.gradient(best);
    const double norm = next.norm();
    if (norm == 0.0) break;
    next /= norm;
    const double v = q.evaluate(next);
    if (v <= best_value) break;
    best_value = v;
    best = next;
  }
  return {best_value, best};
}

// ---------------------------------------------------------------------------
// Nested one-dimensional searches

namespace detail {

using Point2 = std::array<double, 2>;

// V(u, w) for m, n <= 2 without heap traffic.
class SmallGame {
 public:
  SmallGame(const PartitionedQuadratic& pq, double lambda = 0.0) : m_(pq.m()), n_(pq.n()) {
    const Matrix full = pq.assembled(lambda);
    const Vector d = pq.linear_term();
    for (Index i = 0; i < m_ + n_; ++i) {
      lin_[i] = d(i);
      for (Index j = 0; j < m_ + n_; ++j) mat_[i * 4 + j] = full(i, j);
    }
    shift_ = 0.5 * lambda;
  }

  [[nodiscard]] Index m() const { return m_; }
  [[nodiscard]] Index n() const { return n_; }

  [[nodiscard]] double operator()(const Point2& u, const Point2& w) const {
    std::array<double, 4> z{};
    for (Index i = 0; i < m_; ++i) z[i] = u[i];
    for (Index j = 0; j < n_; ++j) z[m_ + j] = w[j];
    const Index k = m_ + n_;
    double total = shift_;
    for (Index i = 0; i < k; ++i) {
      double row = 0.0;
      for (Index j = 0; j < k; ++j) row += mat_[i * 4 + j] * z[j];
      total += z[i] * (0.5 * row + lin_[i]);
    }
    return total;
  }

 private:
  Index m_;
  Index n_;
  std::array<double, 16> mat_{};
  std::array<double, 4> lin_{};
  double shift_ = 0.0;
};

struct Search1d {
  double value;
  double x;
};

// Minimum of a unimodal function on [lo, hi]: a scan of `scan` points, then
// golden-section search on the two cells around the best scan point.
template <class F>
Search1d golden_min(F&& f, double lo, double hi, std::size_t scan, int iterations = 60) {
  scan = std::max<std::size_t>(scan, 3);
  const double h = (hi - lo) / static_cast<double>(scan - 1);
  std::size_t best = 0;
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scan; ++i) {
    const double v = f(lo + h * static_cast<double>(i));
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  Search1d out{best_value, lo + h * static_cast<double>(best)};
  double a = lo + h * static_cast<double>(best == 0 ? 0 : best - 1);
  double b = lo + h * static_cast<double>(std::min(best + 1, scan - 1));
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - ratio * (b - a);
  double e = a + ratio * (b - a);
  double fc = f(c);
  double fe = f(e);
  for (int it = 0; it < iterations && b - a > 0.0; ++it) {
    if (fc < fe) {
      b = e; e = c; fe = fc; c = b - ratio * (b - a); fc = f(c);
    } else {
      a = c; c = e; fc = fe; e = a + ratio * (b - a); fe = f(e);
    }
  }
  if (fc < out.value) out = {fc, c};
  if (fe < out.value) out = {fe, e};
  return out;
}

struct SearchBox {
  double value;
  Point2 x;
};

// min over the box [-radius, radius]^k of a convex f, k <= 2. For k = 2 the
// partial minimum over the second coordinate is convex in the first, so the
// nested one-dimensional searches stay unimodal.
template <class F>
SearchBox convex_box_min(F&& f, Index k, double radius, std::size_t scan) {
  if (k == 0) return {f(Point2{0.0, 0.0}), {0.0, 0.0}};
  if (k == 1) {
    const Search1d r = golden_min([&](double x) { return f(Point2{x, 0.0}); }, -radius, radius, scan);
    return {r.value, {r.x, 0.0}};
  }
  const std::size_t inner_scan = std::max<std::size_t>(9, scan / 32);
  auto partial = [&](double x0) {
    return golden_min([&](double x1) { return f(Point2{x0, x1}); }, -radius, radius, inner_scan, 45);
  };
  const Search1d outer =
      golden_min([&](double x0) { return partial(x0).value; }, -radius, radius, inner_scan, 45);
  const Search1d inner = partial(outer.x);
  return {inner.value, {outer.x, inner.x}};
}

// max over the unit sphere in R^n, n <= 2, of f. n = 1 is exact (w = +-1); n = 2
// scans `scan` angles and polishes the best cell by golden section.
template <class F>
SearchBox sphere_scan_max(F&& f, Index n, std::size_t scan) {
  if (n == 1) {
    const double up = f(Point2{1.0, 0.0});
    const double down = f(Point2{-1.0, 0.0});
    return up >= down ? SearchBox{up, {1.0, 0.0}} : SearchBox{down, {-1.0, 0.0}};
  }
  const double two_pi = 2.0 * std::numbers::pi;
  auto on_circle = [&](double t) { return -f(Point2{std::cos(t), std::sin(t)}); };
  const Search1d r = golden_min(on_circle, 0.0, two_pi, scan, 50);
  return {-r.value, {std::cos(r.x), std::sin(r.x)}};
}

inline double pinv_norm_cod(const Matrix& a, const Vector& b) {
  if (a.size() == 0) return 0.0;
  return Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(b).norm();
}

// Initial box radius: cfg.box_radius when set, else 2 (1 + ||M(lambda)^+ d||).
inline double initial_radius(const PartitionedQuadratic& pq, double lambda, const OracleConfig& cfg) {
  if (cfg.box_radius > 0.0) return cfg.box_radius;
  return 2.0 * (1.0 + pinv_norm_cod(pq.assembled(lambda), pq.linear_term()));
}

// Doubles the radius until the value stops moving (at most 20 doublings).
template <class Solve>
double with_growing_box(double radius, bool fixed, Solve&& solve) {
  double value = solve(radius);
  if (fixed) return value;
  for (int k = 0; k < 20; ++k) {
    radius *= 2.0;
    const double next = solve(radius);
    const bool settled = std::abs(next - value) <= 1e-9 * (1.0 + std::abs(value));
    value = next;
    if (settled) break;
  }
  return value;
}

inline void require_grid_dimensions(const PartitionedQuadratic& pq, const char* who) {
  if (pq.m() > kGridMaxDimension || pq.n() > kGridMaxDimension)
    throw DimensionError(std::string(who) + ": dimensions (" + std::to_string(pq.m()) + ", " +
                         std::to_string(pq.n()) + ") exceed the oracle limit of " +
                         std::to_string(kGridMaxDimension) + " per player");
}

}  // namespace detail

/// Sphere-constrained game value by nested search.
///   MinMax: outer min over u (convex: nested golden sections in a growing box),
///           inner max over the circle (angle scan + polish) or {-1, 1}.
///   MaxMin: outer max over the sphere (angle scan of cfg.samples points, capped
///           at 20000, + polish), inner min over u in closed form through a
///           complete orthogonal decomposition of M11.
inline double grid_minmax(const PartitionedQuadratic& pq, const OracleConfig& cfg, Direction dir) {
  cfg.validate();
  detail::require_grid_dimensions(pq, "grid_minmax");
  if (pq.n() < 1) throw DimensionError("grid_minmax: w must have at least one component");
  const detail::SmallGame game(pq);
  const Index m = pq.m();
  const Index n = pq.n();

  if (dir == Direction::MinMax) {
    auto outer = [&](double radius) {
      auto f = [&](const detail::Point2& u) {
        return detail::sphere_scan_max([&](const detail::Point2& w) { return game(u, w); }, n, 64)
            .value;
      };
      return detail::convex_box_min(f, m, radius, cfg.grid_points).value;
    };
    return detail::with_growing_box(detail::initial_radius(pq, 0.0, cfg), cfg.box_radius > 0.0,
                                    outer);
  }

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  if (m > 0) cod.compute(pq.m11());
  auto inner_min = [&](const detail::Point2& w) {
    if (m == 0) return game({0.0, 0.0}, w);
    Vector wv(n);
    for (Index j = 0; j < n; ++j) wv(j) = w[j];
    const Vector u = -cod.solve(pq.m12() * wv + pq.d1());
    detail::Point2 up{0.0, 0.0};
    for (Index i = 0; i < m; ++i) up[i] = u(i);
    return game(up, w);
  };
  return detail::sphere_scan_max(inner_min, n, std::min<std::size_t>(cfg.samples, 20000)).value;
}

/// min_u max_w of V (lambda = 0) or of the Lagrangian at lambda, both players in
/// a box that grows until the value settles. MinMax: inner max over w concave,
/// outer min convex. MaxMin: inner min over u convex, outer max concave. The
/// caller is responsible for those curvature conditions (they hold whenever the
/// corresponding exact value is finite).
inline double box_minmax(const PartitionedQuadratic& pq, const OracleConfig& cfg, Direction dir,
                         double lambda = 0.0) {
  cfg.validate();
  detail::require_grid_dimensions(pq, "box_minmax");
  const detail::SmallGame game(pq, lambda);
  const Index m = pq.m();
  const Index n = pq.n();
  const std::size_t scan = std::max<std::size_t>(17, std::min<std::size_t>(cfg.grid_points, 400));

  auto solve = [&](double radius) {
    if (dir == Direction::MinMax) {
      auto f = [&](const detail::Point2& u) {
        auto neg = [&](const detail::Point2& w) { return -game(u, w); };
        return -detail::convex_box_min(neg, n, radius, scan / 8).value;
      };
      return detail::convex_box_min(f, m, radius, scan).value;
    }
    auto g = [&](const detail::Point2& w) {
      auto f = [&](const detail::Point2& u) { return game(u, w); };
      return -detail::convex_box_min(f, m, radius, scan / 8).value;
    };
    return -detail::convex_box_min(g, n, radius, scan).value;
  };
  return detail::with_growing_box(detail::initial_radius(pq, lambda, cfg), cfg.box_radius > 0.0,
                                  solve);
}

// ---------------------------------------------------------------------------
// Sampled checks

/// Smallest ||Ax - b|| over `samples` candidates x around the least-squares point
/// of a complete orthogonal decomposition, at spreads from 1 down to 1e-9, and
/// over plain Gaussian draws. The candidate set includes the COD point itself.
inline double sampled_min_residual(const Matrix& a, const Vector& b, std::size_t samples,
                                   std::uint64_t seed) {
  const Vector center = a.size() == 0 ? Vector::Zero(a.cols())
                                      : Vector(Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(b));
  CounterRng rng(seed);
  double best = (a * center - b).norm();
  for (std::size_t k = 0; k < samples; ++k) {
    const double spread = std::pow(10.0, -9.0 * static_cast<double>(k % 10) / 9.0);
    const Vector x = (k % 11 == 10) ? rng.normal_vector(a.cols())
                                    : Vector(center + spread * rng.normal_vector(a.cols()));
    best = std::min(best, (a * x - b).norm());
  }
  return best;
}

/// Largest violation of V(a u + (1-a) v) <= a V(u) + (1-a) V(v) over random
/// triples (u, v, a); non-positive means no violation was found.
inline double convexity_violation(const QuadraticForm& q, std::size_t samples, std::uint64_t seed) {
  CounterRng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const Vector u = rng.normal_vector(q.dimension());
    const Vector v = rng.normal_vector(q.dimension());
    const double a = rng.uniform();
    const double lhs = q.evaluate(a * u + (1.0 - a) * v);
    const double rhs = a * q.evaluate(u) + (1.0 - a) * q.evaluate(v);
    worst = std::max(worst, lhs - rhs);
  }
  return worst;
}

}  // namespace qgame
