#pragma once

// The solve / curve / check commands behind tools/qgame, as library calls so
// they can be exercised without a process boundary.
//
// Exit codes: 0 solved (check: pass), 1 input error, 2 a well-posed problem
// without a solution (unbounded, inconsistent, infinite duality gap),
// 3 check failed.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "qgame/game.hpp"
#include "qgame/io.hpp"
#include "qgame/minmax.hpp"
#include "qgame/oracle.hpp"
#include "qgame/quadratic.hpp"
#include "qgame/sphere.hpp"

namespace qgame {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNoSolution = 2, kExitCheckFailed = 3 };

/// Tolerances scaled by QG_TOL_OVERRIDE (default 1). Throws InputError when the
/// variable is set but is not a positive number.
inline Tolerances tolerances_from_env() {
  const char* raw = std::getenv("QG_TOL_OVERRIDE");
  if (raw == nullptr || *raw == '\0') return {};
  char* end = nullptr;
  const double factor = std::strtod(raw, &end);
  if (end == raw || *end != '\0' || !std::isfinite(factor) || factor <= 0.0)
    throw InputError("environment QG_TOL_OVERRIDE", "expected a positive number, got '" +
                                                        std::string(raw) + "'");
  return Tolerances{}.scaled(factor);
}

inline int exit_code_for(const ResultDocument& doc) {
  return doc.status == "solved" || doc.status == "strong_duality" ? kExitOk : kExitNoSolution;
}

inline const char* to_string(LambdaStatus s) {
  switch (s) {
    case LambdaStatus::Finite: return "finite";
    case LambdaStatus::Infinite: return "inf";
    case LambdaStatus::UnboundedBelow: return "-inf";
  }
  return "unknown";
}

inline const char* to_string(TrustRegionCase c) {
  return c == TrustRegionCase::Boundary ? "boundary" : "interior";
}

// ---------------------------------------------------------------------------
// solve

namespace detail {

inline void fill_constrained(ResultDocument& doc, const ConstrainedGameSolution& sol, double thr) {
  doc.status = "solved";
  doc.value = sol.value;
  doc.scalars["lambda0"] = sol.lambda0;
  doc.scalars["threshold"] = thr;
  doc.sets["u"] = record(sol.u_set);
  doc.sets["w"] = record(sol.w_set);
  doc.sets["u_representative"] = record(sol.u());
  doc.sets["w_representative"] = record(sol.w());
  doc.flags["direction"] = to_string(sol.direction);
  doc.flags["lambda0_at_threshold"] = sol.diagnostics.at_threshold ? "true" : "false";
  doc.diagnostics["doublings"] = sol.diagnostics.doublings;
  doc.diagnostics["iterations"] = sol.diagnostics.iterations;
  doc.diagnostics["golden_fallback"] = sol.diagnostics.golden_fallback ? 1.0 : 0.0;
  doc.diagnostics["residual"] = sol.diagnostics.residual;
}

inline void fill_lambda_side(ResultDocument& doc, const std::string& side, const LambdaSolve& s) {
  doc.flags[side + "_status"] = to_string(s.status);
  if (!s.finite()) return;
  doc.scalars[side + "_value"] = s.value();
  doc.sets[side + "_u"] = record(s.optimum->u_set);
  doc.sets[side + "_w"] = record(s.optimum->w_set);
}

}  // namespace detail

/// Run the solver that matches the problem kind. Precondition violations
/// propagate as PreconditionError / DimensionError.
inline ResultDocument solve_problem(const ProblemFile& p, const Tolerances& tol = {}) {
  ResultDocument doc;
  doc.kind = to_string(p.kind);
  switch (p.kind) {
    case ProblemKind::LinearSolve: {
      const LinearSolveResult r = solve_linear(p.A, p.b, tol);
      doc.status = r.consistent() ? "solved" : "least_squares";
      doc.sets["x"] = record(r.solutions);
      doc.scalars["residual_norm"] = r.residual_norm;
      break;
    }
    case ProblemKind::QuadMin: {
      const QuadraticForm q = p.quadratic(tol);
      const auto r = p.maximize ? maximize(q, tol) : minimize(q, tol);
      if (!r) {
        doc.status = p.maximize ? "unbounded_above" : "unbounded_below";
        break;
      }
      doc.status = "solved";
      doc.value = r->value;
      doc.sets[p.maximize ? "maximizers" : "minimizers"] = record(r->minimizers);
      break;
    }
    case ProblemKind::Saddle: {
      const auto r = solve_saddle(p.game(tol), tol);
      if (!r) {
        doc.status = "no_solution";
        break;
      }
      doc.status = "solved";
      doc.value = r->value;
      doc.sets["joint"] = record(r->joint);
      doc.sets["u"] = record(r->u_set());
      doc.sets["w"] = record(r->w_set());
      break;
    }
    case ProblemKind::Lagrangian: {
      if (!p.lambda) throw InputError(detail::field("lambda"), "missing (required for lagrangian)");
      const PartitionedQuadratic pq = p.game(tol);
      const DualityReport rep = duality_report(pq, *p.lambda, tol);
      doc.scalars["lambda"] = *p.lambda;
      doc.scalars["minmax_threshold"] = minmax_threshold(pq);
      doc.scalars["maxmin_threshold"] = maxmin_threshold(pq, tol);
      detail::fill_lambda_side(doc, "minmax", rep.minmax);
      detail::fill_lambda_side(doc, "maxmin", rep.maxmin);
      switch (rep.kind) {
        case DualityKind::StrongDuality:
          doc.status = "strong_duality";
          doc.value = rep.value;
          break;
        case DualityKind::InfiniteGap: doc.status = "infinite_gap"; break;
        case DualityKind::BothInfinite: doc.status = "both_infinite"; break;
      }
      break;
    }
    case ProblemKind::TrustRegion: {
      const TrustRegionSolution s = solve_trust_region(p.D, p.d, tol);
      doc.status = "solved";
      doc.value = s.value;
      doc.scalars["lambda_p"] = s.lambda_p;
      doc.scalars["raw_eigenvalue"] = s.raw_eigenvalue;
      doc.scalars["norm_D"] = spectral_norm(p.D);
      doc.flags["case"] = to_string(s.region);
      doc.flags["hard_case"] = s.hard_case ? "true" : "false";
      doc.sets["w"] = record(s.w_star);
      doc.sets["w_representative"] = record(s.w_star.representative());
      break;
    }
    case ProblemKind::MinMax:
    case ProblemKind::MaxMin: {
      const Direction dir = p.kind == ProblemKind::MinMax ? Direction::MinMax : Direction::MaxMin;
      const PartitionedQuadratic pq = p.game(tol);
      const auto sol = solve_constrained(pq, dir, tol);
      if (!sol) {
        doc.status = "unbounded_below";
        break;
      }
      detail::fill_constrained(doc, *sol, threshold(pq, dir, tol));
      break;
    }
  }
  return doc;
}

inline bool write_text(const std::string& text, const std::string& output, std::ostream& out,
                       std::ostream& err) {
  if (output.empty()) {
    out << text;
    return true;
  }
  std::ofstream file(output);
  if (!file) {
    err << "error: cannot write '" << output << "'\n";
    return false;
  }
  file << text;
  return static_cast<bool>(file);
}

/// `solve <file> [--output path]`.
inline int run_solve(const std::string& path, const std::string& output, std::ostream& out,
                     std::ostream& err) {
  try {
    const Tolerances tol = tolerances_from_env();
    const ProblemFile p = load_problem(path);
    const ResultDocument doc = solve_problem(p, tol);
    if (!write_text(format_result(doc) + "\n", output, out, err)) return kExitInput;
    return exit_code_for(doc);
  } catch (const InputError& e) {
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {  // DimensionError, PreconditionError
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const NumericalError& e) {
    err << "error: " << path << ": numerical failure: " << e.what() << "\n";
  }
  return kExitInput;
}

// ---------------------------------------------------------------------------
// curve

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_status_value(LambdaStatus s, double v) {
  switch (s) {
    case LambdaStatus::Finite: return format_number(v);
    case LambdaStatus::Infinite: return "inf";
    case LambdaStatus::UnboundedBelow: return "-inf";
  }
  return "none";
}

/// CSV text for the lambda sweep of a lagrangian (lambda,minmax,maxmin) or a
/// trust_region (lambda,L,dL) problem. Infinite values are the token inf (or
/// -inf); a missing derivative is none.
inline std::string curve_csv(const ProblemFile& p, double lambda_min, double lambda_max,
                             std::size_t steps, const Tolerances& tol = {}) {
  std::string csv;
  if (p.kind == ProblemKind::Lagrangian) {
    csv = "lambda,minmax,maxmin\n";
    for (const auto& row : lambda_curve(p.game(tol), lambda_min, lambda_max, steps, tol))
      csv += format_number(row.lambda) + "," + format_status_value(row.minmax_status, row.minmax) +
             "," + format_status_value(row.maxmin_status, row.maxmin) + "\n";
  } else if (p.kind == ProblemKind::TrustRegion) {
    csv = "lambda,L,dL\n";
    for (const auto& row : dual_curve(p.D, p.d, lambda_min, lambda_max, steps, tol))
      csv += format_number(row.lambda) + "," + (row.finite ? format_number(row.value) : "inf") +
             "," + (row.slope ? format_number(*row.slope) : "none") + "\n";
  } else {
    throw InputError(detail::field("kind"), std::string("curve needs a lagrangian or trust_region "
                                                        "problem, got ") + to_string(p.kind));
  }
  return csv;
}

/// `curve <file> --lambda-min a --lambda-max b --steps k [--output path]`.
inline int run_curve(const std::string& path, double lambda_min, double lambda_max,
                     std::size_t steps, const std::string& output, std::ostream& out,
                     std::ostream& err) {
  try {
    const Tolerances tol = tolerances_from_env();
    if (!std::isfinite(lambda_min) || !std::isfinite(lambda_max) || !(lambda_min < lambda_max))
      throw InputError("option --lambda-min/--lambda-max", "need finite values with min < max");
    if (steps < 2) throw InputError("option --steps", "at least 2 steps are required");
    const ProblemFile p = load_problem(path);
    return write_text(curve_csv(p, lambda_min, lambda_max, steps, tol), output, out, err)
               ? kExitOk
               : kExitInput;
  } catch (const InputError& e) {
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const NumericalError& e) {
    err << "error: " << path << ": numerical failure: " << e.what() << "\n";
  }
  return kExitInput;
}

// ---------------------------------------------------------------------------
// check

struct CheckReport {
  std::string kind;
  std::string status;   // solver status
  double solver_value;  // or the claimed value from the file
  double oracle_value;
  double gap;           // solver - oracle
  double tolerance_low;   // pass iff tolerance_low <= gap <= tolerance_high
  double tolerance_high;
  bool passed;
  std::string note;
};

namespace detail {

inline CheckReport compare(std::string kind, std::string status, double solver, double oracle,
                           double low, double high, std::string note) {
  const double gap = solver - oracle;
  return {std::move(kind), std::move(status), solver, oracle, gap, low, high,
          gap >= low && gap <= high, std::move(note)};
}

inline double cod_residual(const Matrix& a, const Vector& b) {
  if (a.size() == 0) return b.norm();
  const Vector x = Eigen::CompleteOrthogonalDecomposition<Matrix>(a).solve(b);
  return (a * x - b).norm();
}

}  // namespace detail

/// Solve, then recompute the answer with the matching brute-force oracle.
/// Throws DimensionError when the instance exceeds the oracle limits.
inline CheckReport check_problem(const ProblemFile& p, const OracleConfig& cfg,
                                 const Tolerances& tol = {}) {
  cfg.validate();
  const ResultDocument doc = solve_problem(p, tol);
  const std::string kind = to_string(p.kind);
  auto claimed = [&](double solver) { return p.claimed_value.value_or(solver); };

  switch (p.kind) {
    case ProblemKind::LinearSolve: {
      const double oracle = sampled_min_residual(p.A, p.b, cfg.samples, cfg.seed);
      const double slack = 1e-6 * (1.0 + p.b.norm());
      return detail::compare(kind, doc.status, claimed(doc.scalars.at("residual_norm")), oracle,
                             -slack, slack, "value is the residual norm");
    }
    case ProblemKind::QuadMin: {
      const QuadraticForm q = p.quadratic(tol);
      const QuadraticForm target = p.maximize ? q.negated() : q;
      const double residual = detail::cod_residual(target.D(), -target.d());
      const bool oracle_bounded = residual <= 1e-6 * (1.0 + target.d().norm());
      if (!doc.value) {
        const double s = p.claimed_value.value_or(0.0);
        return {kind, doc.status, s, 0.0, 0.0, 0.0, 0.0, !oracle_bounded && !p.claimed_value,
                oracle_bounded ? "oracle finds a bounded problem"
                               : "oracle confirms unboundedness (least-squares residual " +
                                     format_number(residual) + ")"};
      }
      // Best value among the COD stationary point and random perturbations of it.
      const Vector center = target.D().size() == 0
                                ? Vector(Vector::Zero(0))
                                : Vector(-Eigen::CompleteOrthogonalDecomposition<Matrix>(target.D())
                                              .solve(target.d()));
      CounterRng rng(cfg.seed);
      double best = target.evaluate(center);
      for (std::size_t k = 0; k < std::min<std::size_t>(cfg.samples, 10000); ++k)
        best = std::min(best, target.evaluate(center + 1e-3 * rng.normal_vector(center.size())));
      const double oracle = p.maximize ? -best : best;
      const double slack = 1e-6 * (1.0 + std::abs(oracle));
      return detail::compare(kind, doc.status, claimed(*doc.value), oracle, -slack, slack,
                             oracle_bounded ? "" : "oracle finds an unbounded problem");
    }
    case ProblemKind::Saddle: {
      if (!doc.value)
        return {kind, doc.status, p.claimed_value.value_or(0.0), 0.0, 0.0, 0.0, 0.0,
                !p.claimed_value && detail::cod_residual(p.game(tol).assembled(),
                                                         -p.game(tol).linear_term()) > 1e-6,
                "no saddle point; oracle checks d outside R(M)"};
      const double oracle = box_minmax(p.game(tol), cfg, Direction::MinMax);
      return detail::compare(kind, doc.status, claimed(*doc.value), oracle, -2e-2, 2e-2,
                             "nested box search");
    }
    case ProblemKind::Lagrangian: {
      const PartitionedQuadratic pq = p.game(tol);
      const bool minmax_finite = doc.scalars.count("minmax_value") > 0;
      const std::string side = minmax_finite ? "minmax" : "maxmin";
      if (!doc.scalars.count(side + "_value"))
        return {kind, doc.status, p.claimed_value.value_or(0.0), 0.0, 0.0, 0.0, 0.0,
                !p.claimed_value, "both sides infinite; nothing to sample"};
      const Direction dir = minmax_finite ? Direction::MinMax : Direction::MaxMin;
      const double oracle = box_minmax(pq, cfg, dir, *p.lambda);
      return detail::compare(kind, doc.status, claimed(doc.scalars.at(side + "_value")), oracle,
                             -2e-2, 2e-2, side + " side, nested box search");
    }
    case ProblemKind::TrustRegion: {
      const SphereMaxResult r = sphere_max(p.quadratic(tol), cfg);
      return detail::compare(kind, doc.status, claimed(*doc.value), r.value, -1e-9, 5e-3,
                             "sphere sampling, " + std::to_string(cfg.samples) + " samples");
    }
    case ProblemKind::MinMax:
    case ProblemKind::MaxMin: {
      const PartitionedQuadratic pq = p.game(tol);
      detail::require_grid_dimensions(pq, "check");
      if (!doc.value)
        return {kind, doc.status, p.claimed_value.value_or(0.0), 0.0, 0.0, 0.0, 0.0,
                !p.claimed_value && detail::cod_residual(pq.m11(), pq.d1()) >
                                        1e-6 * (1.0 + pq.d1().norm()),
                "unbounded; oracle checks d1 outside R(M11)"};
      const Direction dir = p.kind == ProblemKind::MinMax ? Direction::MinMax : Direction::MaxMin;
      const double oracle = grid_minmax(pq, cfg, dir);
      const double slack = pq.m() <= 1 && pq.n() <= 1 ? 1e-3 : 5e-3;
      return detail::compare(kind, doc.status, claimed(*doc.value), oracle, -slack, slack,
                             "nested grid search");
    }
  }
  throw std::logic_error("check_problem: unhandled kind");
}

inline std::string format_report(const CheckReport& r) {
  std::string s;
  s += "kind: " + r.kind + "\n";
  s += "status: " + r.status + "\n";
  s += "solver_value: " + format_number(r.solver_value) + "\n";
  s += "oracle_value: " + format_number(r.oracle_value) + "\n";
  s += "gap: " + format_number(r.gap) + "\n";
  s += "tolerance: [" + format_number(r.tolerance_low) + ", " + format_number(r.tolerance_high) +
       "]\n";
  if (!r.note.empty()) s += "note: " + r.note + "\n";
  s += std::string("result: ") + (r.passed ? "pass" : "fail") + "\n";
  return s;
}

/// `check <file> [--samples n] [--seed s]`. Unset options fall back to the
/// file's oracle block, then to the defaults.
inline int run_check(const std::string& path, std::optional<std::size_t> samples,
                     std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  try {
    const Tolerances tol = tolerances_from_env();
    const ProblemFile p = load_problem(path);
    OracleConfig cfg = p.oracle;
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = *seed;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw InputError("option --samples", e.what());
    }
    const CheckReport r = check_problem(p, cfg, tol);
    out << format_report(r);
    return r.passed ? kExitOk : kExitCheckFailed;
  } catch (const InputError& e) {
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    err << "error: " << path << ": " << e.what() << "\n";
  } catch (const NumericalError& e) {
    err << "error: " << path << ": numerical failure: " << e.what() << "\n";
  }
  return kExitInput;
}

}  // namespace qgame
