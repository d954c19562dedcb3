#pragma once

// Problem files and result documents (JSON).
//
// Problem file, one object per file:
//
//   {
//     "kind": "minmax",                 // linear_solve | quad_min | saddle | lagrangian
//                                       // | trust_region | minmax | maxmin
//     "M11": [[1]], "M12": [[1]], "M22": [[1]],
//     "d1": [0], "d2": [0],             // optional for game kinds, default zero
//     "lambda": 1.5,                    // lagrangian only (required for solve)
//     "oracle": {"seed": 7, "samples": 100000, "grid_points": 2000,
//                "box_radius": 0, "fd_step": 1e-5},   // optional
//     "claimed_value": 0.5              // optional, replaces the solver value in check
//   }
//
// Matrices are arrays of rows; [] is the empty matrix (a player with no
// components). Field sets per kind:
//   linear_solve  A, b
//   quad_min      D, d, optional c (default 0), optional sense "min" | "max"
//   trust_region  D, d
//   saddle, lagrangian, minmax, maxmin   M11, M12, M22, d1, d2

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qgame/game.hpp"
#include "qgame/oracle.hpp"
#include "qgame/quadratic.hpp"
#include "qgame/sphere.hpp"

namespace qgame {

/// Malformed or inconsistent input. `where` is "line N" for syntax errors and
/// "field 'name'" for content errors.
struct InputError : std::runtime_error {
  InputError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), location(where) {}
  std::string location;
};

enum class ProblemKind { LinearSolve, QuadMin, Saddle, Lagrangian, TrustRegion, MinMax, MaxMin };

inline const char* to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::LinearSolve: return "linear_solve";
    case ProblemKind::QuadMin: return "quad_min";
    case ProblemKind::Saddle: return "saddle";
    case ProblemKind::Lagrangian: return "lagrangian";
    case ProblemKind::TrustRegion: return "trust_region";
    case ProblemKind::MinMax: return "minmax";
    case ProblemKind::MaxMin: return "maxmin";
  }
  return "unknown";
}

inline std::optional<ProblemKind> parse_kind(const std::string& text) {
  for (ProblemKind k : {ProblemKind::LinearSolve, ProblemKind::QuadMin, ProblemKind::Saddle,
                        ProblemKind::Lagrangian, ProblemKind::TrustRegion, ProblemKind::MinMax,
                        ProblemKind::MaxMin})
    if (text == to_string(k)) return k;
  return std::nullopt;
}

inline bool is_game_kind(ProblemKind kind) {
  return kind == ProblemKind::Saddle || kind == ProblemKind::Lagrangian ||
         kind == ProblemKind::MinMax || kind == ProblemKind::MaxMin;
}

struct ProblemFile {
  ProblemKind kind = ProblemKind::LinearSolve;
  Matrix A, D, M11, M12, M22;
  Vector b, d, d1, d2;
  double c = 0.0;
  bool maximize = false;  // quad_min sense
  std::optional<double> lambda;
  OracleConfig oracle;
  std::optional<double> claimed_value;

  [[nodiscard]] PartitionedQuadratic game(const Tolerances& tol = {}) const {
    return {M11, M12, M22, d1, d2, tol};
  }
  [[nodiscard]] QuadraticForm quadratic(const Tolerances& tol = {}) const { return {D, d, c, tol}; }
};

namespace detail {

using nlohmann::json;

inline std::string field(const std::string& name) { return "field '" + name + "'"; }

inline double read_number(const json& j, const std::string& name) {
  if (!j.is_number()) throw InputError(field(name), "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(field(name), "value is not finite");
  return v;
}

inline Vector read_vector(const json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(field(name), "expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Index>(i)) = read_number(j[i], name + "[" + std::to_string(i) + "]");
  return v;
}

inline Matrix read_matrix(const json& j, const std::string& name) {
  if (!j.is_array()) throw InputError(field(name), "expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix a(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_name = name + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) throw InputError(field(row_name), "expected a row (array of numbers)");
    if (j[r].size() != cols)
      throw InputError(field(row_name), "has " + std::to_string(j[r].size()) +
                                            " entries, expected " + std::to_string(cols) +
                                            " (ragged matrix)");
    for (std::size_t k = 0; k < cols; ++k)
      a(static_cast<Index>(r), static_cast<Index>(k)) =
          read_number(j[r][k], row_name + "[" + std::to_string(k) + "]");
  }
  return a;
}

inline const json& require(const json& obj, const std::string& name) {
  if (!obj.contains(name)) throw InputError(field(name), "missing");
  return obj.at(name);
}

inline void expect_dims(const std::string& name, Index rows, Index cols, Index want_rows,
                        Index want_cols, const std::string& why) {
  if (rows != want_rows || cols != want_cols)
    throw InputError(field(name), "is " + std::to_string(rows) + "x" + std::to_string(cols) +
                                      ", expected " + std::to_string(want_rows) + "x" +
                                      std::to_string(want_cols) + " (" + why + ")");
}

inline void expect_size(const std::string& name, Index size, Index want, const std::string& why) {
  if (size != want)
    throw InputError(field(name), "has " + std::to_string(size) + " entries, expected " +
                                      std::to_string(want) + " (" + why + ")");
}

inline json matrix_json(const Matrix& a) {
  json rows = json::array();
  for (Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Index k = 0; k < a.cols(); ++k) row.push_back(a(r, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline OracleConfig read_oracle(const json& j) {
  if (!j.is_object()) throw InputError(field("oracle"), "expected an object");
  OracleConfig cfg;
  auto count = [&](const char* key, std::size_t& out) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer() || j.at(key).get<long long>() < 0)
      throw InputError(field(std::string("oracle.") + key), "expected a non-negative integer");
    out = j.at(key).get<std::size_t>();
  };
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_integer())
      throw InputError(field("oracle.seed"), "expected an integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  count("samples", cfg.samples);
  count("grid_points", cfg.grid_points);
  if (j.contains("box_radius")) cfg.box_radius = read_number(j.at("box_radius"), "oracle.box_radius");
  if (j.contains("fd_step")) cfg.fd_step = read_number(j.at("fd_step"), "oracle.fd_step");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(field("oracle"), e.what());
  }
  return cfg;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

}  // namespace detail

/// Parse and validate a problem file. Throws InputError.
inline ProblemFile parse_problem(const std::string& text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError("line " + std::to_string(detail::line_of(text, e.byte)), "malformed JSON");
  }
  if (!root.is_object()) throw InputError("line 1", "top level must be an object");

  ProblemFile p;
  const json& kind = detail::require(root, "kind");
  if (!kind.is_string()) throw InputError(detail::field("kind"), "expected a string");
  const auto parsed = parse_kind(kind.get<std::string>());
  if (!parsed) throw InputError(detail::field("kind"), "unknown kind '" + kind.get<std::string>() + "'");
  p.kind = *parsed;

  switch (p.kind) {
    case ProblemKind::LinearSolve: {
      p.A = detail::read_matrix(detail::require(root, "A"), "A");
      p.b = detail::read_vector(detail::require(root, "b"), "b");
      detail::expect_size("b", p.b.size(), p.A.rows(), "rows of A");
      break;
    }
    case ProblemKind::QuadMin:
    case ProblemKind::TrustRegion: {
      p.D = detail::read_matrix(detail::require(root, "D"), "D");
      p.d = detail::read_vector(detail::require(root, "d"), "d");
      detail::expect_dims("D", p.D.rows(), p.D.cols(), p.d.size(), p.d.size(), "square, matching d");
      if (p.kind == ProblemKind::TrustRegion && p.d.size() == 0)
        throw InputError(detail::field("d"), "the sphere needs at least one dimension");
      if (p.kind == ProblemKind::QuadMin) {
        if (root.contains("c")) p.c = detail::read_number(root.at("c"), "c");
        if (root.contains("sense")) {
          const json& s = root.at("sense");
          if (!s.is_string() || (s != "min" && s != "max"))
            throw InputError(detail::field("sense"), "expected \"min\" or \"max\"");
          p.maximize = s == "max";
        }
      }
      break;
    }
    case ProblemKind::Saddle:
    case ProblemKind::Lagrangian:
    case ProblemKind::MinMax:
    case ProblemKind::MaxMin: {
      p.M11 = detail::read_matrix(detail::require(root, "M11"), "M11");
      p.M22 = detail::read_matrix(detail::require(root, "M22"), "M22");
      p.M12 = detail::read_matrix(detail::require(root, "M12"), "M12");
      const Index m = p.M11.rows();
      const Index n = p.M22.rows();
      detail::expect_dims("M11", p.M11.rows(), p.M11.cols(), m, m, "square");
      detail::expect_dims("M22", p.M22.rows(), p.M22.cols(), n, n, "square");
      if (p.M12.size() == 0 && (m == 0 || n == 0)) p.M12 = Matrix(m, n);
      detail::expect_dims("M12", p.M12.rows(), p.M12.cols(), m, n, "rows of M11 by rows of M22");
      p.d1 = root.contains("d1") ? detail::read_vector(root.at("d1"), "d1") : Vector(Vector::Zero(m));
      p.d2 = root.contains("d2") ? detail::read_vector(root.at("d2"), "d2") : Vector(Vector::Zero(n));
      detail::expect_size("d1", p.d1.size(), m, "rows of M11");
      detail::expect_size("d2", p.d2.size(), n, "rows of M22");
      if ((p.kind == ProblemKind::MinMax || p.kind == ProblemKind::MaxMin) && n == 0)
        throw InputError(detail::field("M22"), "the sphere player needs at least one dimension");
      break;
    }
  }
  if (root.contains("lambda")) p.lambda = detail::read_number(root.at("lambda"), "lambda");
  if (root.contains("oracle")) p.oracle = detail::read_oracle(root.at("oracle"));
  if (root.contains("claimed_value"))
    p.claimed_value = detail::read_number(root.at("claimed_value"), "claimed_value");
  return p;
}

inline ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file '" + path + "'", "cannot be opened");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem(buffer.str());
}

inline nlohmann::json problem_to_json(const ProblemFile& p) {
  using detail::matrix_json;
  using detail::vector_json;
  nlohmann::json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case ProblemKind::LinearSolve:
      j["A"] = matrix_json(p.A);
      j["b"] = vector_json(p.b);
      break;
    case ProblemKind::QuadMin:
      j["c"] = p.c;
      j["sense"] = p.maximize ? "max" : "min";
      [[fallthrough]];
    case ProblemKind::TrustRegion:
      j["D"] = matrix_json(p.D);
      j["d"] = vector_json(p.d);
      break;
    default:
      j["M11"] = matrix_json(p.M11);
      j["M12"] = matrix_json(p.M12);
      j["M22"] = matrix_json(p.M22);
      j["d1"] = vector_json(p.d1);
      j["d2"] = vector_json(p.d2);
  }
  if (p.lambda) j["lambda"] = *p.lambda;
  if (p.claimed_value) j["claimed_value"] = *p.claimed_value;
  j["oracle"] = {{"seed", p.oracle.seed},
                 {"samples", p.oracle.samples},
                 {"grid_points", p.oracle.grid_points},
                 {"box_radius", p.oracle.box_radius},
                 {"fd_step", p.oracle.fd_step}};
  return j;
}

// ---------------------------------------------------------------------------
// Result documents

/// A solution set in serialized form: particular point, orthonormal free
/// directions (stored as a list of columns) and, for sets on the sphere, the
/// radius available along the free directions.
struct SetRecord {
  Vector particular;
  Matrix basis;
  std::optional<double> radius_residual;

  bool operator==(const SetRecord& o) const {
    return particular.size() == o.particular.size() && particular == o.particular &&
           basis.rows() == o.basis.rows() && basis.cols() == o.basis.cols() && basis == o.basis &&
           radius_residual == o.radius_residual;
  }
};

inline SetRecord record(const AffineSolutionSet& s) { return {s.particular, s.basis, std::nullopt}; }
inline SetRecord record(const SphereSolutionSet& s) { return {s.particular, s.basis, s.radius_residual}; }
inline SetRecord record(const Vector& point) { return {point, Matrix(point.size(), 0), std::nullopt}; }

struct ResultDocument {
  std::string kind;
  std::string status;
  std::optional<double> value;
  std::map<std::string, double> scalars;
  std::map<std::string, std::string> flags;
  std::map<std::string, SetRecord> sets;
  std::map<std::string, double> diagnostics;

  bool operator==(const ResultDocument&) const = default;
};

inline nlohmann::json result_to_json(const ResultDocument& doc) {
  using nlohmann::json;
  json j;
  j["kind"] = doc.kind;
  j["status"] = doc.status;
  j["value"] = doc.value ? json(*doc.value) : json(nullptr);
  j["scalars"] = json::object();
  for (const auto& [k, v] : doc.scalars) j["scalars"][k] = v;
  j["flags"] = json::object();
  for (const auto& [k, v] : doc.flags) j["flags"][k] = v;
  j["sets"] = json::object();
  for (const auto& [name, s] : doc.sets) {
    json basis = json::array();
    for (Index c = 0; c < s.basis.cols(); ++c) basis.push_back(detail::vector_json(s.basis.col(c)));
    json entry = {{"particular", detail::vector_json(s.particular)}, {"basis", basis}};
    if (s.radius_residual) entry["radius_residual"] = *s.radius_residual;
    j["sets"][name] = std::move(entry);
  }
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : doc.diagnostics) j["diagnostics"][k] = v;
  return j;
}

inline ResultDocument result_from_json(const nlohmann::json& j) {
  ResultDocument doc;
  try {
    doc.kind = j.at("kind").get<std::string>();
    doc.status = j.at("status").get<std::string>();
    if (!j.at("value").is_null()) doc.value = j.at("value").get<double>();
    for (const auto& [k, v] : j.at("scalars").items()) doc.scalars[k] = v.get<double>();
    for (const auto& [k, v] : j.at("flags").items()) doc.flags[k] = v.get<std::string>();
    for (const auto& [name, entry] : j.at("sets").items()) {
      SetRecord s;
      s.particular = detail::read_vector(entry.at("particular"), name + ".particular");
      const auto& cols = entry.at("basis");
      s.basis = Matrix(s.particular.size(), static_cast<Index>(cols.size()));
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const Vector col = detail::read_vector(cols[c], name + ".basis");
        detail::expect_size(name + ".basis", col.size(), s.particular.size(), "ambient dimension");
        s.basis.col(static_cast<Index>(c)) = col;
      }
      if (entry.contains("radius_residual")) s.radius_residual = entry.at("radius_residual").get<double>();
      doc.sets[name] = std::move(s);
    }
    for (const auto& [k, v] : j.at("diagnostics").items()) doc.diagnostics[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("result document", e.what());
  }
  return doc;
}

/// JSON text; doubles are written in their shortest exactly-round-tripping form.
inline std::string format_result(const ResultDocument& doc) { return result_to_json(doc).dump(2); }

inline ResultDocument parse_result(const std::string& text) {
  try {
    return result_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("line " + std::to_string(detail::line_of(text, e.byte)), "malformed JSON");
  }
}

}  // namespace qgame
