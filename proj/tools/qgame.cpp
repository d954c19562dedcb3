// qgame: solve quadratic games from JSON problem files.
//
//   qgame solve <file> [--output path]
//   qgame curve <file> --lambda-min a --lambda-max b --steps k [--output path]
//   qgame check <file> [--samples n] [--seed s]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qgame/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Quadratic games: saddle points, Lagrangian duality, sphere-constrained problems"};
  app.require_subcommand(1);

  std::string path;
  std::string output;

  auto* solve = app.add_subcommand("solve", "Solve a problem file and print the result document");
  solve->add_option("file", path, "Problem file (JSON)")->required();
  solve->add_option("--output,-o", output, "Write the result here instead of stdout");

  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t steps = 0;
  auto* curve = app.add_subcommand("curve", "Tabulate the value functions over a lambda grid (CSV)");
  curve->add_option("file", path, "lagrangian or trust_region problem file")->required();
  curve->add_option("--lambda-min", lambda_min, "First grid point")->required();
  curve->add_option("--lambda-max", lambda_max, "Last grid point")->required();
  curve->add_option("--steps", steps, "Number of grid points (>= 2)")->required();
  curve->add_option("--output,-o", output, "Write the CSV here instead of stdout");

  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  auto* check = app.add_subcommand("check", "Compare the solver against a brute-force oracle");
  check->add_option("file", path, "Problem file (JSON)")->required();
  check->add_option("--samples", samples, "Oracle sample count");
  check->add_option("--seed", seed, "Oracle seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qgame::kExitInput;
  }

  if (*solve) return qgame::run_solve(path, output, std::cout, std::cerr);
  if (*curve) return qgame::run_curve(path, lambda_min, lambda_max, steps, output, std::cout, std::cerr);
  return qgame::run_check(path, samples, seed, std::cout, std::cerr);
}
