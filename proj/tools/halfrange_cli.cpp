#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "halfrange/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Half-range boundary value solver for forward-backward kinetic "
      "equations: builds the weighted discretization, decomposes the "
      "transport operator in its Krein space, and emits solution tables "
      "and a diagnostics report."};

  std::string config_path;
  std::string cache_dir;
  bool solve = false, check = false, compare = false, strict = false;
  app.add_option("config", config_path, "Run configuration file (JSON)")
      ->required();
  app.add_flag("--solve", solve,
               "Solve the boundary value problem and emit artifacts");
  app.add_flag("--check", check, "Run the coefficient admissibility checks");
  app.add_flag("--compare", compare,
               "Solve, then cross-check against the space-time solver");
  app.add_flag("--strict", strict,
               "Exit with status 3 when admissibility checks fail");
  app.add_option("--cache-dir", cache_dir,
                 "Decomposition cache directory (overrides the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : halfrange::kConfigExit;
  }

  const int modes = int(solve) + int(check) + int(compare);
  if (modes != 1) {
    std::cerr << "exactly one of --solve, --check, --compare is required\n";
    return halfrange::kConfigExit;
  }
  const std::string mode = solve ? "solve" : (check ? "check" : "compare");

  try {
    return halfrange::run_mode(mode, config_path, strict, cache_dir);
  } catch (const halfrange::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return halfrange::kConfigExit;
  } catch (const halfrange::GridHashMismatch& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return halfrange::kConfigExit;
  } catch (const halfrange::Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return halfrange::kSolverExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return halfrange::kSolverExit;
  }
}
