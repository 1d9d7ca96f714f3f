#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "intertwine/cli.hpp"
#include "intertwine/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Matrix intertwining operators for Schrodinger systems"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run a scenario file and write report.txt (and potential.csv)");
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> window;
  std::optional<double> tol;
  run->add_option("scenario", scenario, "Scenario file")->required();
  run->add_option("--out", out, "Output directory")->capture_default_str();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--window", window, "Override the window as xmin,xmax,points");
  run->add_option("--tol", tol, "Override the operator-identity tolerance");

  CLI11_PARSE(app, argc, argv);

  intertwine::RunOptions opts;
  opts.seed = seed;
  opts.tolerance = tol;
  if (window) {
    try {
      opts.window = intertwine::parse_window(*window);
    } catch (const intertwine::ScenarioError& e) {
      std::cerr << "error: ScenarioError: " << e.what() << "\n";
      return 2;
    }
  }
  return intertwine::run(scenario, out, opts, &std::cerr);
}
