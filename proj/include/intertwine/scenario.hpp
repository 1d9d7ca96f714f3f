#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "intertwine/schrodinger.hpp"
#include "intertwine/types.hpp"

namespace intertwine {

/// Pipeline stages in execution order.
enum class Command {
  VerifyChains,
  Build,
  FinalPotential,
  VerifyIntertwining,
  Minimize,
  Conjugate,
  Susy,
  Reduce,
  SamplePotential,
};

std::string to_string(Command c);
/// Throws ScenarioError for unknown names.
Command parse_command(std::string_view name);

/// Everything a run needs. The file syntax is described in README.md.
struct Scenario {
  std::string name;
  int n = 0;
  int order = 0;
  std::uint64_t seed = 0;
  Grid window;
  Tolerances tol;
  int probes = 32;

  std::vector<Expr> potential;  // row-major, n x n
  std::vector<AssociationChain> chains;
  std::vector<AssociationChain> extension;
  std::optional<CMatrix> leading;
  std::vector<VectorFunction> tests;
  std::optional<std::vector<Expr>> expected_potential;

  bool no_lower_order = false;        // enables SUSY check (b)
  std::optional<std::string> expect_verdict;
  std::string conjugate_mode = "build";
  std::optional<Grid> sample;

  std::vector<Command> requested;
  /// Requested commands plus prerequisites, in execution order.
  std::vector<Command> commands;

  MatrixHamiltonian hamiltonian() const { return MatrixHamiltonian(n, potential); }
  ChainSet chain_set() const { return ChainSet{chains}; }
  CMatrix leading_or_identity() const;
  std::vector<VectorFunction> test_functions() const;
  Grid sample_grid() const { return sample.value_or(window); }
};

/// Parses and validates scenario text. Expression errors surface as
/// SyntaxError (with the line in the message and the position within the
/// expression); everything else as ScenarioError.
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);

/// Re-checks dimensions and recomputes the command list. Call after editing a
/// parsed scenario.
void validate(Scenario& s);

/// "a,b,m" as used by the window keys and the --window flag.
Grid parse_window(std::string_view text);

}  // namespace intertwine
