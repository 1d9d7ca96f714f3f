#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "intertwine/construct.hpp"
#include "intertwine/scenario.hpp"

namespace intertwine {

/// Structured text report: sections of key = value lines in insertion order.
class Report {
 public:
  void section(std::string name);
  void add(std::string key, std::string value);
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
};

/// Command-line overrides applied on top of the scenario file.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<Grid> window;
  std::optional<double> tolerance;
};

struct RunResult {
  int exit_code = 0;
  std::string report;
  std::optional<std::string> csv;  // potential samples when requested
  std::vector<std::string> errors;  // "<command>: <kind>: <message>"
};

/// Runs every scheduled command of a validated scenario. Timing lines go to
/// `log` (never into the report, which stays byte-identical across runs).
RunResult run_scenario(Scenario s, const RunOptions& opts = {}, std::ostream* log = nullptr);

/// CSV of V- on the grid: x, then Re/Im of V[i][j] in row-major order, then a
/// flag column ("ok" or the error kind; flagged rows carry nan values).
std::string sample_potential(const MatrixDifferentialOperator& q, const Grid& grid);

/// Loads `path`, runs it, writes report.txt (and potential.csv) into
/// `out_dir`. Exit code 0: every check passed, 1: a check or a module failed,
/// 2: the scenario did not parse or validate.
int run(const std::string& path, const std::string& out_dir, const RunOptions& opts = {},
        std::ostream* log = nullptr);

}  // namespace intertwine
