#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "intertwine/cli.hpp"
#include "intertwine/errors.hpp"

using namespace intertwine;

namespace {

std::string scenario_path(const std::string& name) { return std::string(INTERTWINE_SCENARIO_DIR) + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "intertwine_test_cli" / name;
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const char* kTwoByTwo = R"(
[problem]
n = 2
order = 1
[potential]
V[0][1] = 0.5
[chain]
lambda = -1
member = exp(x); 0
[chain]
lambda = (-1.5+0i)
member = 0; exp(x)
[commands]
run = sample-potential
)";

}  // namespace

TEST_CASE("exit codes for passing, failing and malformed scenarios") {
  std::ostringstream log;
  const auto ok = scratch("darboux");
  CHECK(run(scenario_path("darboux_cosh.scn"), ok.string(), {}, &log) == 0);
  CHECK(std::filesystem::exists(ok / "report.txt"));
  CHECK(std::filesystem::exists(ok / "potential.csv"));

  const auto bad = scratch("counter");
  CHECK(run(scenario_path("counterexample.scn"), bad.string(), {}, &log) == 1);
  const std::string report = slurp(bad / "report.txt");
  CHECK(report.find("error = SingularWronskian") != std::string::npos);
  CHECK(report.find("error.x = -5.000000e+00") != std::string::npos);
  CHECK(report.find("[final-potential]\nstatus = skipped") != std::string::npos);
  CHECK(log.str().find("SingularWronskian") != std::string::npos);

  std::ostringstream err;
  const auto malformed = scratch("malformed");
  CHECK(run(scenario_path("malformed.scn"), malformed.string(), {}, &err) == 2);
  CHECK(err.str().find("SyntaxError") != std::string::npos);
  CHECK(err.str().find("position") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(malformed / "report.txt"));

  CHECK(run(scenario_path("does_not_exist.scn"), malformed.string(), {}, &err) == 2);
}

TEST_CASE("bundled scenarios pass") {
  std::ostringstream log;
  for (const char* name : {"exp_pair.scn", "absolute_irreducible.scn", "reducible_pair.scn"}) {
    CAPTURE(name);
    CHECK(run(scenario_path(name), scratch(name).string(), {}, &log) == 0);
  }
  const std::string report = slurp(scratch("unused").parent_path() / "absolute_irreducible.scn" / "report.txt");
  CHECK(report.find("status=identically-zero") != std::string::npos);
  CHECK(report.find("verdict = AbsolutelyIrreducible") != std::string::npos);
}

TEST_CASE("reports are byte-identical for the same scenario and seed") {
  // Repeated eigenvalue: the reduce command draws random probes.
  const auto s = load_scenario(scenario_path("exp_pair.scn"));
  Scenario with_reduce = s;
  with_reduce.requested.push_back(Command::Reduce);
  const auto a = run_scenario(with_reduce);
  const auto b = run_scenario(with_reduce);
  CHECK(a.report == b.report);
  CHECK(a.report.find("probabilistic") != std::string::npos);

  RunOptions opts;
  opts.seed = 7;
  const auto c = run_scenario(with_reduce, opts);
  CHECK(c.report.find("seed = 7") != std::string::npos);

  std::ostringstream log;
  const auto d1 = scratch("det1"), d2 = scratch("det2");
  REQUIRE(run(scenario_path("darboux_cosh.scn"), d1.string(), {}, &log) == 0);
  REQUIRE(run(scenario_path("darboux_cosh.scn"), d2.string(), {}, &log) == 0);
  CHECK(slurp(d1 / "report.txt") == slurp(d2 / "report.txt"));
  CHECK(slurp(d1 / "potential.csv") == slurp(d2 / "potential.csv"));
  // Timing goes to the log only.
  CHECK(slurp(d1 / "report.txt").find(" s\n") == std::string::npos);
}

TEST_CASE("cosh samples equal -2 sech^2") {
  auto s = load_scenario(scenario_path("darboux_cosh.scn"));
  const auto r = run_scenario(s);
  REQUIRE(r.csv);
  const auto rows = csv_rows(*r.csv);
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"x", "V[0][0].re", "V[0][0].im", "flag"});
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    const double sech = 1.0 / std::cosh(x);
    CHECK(std::abs(x - (-2.0 + static_cast<double>(i - 1))) < 1e-15);
    CHECK(std::abs(std::stod(rows[i][1]) + 2.0 * sech * sech) < 1e-10);
    CHECK(std::abs(std::stod(rows[i][2])) < 1e-10);
    CHECK(rows[i][3] == "ok");
  }
}

TEST_CASE("CSV layout for n = 2 and constant potentials") {
  const auto r = run_scenario(parse_scenario(kTwoByTwo));
  CHECK(r.exit_code == 0);
  REQUIRE(r.csv);
  const auto rows = csv_rows(*r.csv);
  REQUIRE(rows.size() == 202);
  CHECK(rows[0].size() == 1 + 8 + 1);
  CHECK(rows[0][1] == "V[0][0].re");
  CHECK(rows[0][8] == "V[1][1].im");
  CHECK(rows[0][9] == "flag");
  // Both kernel members are pure exponentials with the same rate, so V- is
  // constant and every row carries the same values.
  for (std::size_t i = 2; i < rows.size(); ++i) {
    for (std::size_t j = 1; j < 9; ++j) CHECK(std::abs(std::stod(rows[i][j]) - std::stod(rows[1][j])) < 1e-12);
  }
}

TEST_CASE("sample_potential flags singular rows instead of aborting") {
  // Q = d - coth x, built on a window that avoids 0 and sampled through it.
  auto s = parse_scenario(R"(
[problem]
n = 1
order = 1
window = 0.5, 3, 11
[chain]
lambda = -1
member = sinh(x)
[sample]
window = -1, 1, 5
[commands]
run = sample-potential
)");
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 0);
  const auto rows = csv_rows(*r.csv);
  REQUIRE(rows.size() == 6);
  CHECK(rows[3][0] == "0");
  CHECK(rows[3][3] != "ok");
  CHECK(rows[3][1] == "nan");
  CHECK(rows[2][3] == "ok");
  CHECK(r.report.find("flagged_rows = 1") != std::string::npos);
}

TEST_CASE("scenario validation") {
  const std::string head = "[problem]\nn = 1\norder = 1\n[chain]\nlambda = -1\nmember = cosh(x)\n";
  const std::string cmds = "[commands]\nrun = build\n";
  CHECK_NOTHROW(parse_scenario(head + cmds));

  CHECK_THROWS_AS(parse_scenario(head + "[bogus]\n" + cmds), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head + "[commands]\nrun = fly\n"), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head), ScenarioError);
  CHECK_THROWS_AS(parse_scenario("[problem]\nn = 1\norder = 2\n[chain]\nlambda = -1\nmember = cosh(x)\n" + cmds),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario("[problem]\nn = 1\norder = 1\n[chain]\nlambda = -1\nmember = cosh(x); 0\n" + cmds),
                  ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head + "[problem]\nwindow = 1, 0, 5\n" + cmds), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head + "[potential]\nV[1][0] = 1\n" + cmds), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head + "[chain]\nlambda = x\nmember = 1\n" + cmds), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(head + "[commands]\nrun = conjugate\n"), ScenarioError);  // no extension
  CHECK_THROWS_AS(parse_scenario(head + "[assert]\nverdict = Reducible\n" + cmds), ScenarioError);

  try {
    parse_scenario("[problem]\nn = 1\norder = 1\n[potential]\nV[0][0] = sin(x))\n" + head.substr(26) + cmds);
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(std::string(e.what()).find("line 5") != std::string::npos);
    CHECK(e.position() == 6);
  }
}

TEST_CASE("prerequisites are scheduled in pipeline order") {
  const auto s = parse_scenario(R"(
[problem]
n = 1
order = 1
[chain]
lambda = -1
member = cosh(x)
[extension]
lambda = -1
member = cosh(x)
[extension]
lambda = -1
member = sinh(x)
[commands]
run = susy, verify-chains
)");
  CHECK(s.commands ==
        std::vector<Command>{Command::VerifyChains, Command::Build, Command::Conjugate, Command::Susy});
  const auto r = run_scenario(s);
  CHECK(r.exit_code == 0);
  CHECK(r.report.find("commands.executed = verify-chains, build, conjugate, susy") != std::string::npos);

  RunOptions opts;
  opts.window = parse_window("-1,1,11");
  opts.tolerance = 1e-6;
  const auto w = run_scenario(s, opts);
  CHECK(w.report.find("window = [-1.000000e+00, 1.000000e+00], 11 points") != std::string::npos);
  CHECK(w.report.find("tolerance.residual = 1.000000e-06") != std::string::npos);
  CHECK_THROWS_AS(parse_window("1,2"), ScenarioError);
}
