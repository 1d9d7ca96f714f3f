#include "intertwine/scenario.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include "intertwine/errors.hpp"

namespace intertwine {
namespace {

constexpr std::array<std::pair<Command, const char*>, 9> kCommandNames{{
    {Command::VerifyChains, "verify-chains"},
    {Command::Build, "build"},
    {Command::FinalPotential, "final-potential"},
    {Command::VerifyIntertwining, "verify-intertwining"},
    {Command::Minimize, "minimize"},
    {Command::Conjugate, "conjugate"},
    {Command::Susy, "susy"},
    {Command::Reduce, "reduce"},
    {Command::SamplePotential, "sample-potential"},
}};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t from = 0;
  for (;;) {
    const auto at = s.find(sep, from);
    out.push_back(trim(s.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from)));
    if (at == std::string_view::npos) return out;
    from = at + 1;
  }
}

struct Line {
  int number = 0;
  std::string_view key;
  std::string_view value;

  [[noreturn]] void fail(const std::string& what) const {
    throw ScenarioError("line " + std::to_string(number) + ": " + what);
  }

  Expr expr() const { return expr_of(value); }

  Expr expr_of(std::string_view text) const {
    try {
      return parse(text);
    } catch (const SyntaxError& e) {
      throw SyntaxError(e.position(), "line " + std::to_string(number) + ": invalid expression '" +
                                          std::string(text) + "'");
    }
  }

  Complex constant() const {
    const Expr e = expr();
    if (!e.is_closed()) fail("'" + std::string(key) + "' must not depend on x");
    return evaluate(e, 0.0);
  }

  long long integer() const {
    long long v = 0;
    const auto* end = value.data() + value.size();
    const auto [p, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc() || p != end) fail("'" + std::string(key) + "' needs an integer, got '" + std::string(value) + "'");
    return v;
  }

  double real() const {
    const Complex c = constant();
    if (c.imag() != 0.0) fail("'" + std::string(key) + "' must be real");
    return c.real();
  }

  bool flag() const {
    if (value == "true" || value == "yes" || value == "1") return true;
    if (value == "false" || value == "no" || value == "0") return false;
    fail("'" + std::string(key) + "' needs true or false");
  }

  VectorFunction vector() const {
    std::vector<Expr> comps;
    for (auto part : split(value, ';')) comps.push_back(expr_of(part));
    return VectorFunction(std::move(comps));
  }

  /// NAME[i][j] keys.
  std::pair<int, int> index(std::string_view name) const {
    std::string_view k = key;
    auto eat = [&](std::string_view tok) {
      if (k.substr(0, tok.size()) != tok) fail("expected " + std::string(name) + "[i][j], got '" + std::string(key) + "'");
      k.remove_prefix(tok.size());
    };
    auto number = [&] {
      int v = 0;
      const auto [p, ec] = std::from_chars(k.data(), k.data() + k.size(), v);
      if (ec != std::errc()) fail("bad index in '" + std::string(key) + "'");
      k.remove_prefix(static_cast<std::size_t>(p - k.data()));
      return v;
    };
    eat(name);
    eat("[");
    const int i = number();
    eat("][");
    const int j = number();
    eat("]");
    if (!k.empty()) fail("trailing text in '" + std::string(key) + "'");
    return {i, j};
  }
};

struct PendingEntry {
  int i, j;
  Expr value;
  Line line;
};

struct PendingChain {
  std::optional<Complex> lambda;
  std::vector<VectorFunction> members;
  int line = 0;
};

void check_vector(const VectorFunction& v, int n, const std::string& where) {
  if (v.dim() != n) {
    throw ScenarioError(where + ": expected " + std::to_string(n) + " components, got " + std::to_string(v.dim()));
  }
}

std::vector<Expr> place(const std::vector<PendingEntry>& entries, int n, const char* what) {
  std::vector<Expr> out(static_cast<std::size_t>(n * n), Expr(0.0));
  for (const auto& e : entries) {
    if (e.i < 0 || e.j < 0 || e.i >= n || e.j >= n) e.line.fail(std::string(what) + " index out of range for n = " + std::to_string(n));
    out[static_cast<std::size_t>(e.i * n + e.j)] = e.value;
  }
  return out;
}

std::vector<AssociationChain> finish(const std::vector<PendingChain>& pending, int n, const char* what) {
  std::vector<AssociationChain> out;
  for (const auto& c : pending) {
    const std::string where = "line " + std::to_string(c.line) + " (" + what + ")";
    if (!c.lambda) throw ScenarioError(where + ": missing lambda");
    if (c.members.empty()) throw ScenarioError(where + ": chain has no members");
    for (const auto& m : c.members) check_vector(m, n, where);
    out.push_back({*c.lambda, c.members});
  }
  return out;
}

}  // namespace

std::string to_string(Command c) {
  for (const auto& [cmd, name] : kCommandNames)
    if (cmd == c) return name;
  return "";
}

Command parse_command(std::string_view name) {
  for (const auto& [cmd, text] : kCommandNames)
    if (text == name) return cmd;
  throw ScenarioError("unknown command '" + std::string(name) + "'");
}

Grid parse_window(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw ScenarioError("window needs 'xmin, xmax, points', got '" + std::string(text) + "'");
  Grid g;
  try {
    g.xmin = std::stod(std::string(parts[0]));
    g.xmax = std::stod(std::string(parts[1]));
    std::size_t used = 0;
    g.count = std::stoi(std::string(parts[2]), &used);
    if (used != parts[2].size()) throw std::invalid_argument("points");
  } catch (const std::logic_error&) {
    throw ScenarioError("window needs 'xmin, xmax, points', got '" + std::string(text) + "'");
  }
  if (!(g.xmin < g.xmax) || g.count < 2) throw ScenarioError("window needs xmin < xmax and at least 2 points");
  return g;
}

CMatrix Scenario::leading_or_identity() const { return leading.value_or(CMatrix::Identity(n, n)); }

std::vector<VectorFunction> Scenario::test_functions() const {
  return tests.empty() ? default_test_functions(n) : tests;
}

Scenario parse_scenario(std::string_view text) {
  Scenario s;
  std::vector<PendingEntry> potential, leading, expected;
  std::vector<PendingChain> chains, extension;
  std::vector<std::pair<Line, VectorFunction>> tests;
  std::vector<Command> requested;
  bool have_n = false, have_order = false;

  std::string section;
  int number = 0;
  std::size_t from = 0;
  while (from <= text.size()) {
    auto at = text.find('\n', from);
    if (at == std::string_view::npos) at = text.size();
    std::string_view raw = text.substr(from, at - from);
    from = at + 1;
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;

    if (raw.front() == '[') {
      if (raw.back() != ']') throw ScenarioError("line " + std::to_string(number) + ": unterminated section header");
      section = std::string(trim(raw.substr(1, raw.size() - 2)));
      if (section == "chain") chains.push_back({std::nullopt, {}, number});
      else if (section == "extension") extension.push_back({std::nullopt, {}, number});
      else if (section != "problem" && section != "potential" && section != "leading" && section != "tests" &&
               section != "expect" && section != "assert" && section != "conjugate" && section != "sample" &&
               section != "reduce" && section != "commands")
        throw ScenarioError("line " + std::to_string(number) + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw ScenarioError("line " + std::to_string(number) + ": expected key = value");
    const Line line{number, trim(raw.substr(0, eq)), trim(raw.substr(eq + 1))};
    if (section.empty()) line.fail("key outside of any section");
    const std::string_view key = line.key;
    auto unknown = [&] { line.fail("unknown key '" + std::string(key) + "' in [" + section + "]"); };

    if (section == "problem") {
      if (key == "name") s.name = std::string(line.value);
      else if (key == "n") { s.n = static_cast<int>(line.integer()); have_n = true; }
      else if (key == "order" || key == "N") { s.order = static_cast<int>(line.integer()); have_order = true; }
      else if (key == "seed") {
        const long long v = line.integer();
        if (v < 0) line.fail("seed must be non-negative");
        s.seed = static_cast<std::uint64_t>(v);
      } else if (key == "window") {
        try {
          s.window = parse_window(line.value);
        } catch (const ScenarioError& e) {
          line.fail(e.what());
        }
      } else if (key == "tol") s.tol.residual = line.real();
      else if (key == "wronskian_rel") s.tol.wronskian_rel = line.real();
      else if (key == "chain_tol") s.tol.chain = line.real();
      else if (key == "zero_rel") s.tol.zero_rel = line.real();
      else if (key == "symmetry_tol") s.tol.symmetry = line.real();
      else unknown();
    } else if (section == "potential") {
      const auto [i, j] = line.index("V");
      potential.push_back({i, j, line.expr(), line});
    } else if (section == "leading") {
      const auto [i, j] = line.index("X");
      leading.push_back({i, j, Expr(line.constant()), line});
    } else if (section == "expect") {
      const auto [i, j] = line.index("Vminus");
      expected.push_back({i, j, line.expr(), line});
    } else if (section == "chain" || section == "extension") {
      PendingChain& c = section == "chain" ? chains.back() : extension.back();
      if (key == "lambda") {
        if (c.lambda) line.fail("lambda given twice");
        c.lambda = line.constant();
      } else if (key == "member") c.members.push_back(line.vector());
      else unknown();
    } else if (section == "tests") {
      if (key != "function") unknown();
      tests.emplace_back(line, line.vector());
    } else if (section == "assert") {
      if (key == "no-lower-order-intertwiner") s.no_lower_order = line.flag();
      else if (key == "verdict") {
        const std::string v(line.value);
        if (v != "Reducible" && v != "Irreducible" && v != "AbsolutelyIrreducible") line.fail("unknown verdict '" + v + "'");
        s.expect_verdict = v;
      } else unknown();
    } else if (section == "conjugate") {
      if (key != "mode") unknown();
      const std::string m(line.value);
      if (m != "build" && m != "hermitian" && m != "transpose" && m != "complex_conjugate" && m != "conjugate")
        line.fail("unknown conjugate mode '" + m + "'");
      s.conjugate_mode = m;
    } else if (section == "sample") {
      if (key != "window") unknown();
      try {
        s.sample = parse_window(line.value);
      } catch (const ScenarioError& e) {
        line.fail(e.what());
      }
    } else if (section == "reduce") {
      if (key != "probes") unknown();
      s.probes = static_cast<int>(line.integer());
      if (s.probes < 0) line.fail("probes must be non-negative");
    } else if (section == "commands") {
      if (key != "run") unknown();
      for (auto name : split(line.value, ',')) {
        if (name.empty()) continue;
        try {
          requested.push_back(parse_command(name));
        } catch (const ScenarioError& e) {
          line.fail(e.what());
        }
      }
    }
  }

  if (!have_n || !have_order) throw ScenarioError("[problem] needs n and order");
  if (s.n < 1) throw ScenarioError("n must be at least 1");
  if (s.order < 1) throw ScenarioError("order must be at least 1");
  s.potential = place(potential, s.n, "potential");
  if (!leading.empty()) {
    const auto entries = place(leading, s.n, "leading");
    CMatrix x(s.n, s.n);
    for (int i = 0; i < s.n; ++i)
      for (int j = 0; j < s.n; ++j) x(i, j) = entries[static_cast<std::size_t>(i * s.n + j)].value();
    s.leading = x;
  }
  if (!expected.empty()) s.expected_potential = place(expected, s.n, "expect");
  s.chains = finish(chains, s.n, "chain");
  s.extension = finish(extension, s.n, "extension");
  for (const auto& [line, v] : tests) {
    if (v.dim() != s.n) line.fail("test function needs " + std::to_string(s.n) + " components");
    s.tests.push_back(v);
  }
  s.requested = std::move(requested);
  validate(s);
  return s;
}

void validate(Scenario& s) {
  if (s.requested.empty()) throw ScenarioError("[commands] run = ... lists no command");
  int total = 0;
  for (const auto& c : s.chains) total += c.length();
  if (total != s.n * s.order) {
    throw ScenarioError("chains hold " + std::to_string(total) + " members, n * order = " +
                        std::to_string(s.n * s.order));
  }
  if (s.window.count < 2 || !(s.window.xmin < s.window.xmax)) throw ScenarioError("invalid window");

  auto wants = [&](Command c) { return std::find(s.requested.begin(), s.requested.end(), c) != s.requested.end(); };
  bool need[kCommandNames.size()] = {};
  for (Command c : s.requested) need[static_cast<int>(c)] = true;
  if (wants(Command::Susy)) need[static_cast<int>(Command::Conjugate)] = true;
  for (Command c : {Command::FinalPotential, Command::VerifyIntertwining, Command::Conjugate, Command::Susy,
                    Command::SamplePotential})
    if (need[static_cast<int>(c)]) need[static_cast<int>(Command::Build)] = true;

  if (need[static_cast<int>(Command::Conjugate)] && s.conjugate_mode == "build" && s.extension.empty()) {
    throw ScenarioError("conjugate mode 'build' needs [extension] chains");
  }
  if (s.expect_verdict && !need[static_cast<int>(Command::Reduce)]) {
    throw ScenarioError("[assert] verdict needs the reduce command");
  }
  s.commands.clear();
  for (const auto& [c, name] : kCommandNames)
    if (need[static_cast<int>(c)]) s.commands.push_back(c);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot read scenario '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace intertwine
