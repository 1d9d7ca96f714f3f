#include "intertwine/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "intertwine/conjugate.hpp"
#include "intertwine/errors.hpp"
#include "intertwine/minimize.hpp"
#include "intertwine/numkit.hpp"
#include "intertwine/reduce.hpp"

namespace intertwine {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6e", v + 0.0);  // no negative zero
  return buf;
}

std::string cplx(Complex c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%.6e%+.6ei)", c.real() + 0.0, c.imag() + 0.0);
  return buf;
}

std::string matrix(const CMatrix& m) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out += i ? ", [" : "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? ", " : "") + cplx(m(i, j));
    out += "]";
  }
  return out + "]";
}

std::string window_text(const Grid& g) {
  return "[" + num(g.xmin) + ", " + num(g.xmax) + "], " + std::to_string(g.count) + " points";
}

std::string factors_text(const std::vector<std::pair<Complex, int>>& f) {
  if (f.empty()) return "none";
  std::string out;
  for (const auto& [lambda, k] : f) out += (out.empty() ? "" : " ") + cplx(lambda) + "^" + std::to_string(k);
  return out;
}

std::string prefix_text(const std::vector<int>& p) {
  std::string out = "{";
  for (std::size_t i = 0; i < p.size(); ++i) out += (i ? "," : "") + std::to_string(p[i]);
  return out + "}";
}

const char* verdict_word(bool pass) { return pass ? "pass" : "fail"; }

void residual(Report& r, const std::string& key, const ResidualReport& rep) {
  r.add(key + ".residual", num(rep.residual));
  r.add(key + ".scale", num(rep.scale));
  r.add(key + ".relative", num(rep.relative()));
  r.add(key + ".tolerance", num(rep.tolerance) + " (relative)");
  r.add(key + ".status", verdict_word(rep.pass));
}

struct Context {
  const Scenario& s;
  MatrixHamiltonian h;
  ChainSet cs;
  CMatrix leading;
  std::vector<double> grid;
  Family tests;
  std::optional<MatrixDifferentialOperator> q;
  std::optional<Hamiltonian> hm;
  std::optional<MatrixDifferentialOperator> q_plus;
  std::optional<SusyPolynomial> poly;
  std::optional<std::string> csv;
};

const Hamiltonian& minus(Context& c) {
  if (!c.hm) c.hm = final_hamiltonian(*c.q);
  return *c.hm;
}

bool verify_chains(Context& c, Report& r) {
  bool pass = true;
  auto run = [&](const std::vector<AssociationChain>& chains, const std::string& label) {
    for (std::size_t k = 0; k < chains.size(); ++k) {
      const auto rep = verify_chain(c.h, chains[k], c.grid, c.s.tol.chain);
      const std::string key = label + "[" + std::to_string(k) + "]";
      r.add(key + ".lambda", cplx(chains[k].lambda));
      r.add(key + ".length", std::to_string(chains[k].length()));
      r.add(key + ".max_residual", num(rep.max_residual()));
      r.add(key + ".scale", num(rep.scale));
      r.add(key + ".status", verdict_word(rep.pass));
      pass = pass && rep.pass;
    }
  };
  r.add("tolerance", num(c.s.tol.chain) + " (relative to the largest term)");
  run(c.s.chains, "chain");
  run(c.s.extension, "extension");
  return pass;
}

bool build(Context& c, Report& r) {
  const auto summary = spectral_summary(c.cs, c.s.n);
  for (std::size_t k = 0; k < summary.entries.size(); ++k) {
    const auto& e = summary.entries[k];
    std::string blocks;
    for (int b : e.block_orders) blocks += (blocks.empty() ? "" : ",") + std::to_string(b);
    r.add("spectrum[" + std::to_string(k) + "]", cplx(e.lambda) + " blocks {" + blocks + "}");
  }
  for (const auto& w : summary.warnings) r.add("warning", w);

  c.q = build_intertwiner(Hamiltonian(c.h), kernel_basis(c.cs, c.s.n), c.leading, c.s.window, c.s.tol);
  r.add("order", std::to_string(c.q->order()));
  r.add("leading", matrix(c.leading));

  double worst = std::numeric_limits<double>::infinity();
  for (double x : c.grid) {
    const auto w = wronskian(c.cs, c.s.n, c.s.order, x);
    worst = std::min(worst, numkit::conditioning_ratio(w.matrix, w.det));
  }
  r.add("wronskian.min_ratio", num(worst));
  r.add("wronskian.threshold", num(c.s.tol.wronskian_rel));
  const auto k = kernel_residual(*c.q, c.grid, c.s.tol.residual);
  residual(r, "kernel", k);
  return k.pass;
}

bool final_potential_cmd(Context& c, Report& r) {
  const Hamiltonian& hm = minus(c);
  double diff = 0.0, scale = 1.0, expect_diff = 0.0;
  const int n = c.s.n;
  for (double x : c.grid) {
    const CMatrix jet = hm.potential(x);
    const CMatrix jacobi = final_potential(*c.q, x);
    diff = std::max(diff, (jet - jacobi).cwiseAbs().maxCoeff());
    scale = std::max(scale, jet.cwiseAbs().maxCoeff());
    if (c.s.expected_potential) {
      CMatrix want(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) want(i, j) = evaluate((*c.s.expected_potential)[static_cast<std::size_t>(i * n + j)], x);
      expect_diff = std::max(expect_diff, (jet - want).cwiseAbs().maxCoeff());
    }
  }
  const double tol = c.s.tol.residual;
  bool pass = diff <= tol * scale;
  r.add("routes.max_difference", num(diff));
  r.add("routes.scale", num(scale));
  r.add("routes.tolerance", num(tol) + " (relative)");
  r.add("routes.status", verdict_word(pass));
  if (c.s.expected_potential) {
    const bool ok = expect_diff <= tol * scale;
    r.add("expected.max_difference", num(expect_diff));
    r.add("expected.tolerance", num(tol) + " (relative)");
    r.add("expected.status", verdict_word(ok));
    pass = pass && ok;
  }
  const Grid probe{c.s.window.xmin, c.s.window.xmax, 5};
  for (double x : probe.points()) r.add("at[" + num(x) + "]", matrix(hm.potential(x)));
  return pass;
}

bool verify_intertwining(Context& c, Report& r) {
  const auto rep = intertwining_residual(*c.q, Hamiltonian(c.h), minus(c), c.tests, c.grid, c.s.tol.residual);
  r.add("tests", std::to_string(c.tests.size()));
  residual(r, "intertwining", rep);
  return rep.pass;
}

bool minimize_cmd(Context& c, Report& r) {
  const auto cert = minimizable_factors(spectral_summary(c.cs, c.s.n), c.s.n);
  r.add("minimizable", cert.minimizable() ? "true" : "false");
  r.add("factors", factors_text(cert.factors));
  if (!cert.minimizable()) return true;
  r.add("residual_order", std::to_string(cert.residual_order));
  const auto m = minimize(c.h, c.cs, cert, c.leading, c.s.window, c.s.tol, c.s.test_functions());
  r.add("p.order", std::to_string(m.p.order()));
  residual(r, "composition", m.residual);
  return m.residual.pass;
}

bool conjugate_cmd(Context& c, Report& r) {
  r.add("mode", c.s.conjugate_mode);
  if (c.s.conjugate_mode == "build") {
    auto res = build_conjugate(*c.q, minus(c), ExtensionBasis{c.s.extension}, c.s.window, c.s.tol, c.s.test_functions());
    c.q_plus = res.q_plus;
    c.poly = res.polynomial;
    r.add("order", std::to_string(res.q_plus.order()));
    r.add("polynomial", factors_text(res.polynomial.roots));
    r.add("normalization", cplx(res.normalization));
    r.add("leading", matrix(res.q_plus.leading()));
    residual(r, "product", res.product);
    return res.product.pass;
  }
  const auto mode = parse_symmetry_mode(c.s.conjugate_mode);
  c.q_plus = conjugate_by_symmetry(*c.q, mode, Hamiltonian(c.h), minus(c), c.s.window, c.s.tol);
  c.poly = susy_polynomial(spectral_summary(c.cs, c.s.n), c.s.order);
  r.add("order", std::to_string(c.q_plus->order()));
  r.add("polynomial", factors_text(c.poly->roots));
  r.add("leading", matrix(c.q_plus->leading()));
  const auto rep = intertwining_residual(*c.q_plus, minus(c), Hamiltonian(c.h), c.tests, c.grid, c.s.tol.residual);
  residual(r, "intertwining", rep);
  return rep.pass;
}

bool susy(Context& c, Report& r) {
  const auto a = verify_susy_algebra(*c.q_plus, *c.q, Hamiltonian(c.h), minus(c), *c.poly, c.tests, c.grid,
                                     c.s.no_lower_order, c.s.tol.residual);
  residual(r, "plus_minus", a.plus_minus);
  if (a.minus_plus) residual(r, "minus_plus", *a.minus_plus);
  else r.add("minus_plus.status", "not checked (no-lower-order-intertwiner not asserted)");
  r.add("nilpotency", num(a.nilpotency) + " (exact by block structure)");
  residual(r, "intertwining_minus", a.intertwining_minus);
  residual(r, "intertwining_plus", a.intertwining_plus);
  r.add("degree_identity", std::to_string(c.poly->order) + " + " + std::to_string(c.poly->conjugate_order) +
                               " = 2 * " + std::to_string(c.poly->degree()));
  r.add("degree_identity.status", verdict_word(a.degree_identity));
  return a.pass();
}

bool reduce_cmd(Context& c, Report& r) {
  const auto v = classify_reducibility(c.h, c.cs, c.leading, c.s.window, c.s.tol, c.s.seed, c.s.probes,
                                       c.s.test_functions());
  r.add("verdict", to_string(v.verdict));
  if (c.s.order == 1) r.add("note", "order 1 has no proper factor; the verdict is vacuous");
  r.add("regime", v.exact ? "exact (no repeated eigenvalue)"
                          : "probabilistic (" + std::to_string(c.s.probes) + " random mixing probes per order)");
  r.add("seed", std::to_string(v.seed));
  r.add("samples", std::to_string(v.samples) + " seeded points in [" + num(-v.sample_radius) + ", " +
                       num(v.sample_radius) + "]");
  r.add("threshold", num(c.s.tol.wronskian_rel) + " (conditioning ratio)");
  for (std::size_t k = 0; k < v.evidence.size(); ++k) {
    const auto& e = v.evidence[k];
    const std::string key = "candidate[" + std::to_string(k) + "]";
    r.add(key, "M=" + std::to_string(e.candidate.order) + " prefix=" + prefix_text(e.candidate.prefix) +
                   (e.candidate.probe ? " probe" : "") + " status=" + to_string(e.status) +
                   " min_window_ratio=" + num(e.min_window_ratio) + " max_sample_ratio=" + num(e.max_sample_ratio));
  }
  bool pass = true;
  if (v.witness) r.add("witness", "M=" + std::to_string(v.order) + " prefix=" + prefix_text(v.witness->prefix));
  if (v.factorization) {
    r.add("factorization.p_order", std::to_string(v.factorization->p.order()));
    r.add("factorization.k_order", std::to_string(v.factorization->k.order()));
    residual(r, "factorization", v.factorization->residual);
    pass = v.factorization->residual.pass;
  }
  if (c.s.expect_verdict) {
    const bool ok = *c.s.expect_verdict == to_string(v.verdict);
    r.add("expected_verdict", *c.s.expect_verdict);
    r.add("expected_verdict.status", verdict_word(ok));
    pass = pass && ok;
  }
  return pass;
}

bool sample_cmd(Context& c, Report& r) {
  const Grid g = c.s.sample_grid();
  c.csv = sample_potential(*c.q, g);
  std::size_t flagged = 0;
  std::istringstream in(*c.csv);
  std::string row;
  std::getline(in, row);
  while (std::getline(in, row))
    if (row.substr(row.rfind(',') + 1) != "ok") ++flagged;
  r.add("file", "potential.csv");
  r.add("window", window_text(g));
  r.add("flagged_rows", std::to_string(flagged));
  return true;
}

bool needs_build(Command cmd) {
  return cmd == Command::FinalPotential || cmd == Command::VerifyIntertwining || cmd == Command::Conjugate ||
         cmd == Command::Susy || cmd == Command::SamplePotential;
}

}  // namespace

void Report::section(std::string name) { sections_.push_back({std::move(name), {}}); }

void Report::add(std::string key, std::string value) {
  if (sections_.empty()) section("report");
  sections_.back().second.emplace_back(std::move(key), std::move(value));
}

std::string Report::str() const {
  std::string out;
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    if (i) out += "\n";
    out += "[" + sections_[i].first + "]\n";
    for (const auto& [k, v] : sections_[i].second) out += k + " = " + v + "\n";
  }
  return out;
}

std::string sample_potential(const MatrixDifferentialOperator& q, const Grid& grid) {
  const int n = q.dim();
  std::string out = "x";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::string name = "V[" + std::to_string(i) + "][" + std::to_string(j) + "]";
      out += "," + name + ".re," + name + ".im";
    }
  out += ",flag\n";
  char buf[40];
  for (double x : grid.points()) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    out += buf;
    std::string flag = "ok";
    CMatrix v;
    try {
      v = final_potential(q, x);
    } catch (const Error& e) {
      flag = e.kind();
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (flag != "ok") {
          out += ",nan,nan";
          continue;
        }
        std::snprintf(buf, sizeof buf, ",%.17g", v(i, j).real());
        out += buf;
        std::snprintf(buf, sizeof buf, ",%.17g", v(i, j).imag());
        out += buf;
      }
    out += "," + flag + "\n";
  }
  return out;
}

RunResult run_scenario(Scenario s, const RunOptions& opts, std::ostream* log) {
  if (opts.seed) s.seed = *opts.seed;
  if (opts.window) s.window = *opts.window;
  if (opts.tolerance) s.tol.residual = *opts.tolerance;
  validate(s);

  Report r;
  r.section("scenario");
  r.add("name", s.name.empty() ? "unnamed" : s.name);
  r.add("n", std::to_string(s.n));
  r.add("order", std::to_string(s.order));
  r.add("seed", std::to_string(s.seed));
  r.add("window", window_text(s.window));
  r.add("tolerance.residual", num(s.tol.residual) + " (operator identities, relative to the largest term)");
  r.add("tolerance.wronskian", num(s.tol.wronskian_rel) +
                                   " (|W| over the product of column norms and the Hadamard bound)");
  r.add("tolerance.singular", num(s.tol.singular_rel));
  r.add("tolerance.chain", num(s.tol.chain));
  r.add("tolerance.zero", num(s.tol.zero_rel));
  r.add("tolerance.symmetry", num(s.tol.symmetry));
  r.add("convention.nonvanishing", "Wronskian ratio above tolerance.wronskian at every window point");
  r.add("convention.t_plus", kTPlusConvention);
  std::string requested, scheduled;
  for (Command c : s.requested) requested += (requested.empty() ? "" : ", ") + to_string(c);
  for (Command c : s.commands) scheduled += (scheduled.empty() ? "" : ", ") + to_string(c);
  r.add("commands.requested", requested);
  r.add("commands.executed", scheduled);

  Context c{s, s.hamiltonian(), s.chain_set(), s.leading_or_identity(), s.window.points(),
            expr_family(s.n, s.test_functions()), {}, {}, {}, {}, {}};
  RunResult out;
  for (Command cmd : s.commands) {
    const std::string name = to_string(cmd);
    r.section(name);
    if ((needs_build(cmd) && !c.q) || (cmd == Command::Susy && !c.q_plus)) {
      r.add("status", "skipped");
      r.add("reason", !c.q ? "build did not complete" : "conjugate did not complete");
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      switch (cmd) {
        case Command::VerifyChains: pass = verify_chains(c, r); break;
        case Command::Build: pass = build(c, r); break;
        case Command::FinalPotential: pass = final_potential_cmd(c, r); break;
        case Command::VerifyIntertwining: pass = verify_intertwining(c, r); break;
        case Command::Minimize: pass = minimize_cmd(c, r); break;
        case Command::Conjugate: pass = conjugate_cmd(c, r); break;
        case Command::Susy: pass = susy(c, r); break;
        case Command::Reduce: pass = reduce_cmd(c, r); break;
        case Command::SamplePotential: pass = sample_cmd(c, r); break;
      }
      r.add("status", verdict_word(pass));
      if (!pass) out.errors.push_back(name + ": check failed");
    } catch (const Error& e) {
      r.add("status", "fail");
      r.add("error", e.kind());
      r.add("error.message", e.what());
      if (const auto* sw = dynamic_cast<const SingularWronskian*>(&e)) r.add("error.x", num(sw->x()));
      out.errors.push_back(name + ": " + e.kind() + ": " + e.what());
    }
    if (!pass) out.exit_code = 1;
    if (log) {
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
      *log << name << ": " << verdict_word(pass) << " in " << dt.count() << " s\n";
    }
  }

  r.section("summary");
  r.add("status", out.exit_code == 0 ? "pass" : "fail");
  r.add("exit_code", std::to_string(out.exit_code));
  for (const auto& e : out.errors) r.add("failure", e);
  out.report = r.str();
  out.csv = std::move(c.csv);
  return out;
}

int run(const std::string& path, const std::string& out_dir, const RunOptions& opts, std::ostream* log) {
  std::ostream& err = log ? *log : std::cerr;
  RunResult res;
  try {
    res = run_scenario(load_scenario(path), opts, log);
  } catch (const SyntaxError& e) {
    err << "error: SyntaxError: " << e.what() << "\n";
    return 2;
  } catch (const ScenarioError& e) {
    err << "error: ScenarioError: " << e.what() << "\n";
    return 2;
  }
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  std::ofstream(dir / "report.txt", std::ios::binary) << res.report;
  if (res.csv) std::ofstream(dir / "potential.csv", std::ios::binary) << *res.csv;
  for (const auto& e : res.errors) err << "error: " << e << "\n";
  return res.exit_code;
}

}  // namespace intertwine
