#include "intertwine/reduce.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <stdexcept>

#include "intertwine/errors.hpp"
#include "intertwine/numkit.hpp"

namespace intertwine {
namespace {

// Offsets of each chain's first member in the flattened basis.
std::vector<int> chain_offsets(const ChainSet& cs) {
  std::vector<int> off;
  int at = 0;
  for (const auto& c : cs.chains) {
    off.push_back(at);
    at += c.length();
  }
  return off;
}

void assignments(const ChainSet& cs, std::size_t chain, int remaining, std::vector<int>& cur,
                 std::vector<std::vector<int>>& out) {
  if (chain == cs.chains.size()) {
    if (remaining == 0) out.push_back(cur);
    return;
  }
  const int len = cs.chains[chain].length();
  for (int p = std::min(len, remaining); p >= 0; --p) {
    cur.push_back(p);
    assignments(cs, chain + 1, remaining - p, cur, out);
    cur.pop_back();
  }
}

// Random mixing within each eigenvalue: chain c becomes
//   Phi_c + sum_{c' != c, L_c' <= L_c} a_{c,c'} Phi_c' (aligned at the top),
// which keeps the chain relations and, for generic a, spans the same space.
CMatrix random_mixing(const ChainSet& cs, std::mt19937_64& rng) {
  const int d = cs.total();
  const auto off = chain_offsets(cs);
  std::normal_distribution<double> g;
  CMatrix w = CMatrix::Identity(d, d);
  for (std::size_t c = 0; c < cs.chains.size(); ++c) {
    const int lc = cs.chains[c].length();
    for (std::size_t o = 0; o < cs.chains.size(); ++o) {
      if (o == c || !same_eigenvalue(cs.chains[o].lambda, cs.chains[c].lambda)) continue;
      const int lo = cs.chains[o].length();
      if (lo > lc) continue;
      const Complex a{g(rng), g(rng)};
      for (int i = lc - lo; i < lc; ++i) w(off[o] + i - (lc - lo), off[c] + i) += a;
    }
  }
  return w;
}

Family mixed_family(const ChainSet& cs, int n, const SubkernelCandidate& c) {
  const Family base = expr_family(n, cs.flattened());
  return c.mixing.size() == 0 ? base : mix(base, c.mixing);
}

KernelBasis split_basis(const ChainSet& cs, int n, const SubkernelCandidate& c, bool prefix) {
  const auto off = chain_offsets(cs);
  std::vector<int> idx;
  std::vector<ChainShape> shapes;
  for (std::size_t k = 0; k < cs.chains.size(); ++k) {
    const int len = cs.chains[k].length();
    const int p = c.prefix[k];
    const int from = prefix ? 0 : p;
    const int to = prefix ? p : len;
    for (int i = from; i < to; ++i) idx.push_back(off[k] + i);
    if (to > from) shapes.push_back({cs.chains[k].lambda, to - from});
  }
  return KernelBasis{select(mixed_family(cs, n, c), idx), shapes};
}

// A pointwise measure cannot see a simple zero between grid points (and for a
// single scalar member it cannot see one at all, since the ratio of a 1 x 1
// matrix is 1). When the determinant turns by more than a right angle between
// neighbours, bisect on its component along the left value and return
// |det(root)| relative to the bracket; a genuine crossing drives this to
// rounding level.
template <typename Det>
double crossing_depth(const Det& det, double a, double b, Complex da, Complex db) {
  const Complex ref = da;
  auto side = [&](Complex d) { return std::real(d * std::conj(ref)); };
  if (side(db) >= 0.0) return 1.0;
  const double scale = std::max(std::abs(da), std::abs(db));
  if (scale == 0.0) return 0.0;
  double lo = a, hi = b;
  Complex mid_value = db;
  for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto dm = det(mid);
    if (!dm) return 0.0;
    mid_value = *dm;
    if (side(*dm) >= 0.0) lo = mid; else hi = mid;
  }
  double best = std::abs(mid_value);
  for (double t : {lo, hi}) {
    if (const auto d = det(t)) best = std::min(best, std::abs(*d));
  }
  return best / scale;
}

bool exact_regime(const ChainSet& cs) {
  for (std::size_t a = 0; a < cs.chains.size(); ++a)
    for (std::size_t b = a + 1; b < cs.chains.size(); ++b)
      if (same_eigenvalue(cs.chains[a].lambda, cs.chains[b].lambda)) return false;
  return true;
}

}  // namespace

int SubkernelCandidate::selected() const {
  int s = 0;
  for (int p : prefix) s += p;
  return s;
}

std::vector<SubkernelCandidate> enumerate_subkernels(const ChainSet& cs, int n, int residual_order, int probes,
                                                     std::uint64_t seed) {
  const int order = n > 0 ? cs.total() / n : 0;
  if (residual_order < 1 || residual_order >= order) {
    throw std::invalid_argument("enumerate_subkernels needs 1 <= M < N");
  }
  std::vector<std::vector<int>> all;
  std::vector<int> cur;
  assignments(cs, 0, n * residual_order, cur, all);

  std::vector<SubkernelCandidate> out;
  for (const auto& a : all) out.push_back({residual_order, a, CMatrix(), false});
  if (!exact_regime(cs) && !all.empty()) {
    std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(residual_order));
    std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
    for (int r = 0; r < probes; ++r) {
      CMatrix w = random_mixing(cs, rng);
      out.push_back({residual_order, all[pick(rng)], std::move(w), true});
    }
  }
  return out;
}

KernelBasis candidate_basis(const ChainSet& cs, int n, const SubkernelCandidate& c) {
  return split_basis(cs, n, c, true);
}

KernelBasis remainder_basis(const ChainSet& cs, int n, const SubkernelCandidate& c) {
  return split_basis(cs, n, c, false);
}

std::string to_string(WronskianStatus s) {
  switch (s) {
    case WronskianStatus::Nonvanishing: return "nonvanishing-on-window";
    case WronskianStatus::VanishesSomewhere: return "vanishes-somewhere";
    case WronskianStatus::IdenticallyZero: return "identically-zero";
  }
  return "";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Reducible: return "Reducible";
    case Verdict::Irreducible: return "Irreducible";
    case Verdict::AbsolutelyIrreducible: return "AbsolutelyIrreducible";
  }
  return "";
}

CandidateEvidence classify_candidate(const ChainSet& cs, int n, const SubkernelCandidate& c, const Grid& window,
                                     const std::vector<double>& samples, double threshold) {
  const KernelBasis kb = candidate_basis(cs, n, c);
  auto ratio = [&](double x) -> std::optional<double> {
    try {
      const auto w = wronskian(kb.family, c.order, x);
      return numkit::conditioning_ratio(w.matrix, w.det);
    } catch (const DivisionByZero&) {
      return std::nullopt;
    }
  };
  auto det = [&](double x) -> std::optional<Complex> {
    try {
      return wronskian(kb.family, c.order, x).det;
    } catch (const DivisionByZero&) {
      return std::nullopt;
    }
  };
  CandidateEvidence ev;
  ev.candidate = c;
  ev.min_window_ratio = 1.0;
  bool window_ok = true;
  const auto xs = window.points();
  std::optional<Complex> prev;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto r = ratio(xs[i]);
    if (!r) {
      window_ok = false;
      ev.min_window_ratio = 0.0;
      prev.reset();
      continue;
    }
    ev.min_window_ratio = std::min(ev.min_window_ratio, *r);
    ev.max_sample_ratio = std::max(ev.max_sample_ratio, *r);
    if (*r <= threshold) window_ok = false;
    const auto d = det(xs[i]);
    if (window_ok && prev && d) {
      const auto dip = crossing_depth(det, xs[i - 1], xs[i], *prev, *d);
      if (dip <= threshold) {
        window_ok = false;
        ev.min_window_ratio = std::min(ev.min_window_ratio, dip);
      }
    }
    prev = d;
  }
  for (double x : samples) {
    if (const auto r = ratio(x)) ev.max_sample_ratio = std::max(ev.max_sample_ratio, *r);
  }
  if (ev.max_sample_ratio <= threshold) {
    ev.status = WronskianStatus::IdenticallyZero;
  } else if (window_ok) {
    ev.status = WronskianStatus::Nonvanishing;
  } else {
    ev.status = WronskianStatus::VanishesSomewhere;
  }
  return ev;
}

Factorization factorize(const MatrixHamiltonian& h_plus, const ChainSet& cs, const SubkernelCandidate& c,
                        const CMatrix& leading, const Grid& window, const Tolerances& tol,
                        const std::vector<VectorFunction>& tests) {
  const int n = h_plus.dim();
  const Hamiltonian hp(h_plus);
  const auto p = build_intertwiner(hp, candidate_basis(cs, n, c), CMatrix::Identity(n, n), window, tol);
  const Hamiltonian h_m = final_hamiltonian(p);

  const KernelBasis rest = remainder_basis(cs, n, c);
  const KernelBasis pushed{image(p, rest.family), rest.chains};
  const auto k = build_intertwiner(h_m, pushed, leading, window, tol);
  const auto q = build_intertwiner(hp, kernel_basis(cs, n), leading, window, tol);

  const Family probes = expr_family(n, tests.empty() ? default_test_functions(n) : tests);
  const auto residual = make_report(compare_families(image(q, probes), image(k, image(p, probes)), window.points()),
                                    tol.residual);
  if (!residual.pass) throw CompositionDefect(residual.relative());
  return Factorization{p, h_m, k, residual};
}

ReducibilityVerdict classify_reducibility(const MatrixHamiltonian& h_plus, const ChainSet& cs, const CMatrix& leading,
                                          const Grid& window, const Tolerances& tol, std::uint64_t seed, int probes,
                                          const std::vector<VectorFunction>& tests) {
  const int n = h_plus.dim();
  const int order = cs.total() / n;
  ReducibilityVerdict v;
  v.window = window;
  v.seed = seed;
  v.exact = exact_regime(cs);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-v.sample_radius, v.sample_radius);
  std::vector<double> samples(static_cast<std::size_t>(v.samples));
  for (auto& s : samples) s = u(rng);

  bool any_nonzero = false;
  for (int m = 1; m < order; ++m) {
    for (const auto& c : enumerate_subkernels(cs, n, m, probes, seed)) {
      auto ev = classify_candidate(cs, n, c, window, samples, tol.wronskian_rel);
      const WronskianStatus status = ev.status;
      v.evidence.push_back(std::move(ev));
      if (status == WronskianStatus::IdenticallyZero) continue;
      any_nonzero = true;
      if (status == WronskianStatus::Nonvanishing) {
        v.verdict = Verdict::Reducible;
        v.order = m;
        v.witness = c;
        v.factorization = factorize(h_plus, cs, c, leading, window, tol, tests);
        return v;
      }
    }
  }
  v.verdict = any_nonzero ? Verdict::Irreducible : Verdict::AbsolutelyIrreducible;
  return v;
}

}  // namespace intertwine
