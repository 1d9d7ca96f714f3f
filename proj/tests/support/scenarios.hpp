#pragma once

// Seeded random scenarios with a constant potential V = S diag(mu) S^-1.
//
// In the eigenbasis of V the system decouples, so a family made of N chains
// u_m p(x) e^{kx} per direction u_m (distinct k within a direction) spans a
// fundamental system of a constant-coefficient ODE in each direction. Its
// Wronskian is c * exp(sum k * x) with c != 0, so it never vanishes.

#include <algorithm>
#include <random>
#include <vector>

#include "support/chains.hpp"

namespace intertwine::testing {

struct RandomScenario {
  int n = 1;
  int order = 1;
  CMatrix basis;           // S, columns are eigen-directions of V
  std::vector<Complex> mu;  // eigenvalues of V
  MatrixHamiltonian h = MatrixHamiltonian::free(1);
  ChainSet chains;
};

class ScenarioFactory {
 public:
  explicit ScenarioFactory(unsigned seed) : rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  /// Well-conditioned S = I + small perturbation and real distinct mu.
  void potential(RandomScenario& s) {
    const int n = s.n;
    s.basis = CMatrix::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s.basis(i, j) = Complex{uniform(-0.4, 0.4), uniform(-0.2, 0.2)};
    s.mu.clear();
    for (int m = 0; m < n; ++m) s.mu.emplace_back(uniform(-1.0, 1.0) + 2.5 * m, 0.0);
    CVector d(n);
    for (int m = 0; m < n; ++m) d(m) = s.mu[static_cast<std::size_t>(m)];
    const CMatrix v = s.basis * d.asDiagonal() * s.basis.inverse();
    std::vector<Expr> entries;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) entries.emplace_back(v(i, j));
    s.h = MatrixHamiltonian(n, entries);
  }

  std::vector<Complex> direction(const RandomScenario& s, int m) const {
    std::vector<Complex> u;
    for (int i = 0; i < s.n; ++i) u.push_back(s.basis(i, m));
    return u;
  }

  /// Exponent drawn from real growth rates and trigonometric frequencies,
  /// at least 0.3 away from every exponent in `used`.
  Complex exponent(std::vector<Complex>& used) {
    for (;;) {
      Complex k;
      switch (pick(0, 2)) {
        case 0: k = {uniform(-1.2, 1.2), 0.0}; break;
        case 1: k = {0.0, uniform(-1.5, 1.5)}; break;
        default: k = {uniform(-0.8, 0.8), uniform(-1.0, 1.0)}; break;
      }
      if (std::abs(k) < 0.2) continue;
      bool ok = true;
      for (Complex u : used) ok = ok && std::abs(u - k) > 0.3;
      if (!ok) continue;
      used.push_back(k);
      return k;
    }
  }

  /// Random n x n system of order N: every direction receives chains whose
  /// lengths sum to N.
  RandomScenario make(int n, int order) {
    RandomScenario s;
    s.n = n;
    s.order = order;
    potential(s);
    for (int m = 0; m < n; ++m) {
      std::vector<Complex> used;
      int left = order;
      while (left > 0) {
        const int len = pick(1, left);
        left -= len;
        const Complex k = exponent(used);
        s.chains.chains.push_back(exp_chain(k, len, direction(s, m), s.mu[static_cast<std::size_t>(m)]));
      }
    }
    std::shuffle(s.chains.chains.begin(), s.chains.chains.end(), rng_);
    return s;
  }

  /// Scenario whose operator factors as P * prod (lambda_l - H)^{k_l} with P
  /// of order `residual`. Each injected lambda_l lies below every mu, so in
  /// every direction the pair of exponents +-sqrt(mu_m - lambda_l) carries two
  /// chains of length at least k_l; one of them has length exactly k_l.
  RandomScenario make_minimizable(int n, int residual, const std::vector<std::pair<double, int>>& factors) {
    RandomScenario s;
    s.n = n;
    potential(s);
    int order = residual;
    for (const auto& f : factors) order += 2 * f.second;
    s.order = order;
    for (int m = 0; m < n; ++m) {
      std::vector<Complex> used;
      int budget = residual;
      const auto u = direction(s, m);
      const Complex mu = s.mu[static_cast<std::size_t>(m)];
      for (std::size_t l = 0; l < factors.size(); ++l) {
        const Complex q = std::sqrt(mu - factors[l].first);
        const int k = factors[l].second;
        const int extra_a = (m == 0) ? 0 : pick(0, budget);
        budget -= extra_a;
        const int extra_b = pick(0, budget);
        budget -= extra_b;
        used.push_back(q);
        used.push_back(-q);
        s.chains.chains.push_back(exp_chain(q, k + extra_a, u, mu));
        s.chains.chains.push_back(exp_chain(-q, k + extra_b, u, mu));
      }
      while (budget > 0) {
        const int len = pick(1, budget);
        budget -= len;
        s.chains.chains.push_back(exp_chain(exponent(used), len, u, mu));
      }
    }
    std::shuffle(s.chains.chains.begin(), s.chains.chains.end(), rng_);
    return s;
  }

  /// Full chain basis of ker prod (H - lambda_l)^{kappa_l} for the eigenvalues
  /// of `s.chains`: in every direction the exponents +-sqrt(mu_m - lambda_l)
  /// carry one chain of length kappa_l each.
  static std::vector<AssociationChain> extension(const RandomScenario& s) {
    const auto summary = spectral_summary(s.chains, s.n);
    std::vector<AssociationChain> out;
    for (const auto& e : summary.entries) {
      for (int m = 0; m < s.n; ++m) {
        const Complex mu = s.mu[static_cast<std::size_t>(m)];
        const Complex k = std::sqrt(mu - e.lambda);
        std::vector<Complex> u;
        for (int i = 0; i < s.n; ++i) u.push_back(s.basis(i, m));
        out.push_back(exp_chain(k, e.kappa(), u, mu));
        out.push_back(exp_chain(-k, e.kappa(), u, mu));
        out[out.size() - 2].lambda = e.lambda;
        out.back().lambda = e.lambda;
      }
    }
    return out;
  }

  std::mt19937& rng() { return rng_; }

 private:
  std::mt19937 rng_;
};

}  // namespace intertwine::testing
