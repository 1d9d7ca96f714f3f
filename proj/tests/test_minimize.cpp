#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "intertwine/errors.hpp"
#include "intertwine/minimize.hpp"
#include "support/scenarios.hpp"

using namespace intertwine;
using testing::scalar_chain;

namespace {
const Expr x = Expr::variable();
const CMatrix one = CMatrix::Identity(1, 1);

bool same_factors(std::vector<std::pair<Complex, int>> a, std::vector<std::pair<Complex, int>> b) {
  if (a.size() != b.size()) return false;
  auto by_real = [](const auto& p, const auto& q) { return p.first.real() < q.first.real(); };
  std::sort(a.begin(), a.end(), by_real);
  std::sort(b.begin(), b.end(), by_real);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].first - b[i].first) > 1e-12 || a[i].second != b[i].second) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("minimizable_factors examples") {
  auto cert = minimizable_factors(spectral_summary(std::vector<ChainShape>{{-1.0, 1}, {-1.0, 1}}), 1);
  REQUIRE(cert.factors.size() == 1);
  CHECK(cert.factors[0].first == Complex{-1.0, 0.0});
  CHECK(cert.factors[0].second == 1);
  CHECK(cert.residual_order == 0);

  cert = minimizable_factors(spectral_summary(std::vector<ChainShape>{{1.0, 4}}), 2);
  CHECK_FALSE(cert.minimizable());

  cert = minimizable_factors(spectral_summary(std::vector<ChainShape>{{0.0, 2}, {0.0, 1}}), 1);
  REQUIRE(cert.factors.size() == 1);
  CHECK(cert.factors[0].second == 1);
  CHECK(cert.residual_order == 1);
  CHECK(cert.polynomial_roots() == std::vector<Complex>{0.0});
}

TEST_CASE("d^2 - 1 minimizes to the identity") {
  const auto h = MatrixHamiltonian::free(1);
  const ChainSet cs{{scalar_chain(-1.0, {exp(x)}), scalar_chain(-1.0, {exp(-x)})}};
  const auto cert = minimizable_factors(spectral_summary(cs, 1), 1);
  const auto r = minimize(h, cs, cert, one, Grid{});
  CHECK(r.p.order() == 0);
  CHECK(std::abs(r.p.leading()(0, 0) - 1.0) < 1e-15);
  CHECK(r.residual.residual <= 1e-12);
  CHECK(r.reduced.chains.empty());
}

TEST_CASE("lambda = 0 with blocks {2, 1} leaves a first-order factor") {
  // Brute-force oracle: the kernel {1, x, x^2} belongs to d^3 = d * (0 - H).
  const auto h = MatrixHamiltonian::free(1);
  const ChainSet cs{{scalar_chain(0.0, {Expr(1.0), Expr(-0.5) * pow(x, 2)}), scalar_chain(0.0, {x})}};
  const auto q = build_intertwiner(h, cs);
  for (double t : {-2.0, 0.5}) {
    for (int j = 0; j < 3; ++j) CHECK(std::abs(q.coefficient(j, t)(0, 0)) < 1e-12);
  }
  const auto cert = minimizable_factors(spectral_summary(cs, 1), 1);
  REQUIRE(cert.factors.size() == 1);
  CHECK(cert.residual_order == 1);
  const auto r = minimize(h, cs, cert, one, Grid{});
  CHECK(r.p.order() == 1);
  for (double t : {-3.0, 0.0, 2.0}) CHECK(std::abs(r.p.coefficient(0, t)(0, 0)) < 1e-12);
  CHECK(r.residual.pass);
}

TEST_CASE("cosh with e^{+-2x} minimizes to d - tanh") {
  const auto h = MatrixHamiltonian::free(1);
  const ChainSet cs{{scalar_chain(-1.0, {cosh(x)}), scalar_chain(-4.0, {exp(Expr(2.0) * x)}),
                     scalar_chain(-4.0, {exp(Expr(-2.0) * x)})}};
  const auto cert = minimizable_factors(spectral_summary(cs, 1), 1);
  REQUIRE(cert.factors.size() == 1);
  CHECK(cert.factors[0].first == Complex{-4.0, 0.0});
  const auto r = minimize(h, cs, cert, one, Grid{});
  CHECK(r.p.order() == 1);
  for (double t : {-4.0, -1.0, 0.3, 4.5}) CHECK(std::abs(r.p.coefficient(0, t)(0, 0) + std::tanh(t)) < 1e-12);
  CHECK(r.residual.pass);
  CHECK(r.residual.relative() <= 1e-8);
  CHECK_FALSE(minimizable_factors(spectral_summary(r.reduced, 1), 1).minimizable());
}

TEST_CASE("empty certificates are rejected") {
  const ChainSet cs{{scalar_chain(-1.0, {cosh(x)})}};
  const auto cert = minimizable_factors(spectral_summary(cs, 1), 1);
  CHECK_FALSE(cert.minimizable());
  CHECK_THROWS_AS(minimize(MatrixHamiltonian::free(1), cs, cert, one, Grid{}), FactorInconsistent);
}

TEST_CASE("a wrong factor count is reported as FactorInconsistent") {
  const ChainSet cs{{scalar_chain(-1.0, {exp(x)}), scalar_chain(-1.0, {exp(-x)})}};
  MinimizationCertificate cert;
  cert.factors = {{-4.0, 1}};
  cert.order = 2;
  cert.residual_order = 0;
  CHECK_THROWS_AS(minimize(MatrixHamiltonian::free(1), cs, cert, one, Grid{}), FactorInconsistent);
}

TEST_CASE("random round trip recovers the injected factors") {
  testing::ScenarioFactory factory(8128u);
  const Grid window{-5, 5, 41};
  for (int trial = 0; trial < 12; ++trial) {
    CAPTURE(trial);
    const int n = 1 + trial % 2;
    const int residual = trial % 3;
    const int k = (n == 1 && trial % 3 == 1) ? 2 : 1;
    std::vector<std::pair<double, int>> injected{{-1.5 - 0.5 * factory.uniform(0.0, 1.0), k}};
    if (trial % 4 == 2) injected.emplace_back(-3.0 - factory.uniform(0.0, 1.0), 1);
    const auto s = factory.make_minimizable(n, residual, injected);

    const auto cert = minimizable_factors(spectral_summary(s.chains, n), n);
    std::vector<std::pair<Complex, int>> expect;
    for (const auto& f : injected) expect.emplace_back(f.first, f.second);
    CHECK(same_factors(cert.factors, expect));
    CHECK(cert.residual_order == residual);

    const auto r = minimize(s.h, s.chains, cert, CMatrix::Identity(n, n), window);
    CHECK(r.p.order() == residual);
    CHECK(r.residual.pass);
    CHECK(r.residual.relative() <= 1e-8);
    if (!r.reduced.chains.empty()) {
      CHECK_FALSE(minimizable_factors(spectral_summary(r.reduced, n), n).minimizable());
    }
  }
}
