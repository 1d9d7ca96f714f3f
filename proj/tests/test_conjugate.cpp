#include <cmath>

#include "doctest.h"
#include "intertwine/conjugate.hpp"
#include "intertwine/errors.hpp"
#include "intertwine/minimize.hpp"
#include "support/scenarios.hpp"

using namespace intertwine;
using testing::scalar_chain;

namespace {
const Expr x = Expr::variable();

struct CoshStep {
  MatrixHamiltonian h = MatrixHamiltonian::free(1);
  ChainSet cs{{scalar_chain(-1.0, {cosh(x)})}};
  MatrixDifferentialOperator q = build_intertwiner(h, cs);
  Hamiltonian hm = final_hamiltonian(q);
  ExtensionBasis ext{{scalar_chain(-1.0, {cosh(x)}), scalar_chain(-1.0, {sinh(x)})}};
};

Family scalar_tests() {
  return expr_family(1, {VectorFunction{exp(x)}, VectorFunction{sin(Expr(2.0) * x)},
                         VectorFunction{cos(x) + Expr(0.25) * x}});
}
}  // namespace

TEST_CASE("susy_polynomial") {
  auto p = susy_polynomial(spectral_summary(std::vector<ChainShape>{{-1.0, 1}}), 1);
  CHECK(p.degree() == 1);
  CHECK(p.conjugate_order == 1);
  CHECK(p(2.0) == Complex{3.0, 0.0});

  p = susy_polynomial(spectral_summary(std::vector<ChainShape>{{1.0, 4}}), 2);
  CHECK(p.roots.size() == 1);
  CHECK(p.roots[0].second == 4);
  CHECK(p.conjugate_order == 6);
  CHECK(p(3.0) == Complex{16.0, 0.0});

  p = susy_polynomial(spectral_summary(std::vector<ChainShape>{{-1.0, 1}, {-1.0, 1}}), 2);
  CHECK(p.degree() == 1);
  CHECK(p.conjugate_order == 0);
}

TEST_CASE("the conjugate of d - tanh is -(d + tanh)") {
  CoshStep e;
  const auto r = build_conjugate(e.q, e.hm, e.ext, Grid{});
  CHECK(r.q_plus.order() == 1);
  CHECK(std::abs(r.normalization - 1.0) < 1e-10);
  for (double t : {-4.0, -0.7, 0.0, 2.2}) {
    CHECK(std::abs(r.q_plus.coefficient(1, t)(0, 0) + 1.0) < 1e-10);
    CHECK(std::abs(r.q_plus.coefficient(0, t)(0, 0) + std::tanh(t)) < 1e-10);
  }
  CHECK(r.product.pass);

  const auto alg = verify_susy_algebra(r.q_plus, e.q, e.h, e.hm, r.polynomial, scalar_tests(), Grid{}.points(), true);
  CHECK(alg.plus_minus.pass);
  REQUIRE(alg.minus_plus);
  CHECK(alg.minus_plus->pass);
  CHECK(alg.nilpotency == 0.0);
  CHECK(alg.intertwining_minus.pass);
  CHECK(alg.intertwining_plus.pass);
  CHECK(alg.degree_identity);
  CHECK(alg.pass());

  // Q+ is not minimizable.
  CHECK_FALSE(minimizable_factors(spectral_summary(r.kernel.chains, 1), 1).minimizable());
}

TEST_CASE("the conjugate of d^2 - 1 is the constant -1") {
  const auto h = MatrixHamiltonian::free(1);
  const ChainSet cs{{scalar_chain(-1.0, {exp(x)}), scalar_chain(-1.0, {exp(-x)})}};
  const auto q = build_intertwiner(h, cs);
  const ExtensionBasis ext{cs.chains};
  const auto r = build_conjugate(q, ext, Grid{});
  CHECK(r.q_plus.order() == 0);
  CHECK(std::abs(r.q_plus.leading()(0, 0) + 1.0) < 1e-10);
  CHECK(r.product.relative() <= 1e-12);
}

TEST_CASE("incomplete extension bases are rejected") {
  CoshStep e;
  ExtensionBasis missing{{scalar_chain(-1.0, {cosh(x)})}};
  CHECK_THROWS_AS(build_conjugate(e.q, e.hm, missing, Grid{}), ExtensionCountMismatch);
  ExtensionBasis stray{{scalar_chain(-1.0, {cosh(x)}), scalar_chain(-1.0, {sinh(x)}), scalar_chain(-4.0, {cosh(Expr(2.0) * x)})}};
  CHECK_THROWS_AS(build_conjugate(e.q, e.hm, stray, Grid{}), ExtensionCountMismatch);
}

TEST_CASE("an extension outside the generalized eigenspace fails normalisation") {
  CoshStep e;
  // e^{2x} is not annihilated by H + 1, so no scalar can make Q+ Q- = H + 1.
  ExtensionBasis wrong{{scalar_chain(-1.0, {cosh(x)}), scalar_chain(-1.0, {exp(Expr(2.0) * x)})}};
  CHECK_THROWS_AS(build_conjugate(e.q, e.hm, wrong, Grid{}), NormalizationFailure);
}

TEST_CASE("symmetry shortcuts on d - tanh") {
  CoshStep e;
  const auto herm = conjugate_by_symmetry(e.q, SymmetryMode::Hermitian, e.h, e.hm, Grid{});
  const auto tran = conjugate_by_symmetry(e.q, SymmetryMode::Transpose, e.h, e.hm, Grid{});
  for (double t : {-3.0, 0.4, 1.9}) {
    CHECK(std::abs(herm.coefficient(1, t)(0, 0) + 1.0) < 1e-14);
    CHECK(std::abs(herm.coefficient(0, t)(0, 0) + std::tanh(t)) < 1e-12);
    CHECK((herm.coefficient(0, t) - tran.coefficient(0, t)).norm() < 1e-15);
  }
  const auto tests = scalar_tests();
  CHECK(intertwining_residual(herm, e.hm, e.h, tests, Grid{}.points(), 1e-7).pass);

  const auto built = build_conjugate(e.q, e.hm, e.ext, Grid{});
  const auto d = compare_families(image(herm, tests), image(built.q_plus, tests), Grid{}.points());
  CHECK(d.residual <= 1e-7);

  const MatrixHamiltonian skew(2, {Expr(0.0), Expr(Complex{0.0, 1.0}), Expr(Complex{0.0, 1.0}), Expr(0.0)});
  try {
    conjugate_by_symmetry(e.q, SymmetryMode::Hermitian, skew, skew, Grid{});
    FAIL("expected SymmetryViolated");
  } catch (const SymmetryViolated& err) {
    CHECK(err.defect() > 0.5);
  }
}

TEST_CASE("complex-conjugate shortcut for a complex potential pair") {
  // H+ with V = i: the pair (H+, H+^*) is linked by the conjugate case.
  const MatrixHamiltonian h(1, {Expr(Complex{0.0, 1.0})});
  const MatrixHamiltonian hs(1, {Expr(Complex{0.0, -1.0})});
  const ChainSet cs{{scalar_chain(Complex{0.0, 1.0}, {Expr(1.0)})}};
  const auto q = build_intertwiner(h, cs);  // Q = d
  const auto hm = final_hamiltonian(q);
  CHECK_THROWS_AS(conjugate_by_symmetry(q, SymmetryMode::ComplexConjugate, h, hm, Grid{}), SymmetryViolated);
  const auto qc = conjugate_by_symmetry(q, SymmetryMode::ComplexConjugate, h, hs, Grid{});
  CHECK(std::abs(qc.coefficient(1, 0.3)(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("random 2x2 conjugates: images form H- chains and the algebra closes") {
  testing::ScenarioFactory factory(31337u);
  const Grid window{-4, 4, 41};
  for (int trial = 0; trial < 4; ++trial) {
    CAPTURE(trial);
    auto s = factory.make(2, 1);
    CMatrix leading(2, 2);
    leading << 1.0, 0.5, -0.25, 2.0;
    const auto q = build_intertwiner(s.h, s.chains, leading, window);
    const auto hm = final_hamiltonian(q);
    const ExtensionBasis ext{testing::ScenarioFactory::extension(s)};

    // (H- - lambda) Q- Psi_i = Q- Psi_{i-1}.
    for (const auto& c : ext.chains) {
      const auto imgs = image(q, expr_family(2, c.members));
      const auto pushed = shifted_image(hm, c.lambda, imgs);
      for (int i = 0; i < c.length(); ++i) {
        double worst = 0.0, scale = 1.0;
        for (double t : window.points()) {
          const CVector lhs = pushed.values(t).col(i);
          const CVector rhs = i == 0 ? CVector(CVector::Zero(2)) : CVector(imgs.values(t).col(i - 1));
          scale = std::max(scale, imgs.values(t).col(i).cwiseAbs().maxCoeff());
          worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-8 * scale);
      }
    }

    const auto r = build_conjugate(q, hm, ext, window);
    CHECK(r.q_plus.order() == r.polynomial.conjugate_order);
    CHECK(std::abs(r.normalization - 1.0) < 1e-6);
    const auto alg = verify_susy_algebra(r.q_plus, q, s.h, hm, r.polynomial, expr_family(2, default_test_functions(2)),
                                         window.points(), false);
    CHECK(alg.plus_minus.pass);
    CHECK(alg.intertwining_plus.pass);
    CHECK(alg.intertwining_minus.pass);
    CHECK(alg.degree_identity);
    CHECK_FALSE(minimizable_factors(spectral_summary(r.kernel.chains, 2), 2).minimizable());
  }
}
