#include "intertwine/conjugate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "intertwine/detail/binomial.hpp"
#include "intertwine/errors.hpp"
#include "intertwine/numkit.hpp"

namespace intertwine {
namespace {

const OperatorOrigin& origin_of(const MatrixDifferentialOperator& q) {
  if (!q.origin()) throw std::invalid_argument("operator was not built from a kernel basis");
  return *q.origin();
}

// Per member: sup of |Q Phi| and sup of the individual terms |X_j Phi^{(j)}|.
std::vector<std::pair<double, double>> image_magnitudes(const MatrixDifferentialOperator& q, const Family& f,
                                                        const std::vector<double>& grid) {
  const int N = q.order();
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(f.size()), {0.0, 0.0});
  for (double x : grid) {
    const FamilyJet jet = f.jet(x, N);
    const CoefficientJet c = q.coefficient_jet(x, 0);
    CMatrix sum = CMatrix::Zero(f.dim(), f.size());
    for (int j = 0; j <= N; ++j) {
      const CMatrix term = c[static_cast<std::size_t>(j)][0] * jet[static_cast<std::size_t>(j)];
      for (int r = 0; r < f.size(); ++r) {
        auto& o = out[static_cast<std::size_t>(r)];
        o.second = std::max(o.second, term.col(r).cwiseAbs().maxCoeff());
      }
      sum += term;
    }
    for (int r = 0; r < f.size(); ++r) {
      auto& o = out[static_cast<std::size_t>(r)];
      o.first = std::max(o.first, sum.col(r).cwiseAbs().maxCoeff());
    }
  }
  return out;
}

class ScaledCoefficients final : public CoefficientSource {
 public:
  ScaledCoefficients(MatrixDifferentialOperator q, Complex factor) : q_(std::move(q)), factor_(factor) {}
  int dim() const override { return q_.dim(); }
  int order() const override { return q_.order(); }
  CMatrix leading() const override { return factor_ * q_.leading(); }
  CoefficientJet jet(double x, int p) const override {
    CoefficientJet c = q_.coefficient_jet(x, p);
    for (auto& row : c)
      for (auto& m : row) m *= factor_;
    return c;
  }

 private:
  MatrixDifferentialOperator q_;
  Complex factor_;
};

CMatrix apply_mode(const CMatrix& m, SymmetryMode mode) {
  switch (mode) {
    case SymmetryMode::Hermitian: return m.adjoint();
    case SymmetryMode::Transpose: return m.transpose();
    case SymmetryMode::ComplexConjugate: return m.conjugate();
  }
  return m;
}

// Hermitian/transpose: sum_j (-d)^j o op(X_j) = sum_a Y_a d^a with
//   Y_a = sum_{j >= a} (-1)^j C(j, a) op(X_j)^{(j - a)}.
// Complex conjugate: Y_a = conj(X_a).
class SymmetricCoefficients final : public CoefficientSource {
 public:
  SymmetricCoefficients(MatrixDifferentialOperator q, SymmetryMode mode) : q_(std::move(q)), mode_(mode) {}
  int dim() const override { return q_.dim(); }
  int order() const override { return q_.order(); }
  CMatrix leading() const override {
    const CMatrix l = apply_mode(q_.leading(), mode_);
    return (mode_ != SymmetryMode::ComplexConjugate && order() % 2 == 1) ? CMatrix(-l) : l;
  }
  CoefficientJet jet(double x, int p) const override {
    const int N = order();
    const int n = dim();
    if (mode_ == SymmetryMode::ComplexConjugate) {
      CoefficientJet c = q_.coefficient_jet(x, p);
      for (auto& row : c)
        for (auto& m : row) m = m.conjugate().eval();
      return c;
    }
    const CoefficientJet c = q_.coefficient_jet(x, N + p);
    CoefficientJet out(static_cast<std::size_t>(N + 1));
    for (int a = 0; a <= N; ++a) {
      for (int r = 0; r <= p; ++r) {
        CMatrix y = CMatrix::Zero(n, n);
        for (int j = a; j <= N; ++j) {
          const double s = (j % 2 == 0 ? 1.0 : -1.0) * detail::binomial(j, a);
          y += s * apply_mode(c[static_cast<std::size_t>(j)][static_cast<std::size_t>(j - a + r)], mode_);
        }
        out[static_cast<std::size_t>(a)].push_back(std::move(y));
      }
    }
    return out;
  }

 private:
  MatrixDifferentialOperator q_;
  SymmetryMode mode_;
};

// Largest |f(V(x))| relative to the potential magnitude over the window.
template <typename F>
double potential_defect(const Hamiltonian& a, const Hamiltonian& b, const std::vector<double>& grid, F&& op) {
  double defect = 0.0, scale = 1.0;
  for (double x : grid) {
    const CMatrix va = a.potential(x);
    const CMatrix vb = b.potential(x);
    scale = std::max({scale, numkit::max_abs(va), numkit::max_abs(vb)});
    defect = std::max(defect, numkit::max_abs(op(va, vb)));
  }
  return defect / scale;
}

ResidualReport relative_report(double residual, double scale, double tolerance) {
  ResidualReport r;
  r.residual = residual;
  r.scale = scale;
  r.tolerance = tolerance;
  r.pass = residual <= tolerance * scale;
  return r;
}

}  // namespace

int SusyPolynomial::degree() const {
  int d = 0;
  for (const auto& r : roots) d += r.second;
  return d;
}

Complex SusyPolynomial::operator()(Complex lambda) const {
  Complex v{1.0, 0.0};
  for (const auto& [root, power] : roots) v *= std::pow(lambda - root, power);
  return v;
}

SusyPolynomial susy_polynomial(const SpectralSummary& summary, int order) {
  if (summary.entries.empty()) throw EmptyChainSet();
  SusyPolynomial p;
  for (const auto& e : summary.entries) p.roots.emplace_back(e.lambda, e.kappa());
  p.order = order;
  p.conjugate_order = 2 * p.degree() - order;
  return p;
}

ConjugateResult build_conjugate(const MatrixDifferentialOperator& q_minus, const ExtensionBasis& ext,
                                const Grid& window, const Tolerances& tol,
                                const std::vector<VectorFunction>& tests) {
  return build_conjugate(q_minus, final_hamiltonian(q_minus), ext, window, tol, tests);
}

ConjugateResult build_conjugate(const MatrixDifferentialOperator& q_minus, const Hamiltonian& h_minus,
                                const ExtensionBasis& ext, const Grid& window, const Tolerances& tol,
                                const std::vector<VectorFunction>& tests) {
  const auto& origin = origin_of(q_minus);
  const int n = q_minus.dim();
  const int N = q_minus.order();
  const SpectralSummary summary = spectral_summary(origin.kernel.chains, n);
  const SusyPolynomial poly = susy_polynomial(summary, N);
  const int n_prime = poly.conjugate_order;
  const auto grid = window.points();

  // Every extension chain must sit at one of the eigenvalues of T+, with
  // 2 n kappa_l members per eigenvalue.
  for (const auto& e : summary.entries) {
    int count = 0;
    for (const auto& c : ext.chains)
      if (same_eigenvalue(c.lambda, e.lambda)) count += c.length();
    if (count != 2 * n * e.kappa()) {
      throw ExtensionCountMismatch("extension holds " + std::to_string(count) + " members at an eigenvalue with " +
                                   std::to_string(2 * n * e.kappa()) + " expected");
    }
  }
  for (const auto& c : ext.chains) {
    bool known = false;
    for (const auto& e : summary.entries) known = known || same_eigenvalue(c.lambda, e.lambda);
    if (!known) throw ExtensionCountMismatch("extension chain at an eigenvalue outside the spectrum of T+");
  }

  // Images of the extension chains; vanishing images must be chain prefixes.
  ChainSet ext_set{ext.chains};
  const Family images = image(q_minus, expr_family(n, ext_set.flattened()));
  const auto mags = image_magnitudes(q_minus, expr_family(n, ext_set.flattened()), grid);
  std::vector<int> keep;
  std::vector<ChainShape> shapes;
  int index = 0;
  for (const auto& c : ext.chains) {
    int survivors = 0;
    for (int i = 0; i < c.length(); ++i, ++index) {
      const auto& [value, terms] = mags[static_cast<std::size_t>(index)];
      const bool zero = value <= tol.zero_rel * std::max(terms, 1.0);
      if (zero && survivors > 0) throw ExtensionCountMismatch("a vanishing image follows a nonzero one in its chain");
      if (!zero) {
        keep.push_back(index);
        ++survivors;
      }
    }
    if (survivors > 0) shapes.push_back({c.lambda, survivors});
  }
  if (static_cast<int>(keep.size()) != n * n_prime) {
    throw ExtensionCountMismatch(std::to_string(keep.size()) + " images survive, expected n*N' = " +
                                 std::to_string(n * n_prime));
  }

  // Q+ Q- = prod (H+ - lambda_l)^{kappa_l} fixes the leading coefficient.
  KernelBasis kernel{select(images, keep), shapes};
  const double sign = poly.degree() % 2 == 0 ? 1.0 : -1.0;
  const CMatrix leading = sign * numkit::inverse(q_minus.leading(), tol.singular_rel);
  const auto q0 = build_intertwiner(h_minus, kernel, leading, window, tol);

  // Monic normalisation: least-squares scalar c with c Q+ Q- Phi = P(H+) Phi.
  const Family probes = expr_family(n, tests.empty() ? default_test_functions(n) : tests);
  const Family lhs = image(q0, image(q_minus, probes));
  const Family rhs = polynomial_image(origin.base, poly.roots, probes);
  Complex num{0.0, 0.0};
  double den = 0.0, scale = 1.0;
  std::vector<std::pair<CMatrix, CMatrix>> samples;
  for (double x : grid) {
    CMatrix a = lhs.values(x), b = rhs.values(x);
    num += (a.conjugate().cwiseProduct(b)).sum();
    den += a.squaredNorm();
    scale = std::max({scale, numkit::max_abs(a), numkit::max_abs(b)});
    samples.emplace_back(std::move(a), std::move(b));
  }
  if (den == 0.0) throw NormalizationFailure("Q+ Q- vanishes on every test function");
  const Complex c = num / den;
  double residual = 0.0;
  for (const auto& [a, b] : samples) residual = std::max(residual, numkit::max_abs(c * a - b));
  const ResidualReport product = relative_report(residual, scale, tol.residual);
  if (!product.pass) {
    throw NormalizationFailure("no scalar makes Q+ Q- match P(H+): relative residual " +
                               std::to_string(residual / scale));
  }
  MatrixDifferentialOperator q_plus(std::make_shared<ScaledCoefficients>(q0, c), q0.origin());
  return ConjugateResult{q_plus, poly, kernel, c, product};
}

std::string to_string(SymmetryMode mode) {
  switch (mode) {
    case SymmetryMode::Hermitian: return "hermitian";
    case SymmetryMode::Transpose: return "transpose";
    case SymmetryMode::ComplexConjugate: return "complex_conjugate";
  }
  return "";
}

SymmetryMode parse_symmetry_mode(const std::string& text) {
  if (text == "hermitian") return SymmetryMode::Hermitian;
  if (text == "transpose") return SymmetryMode::Transpose;
  if (text == "complex_conjugate" || text == "conjugate") return SymmetryMode::ComplexConjugate;
  throw std::invalid_argument("unknown symmetry mode '" + text + "'");
}

MatrixDifferentialOperator conjugate_by_symmetry(const MatrixDifferentialOperator& q_minus, SymmetryMode mode,
                                                 const Hamiltonian& h_plus, const Hamiltonian& h_minus,
                                                 const Grid& window, const Tolerances& tol) {
  const auto grid = window.points();
  double defect = 0.0;
  switch (mode) {
    case SymmetryMode::Hermitian:
    case SymmetryMode::Transpose: {
      auto self = [mode](const CMatrix& v, const CMatrix&) -> CMatrix { return v - apply_mode(v, mode); };
      defect = std::max(potential_defect(h_plus, h_plus, grid, self), potential_defect(h_minus, h_minus, grid, self));
      break;
    }
    case SymmetryMode::ComplexConjugate:
      defect = potential_defect(h_plus, h_minus, grid,
                                [](const CMatrix& a, const CMatrix& b) -> CMatrix { return a.conjugate() - b; });
      break;
  }
  if (defect > tol.symmetry) throw SymmetryViolated(defect);
  return MatrixDifferentialOperator(std::make_shared<SymmetricCoefficients>(q_minus, mode));
}

bool AlgebraReport::pass() const {
  return plus_minus.pass && (!minus_plus || minus_plus->pass) && nilpotency == 0.0 && intertwining_minus.pass &&
         intertwining_plus.pass && degree_identity;
}

AlgebraReport verify_susy_algebra(const MatrixDifferentialOperator& q_plus, const MatrixDifferentialOperator& q_minus,
                                  const Hamiltonian& h_plus, const Hamiltonian& h_minus, const SusyPolynomial& p,
                                  const Family& tests, const std::vector<double>& grid, bool check_minus_plus,
                                  double tolerance) {
  AlgebraReport r;
  r.plus_minus = make_report(
      compare_families(image(q_plus, image(q_minus, tests)), polynomial_image(h_plus, p.roots, tests), grid),
      tolerance);
  if (check_minus_plus) {
    r.minus_plus = make_report(
        compare_families(image(q_minus, image(q_plus, tests)), polynomial_image(h_minus, p.roots, tests), grid),
        tolerance);
  }
  // Q = [[0, Q+], [0, 0]] and Qbar = [[0, 0], [Q-, 0]]: every entry of the
  // squares is a product with a zero block.
  r.nilpotency = 0.0;
  r.intertwining_minus = intertwining_residual(q_minus, h_plus, h_minus, tests, grid, tolerance);
  r.intertwining_plus = intertwining_residual(q_plus, h_minus, h_plus, tests, grid, tolerance);
  r.degree_identity = q_plus.order() + q_minus.order() == 2 * p.degree();
  return r;
}

}  // namespace intertwine
