#include "intertwine/construct.hpp"

#include <algorithm>
#include <cmath>

#include "intertwine/detail/binomial.hpp"
#include "intertwine/errors.hpp"
#include "intertwine/numkit.hpp"

namespace intertwine {
namespace {

// A column of a Wronskian-type matrix: derivative order and vector component.
struct Column {
  int order;
  int component;
  friend bool operator==(const Column&, const Column&) = default;
};

std::vector<Column> wronskian_columns(int n, int order) {
  std::vector<Column> cols;
  for (int k = 0; k < order; ++k)
    for (int m = 0; m < n; ++m) cols.push_back({k, m});
  return cols;
}

CMatrix assemble(const FamilyJet& jet, const std::vector<Column>& cols) {
  const auto rows = static_cast<Eigen::Index>(jet.empty() ? 0 : jet[0].cols());
  CMatrix m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    m.col(static_cast<Eigen::Index>(c)) =
        jet[static_cast<std::size_t>(cols[c].order)].row(cols[c].component).transpose();
  }
  return m;
}

bool has_duplicate(const std::vector<Column>& cols) {
  for (std::size_t a = 0; a < cols.size(); ++a)
    for (std::size_t b = a + 1; b < cols.size(); ++b)
      if (cols[a] == cols[b]) return true;
  return false;
}

// Derivatives 0..p of det(assemble(jet, cols)). The q-th derivative is the sum
// over distributions alpha of q derivatives among the columns of
// q!/prod(alpha_c!) det(columns raised by alpha). Columns are exact derivative
// rows of the family, so the result is exact up to rounding. Distributions
// that produce two identical columns vanish identically and are skipped.
std::vector<Complex> determinant_jet(const FamilyJet& jet, const std::vector<Column>& cols, int p) {
  std::vector<Complex> out(static_cast<std::size_t>(p + 1), Complex{0.0, 0.0});
  if (cols.empty()) {
    out[0] = 1.0;
    return out;
  }
  std::vector<Column> work = cols;
  for (int q = 0; q <= p; ++q) {
    Complex sum{0.0, 0.0};
    // factorial(q) / prod factorial(alpha_c), accumulated along the recursion.
    auto recurse = [&](auto&& self, std::size_t c, int remaining, double weight) -> void {
      if (c + 1 == cols.size()) {
        work[c].order = cols[c].order + remaining;
        double w = weight;
        for (int k = 2; k <= remaining; ++k) w /= k;
        if (!has_duplicate(work)) sum += w * numkit::lu_det(assemble(jet, work));
        return;
      }
      double w = weight;
      for (int take = 0; take <= remaining; ++take) {
        if (take > 0) w /= take;
        work[c].order = cols[c].order + take;
        self(self, c + 1, remaining - take, w);
      }
      work[c].order = cols[c].order;
    };
    double qfact = 1.0;
    for (int k = 2; k <= q; ++k) qfact *= k;
    recurse(recurse, 0, q, qfact);
    work = cols;
    out[static_cast<std::size_t>(q)] = sum;
  }
  return out;
}

class KernelCoefficients final : public CoefficientSource {
 public:
  KernelCoefficients(Family kernel, CMatrix leading, int order, double wronskian_rel)
      : kernel_(std::move(kernel)), leading_(std::move(leading)), order_(order), rel_(wronskian_rel) {}

  int dim() const override { return static_cast<int>(leading_.rows()); }
  int order() const override { return order_; }
  CMatrix leading() const override { return leading_; }

  CoefficientJet jet(double x, int p) const override {
    const int n = dim();
    const int N = order_;
    CoefficientJet out(static_cast<std::size_t>(N + 1));
    out[static_cast<std::size_t>(N)].push_back(leading_);
    for (int a = 1; a <= p; ++a) out[static_cast<std::size_t>(N)].push_back(CMatrix::Zero(n, n));
    if (N == 0) return out;

    const FamilyJet kj = kernel_.jet(x, N + p);
    const auto base = wronskian_columns(n, N);
    const CMatrix wmat = assemble(kj, base);
    const std::vector<Complex> w = determinant_jet(kj, base, p);
    if (numkit::is_singular(wmat, w[0], rel_)) throw SingularWronskian(x);

    for (int j = 0; j < N; ++j) {
      std::vector<CMatrix> numer(static_cast<std::size_t>(p + 1), CMatrix(n, n));
      for (int l = 0; l < n; ++l) {
        std::vector<CVector> v(static_cast<std::size_t>(p + 1), CVector(n));
        for (int m = 0; m < n; ++m) {
          auto cols = base;
          cols[static_cast<std::size_t>(j * n + l)] = {N, m};
          const auto d = determinant_jet(kj, cols, p);
          for (int q = 0; q <= p; ++q) v[static_cast<std::size_t>(q)](m) = d[static_cast<std::size_t>(q)];
        }
        for (int q = 0; q <= p; ++q) numer[static_cast<std::size_t>(q)].col(l) = -leading_ * v[static_cast<std::size_t>(q)];
      }
      // X_j = numer / W, differentiated by Leibniz on numer = X_j W.
      auto& xj = out[static_cast<std::size_t>(j)];
      for (int q = 0; q <= p; ++q) {
        CMatrix acc = numer[static_cast<std::size_t>(q)];
        for (int a = 0; a < q; ++a) {
          acc -= detail::binomial(q, a) * w[static_cast<std::size_t>(q - a)] * xj[static_cast<std::size_t>(a)];
        }
        xj.push_back(acc / w[0]);
      }
    }
    return out;
  }

  const Family& kernel() const { return kernel_; }

 private:
  Family kernel_;
  CMatrix leading_;
  int order_;
  double rel_;
};

class ImageFamily final : public FamilySource {
 public:
  ImageFamily(MatrixDifferentialOperator q, Family base) : q_(std::move(q)), base_(std::move(base)) {
    if (q_.dim() != base_.dim()) throw DimensionMismatch("operator and family differ in dimension");
  }
  int dim() const override { return base_.dim(); }
  int size() const override { return base_.size(); }
  FamilyJet jet(double x, int p) const override {
    const int N = q_.order();
    const FamilyJet b = base_.jet(x, N + p);
    const CoefficientJet c = q_.coefficient_jet(x, p);
    FamilyJet out;
    for (int k = 0; k <= p; ++k) {
      CMatrix m = CMatrix::Zero(dim(), size());
      for (int j = 0; j <= N; ++j) {
        for (int a = 0; a <= k; ++a) {
          m += detail::binomial(k, a) *
               (c[static_cast<std::size_t>(j)][static_cast<std::size_t>(a)] * b[static_cast<std::size_t>(j + k - a)]);
        }
      }
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  MatrixDifferentialOperator q_;
  Family base_;
};

class TransformedPotential final : public PotentialSource {
 public:
  TransformedPotential(MatrixDifferentialOperator q, Hamiltonian h_plus)
      : q_(std::move(q)), h_plus_(std::move(h_plus)), leading_inv_(numkit::inverse(q_.leading())) {}
  int dim() const override { return q_.dim(); }
  std::vector<CMatrix> jet(double x, int p) const override {
    const auto v = h_plus_.potential_jet(x, p);
    const CMatrix& xn = q_.leading();
    std::vector<CMatrix> out;
    const int N = q_.order();
    CoefficientJet c;
    if (N > 0) c = q_.coefficient_jet(x, p + 1);
    for (int k = 0; k <= p; ++k) {
      CMatrix m = xn * v[static_cast<std::size_t>(k)] * leading_inv_;
      if (N > 0) m += 2.0 * c[static_cast<std::size_t>(N - 1)][static_cast<std::size_t>(k + 1)] * leading_inv_;
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  MatrixDifferentialOperator q_;
  Hamiltonian h_plus_;
  CMatrix leading_inv_;
};

const OperatorOrigin& require_origin(const MatrixDifferentialOperator& q) {
  if (!q.origin()) throw std::invalid_argument("operator was not built from a kernel basis");
  return *q.origin();
}

}  // namespace

WronskianEvaluation wronskian(const Family& kernel, int order, double x) {
  const int n = kernel.dim();
  if (kernel.size() != n * order) {
    throw CountMismatch("Wronskian needs n*N = " + std::to_string(n * order) + " members, got " +
                        std::to_string(kernel.size()));
  }
  WronskianEvaluation w;
  w.x = x;
  if (order == 0) {
    w.matrix = CMatrix(0, 0);
    w.det = 1.0;
    return w;
  }
  w.matrix = assemble(kernel.jet(x, order - 1), wronskian_columns(n, order));
  w.det = numkit::lu_det(w.matrix);
  return w;
}

WronskianEvaluation wronskian(const ChainSet& cs, int n, int order, double x) {
  if (cs.total() != n * order) {
    throw CountMismatch("Wronskian needs n*N = " + std::to_string(n * order) + " members, got " +
                        std::to_string(cs.total()));
  }
  return wronskian(expr_family(n, cs.flattened()), order, x);
}

MatrixDifferentialOperator build_intertwiner(const Hamiltonian& h_plus, const KernelBasis& kernel,
                                             const CMatrix& leading, const Grid& window,
                                             const Tolerances& tol) {
  const int n = h_plus.dim();
  if (leading.rows() != n || leading.cols() != n) throw DimensionMismatch("leading coefficient must be n x n");
  if (kernel.family.dim() != n) throw DimensionMismatch("kernel family has wrong dimension");
  if (kernel.total() != kernel.family.size()) throw CountMismatch("chain layout does not match family size");
  if (kernel.family.size() % n != 0) {
    throw CountMismatch("kernel size " + std::to_string(kernel.family.size()) + " is not a multiple of n");
  }
  if (numkit::is_singular(leading, numkit::lu_det(leading), tol.singular_rel)) throw SingularLeading();
  const int order = kernel.family.size() / n;

  for (double x : window.points()) {
    const auto w = wronskian(kernel.family, order, x);
    if (numkit::is_singular(w.matrix, w.det, tol.wronskian_rel)) throw SingularWronskian(x);
  }
  auto src = std::make_shared<KernelCoefficients>(kernel.family, leading, order, tol.wronskian_rel);
  return MatrixDifferentialOperator(std::move(src), OperatorOrigin{h_plus, kernel});
}

MatrixDifferentialOperator build_intertwiner(const MatrixHamiltonian& h_plus, const ChainSet& cs,
                                             const Grid& window, const Tolerances& tol) {
  return build_intertwiner(h_plus, cs, CMatrix::Identity(h_plus.dim(), h_plus.dim()), window, tol);
}

MatrixDifferentialOperator build_intertwiner(const MatrixHamiltonian& h_plus, const ChainSet& cs,
                                             const CMatrix& leading, const Grid& window,
                                             const Tolerances& tol) {
  return build_intertwiner(Hamiltonian(h_plus), kernel_basis(cs, h_plus.dim()), leading, window, tol);
}

CMatrix final_potential(const MatrixDifferentialOperator& q, double x) {
  const auto& origin = require_origin(q);
  const int n = q.dim();
  const int N = q.order();
  const CMatrix& xn = q.leading();
  const CMatrix xn_inv = numkit::inverse(xn);
  CMatrix v = xn * origin.base.potential(x) * xn_inv;
  if (N == 0) return v;

  const FamilyJet kj = origin.kernel.family.jet(x, N + 1);
  auto raised = [](std::vector<Column> cols) {
    for (auto& c : cols) ++c.order;
    return cols;
  };
  const auto base = wronskian_columns(n, N);
  const CMatrix wm = assemble(kj, base);
  const Complex w = numkit::lu_det(wm);
  if (numkit::is_singular(wm, w, 1e-10)) throw SingularWronskian(x);
  const Complex dw = numkit::det_derivative(wm, assemble(kj, raised(base)));

  CMatrix d(n, n), dprime(n, n);
  for (int l = 0; l < n; ++l) {
    CVector col(n), dcol(n);
    for (int m = 0; m < n; ++m) {
      auto cols = base;
      cols[static_cast<std::size_t>((N - 1) * n + l)] = {N, m};
      const CMatrix mm = assemble(kj, cols);
      col(m) = numkit::lu_det(mm);
      dcol(m) = numkit::det_derivative(mm, assemble(kj, raised(cols)));
    }
    d.col(l) = -xn * col;
    dprime.col(l) = -xn * dcol;
  }
  const CMatrix xprime = (dprime * w - d * dw) / (w * w);
  return v + 2.0 * xprime * xn_inv;
}

Hamiltonian final_hamiltonian(const MatrixDifferentialOperator& q) {
  return final_hamiltonian(q, require_origin(q).base);
}

Hamiltonian final_hamiltonian(const MatrixDifferentialOperator& q, const Hamiltonian& h_plus) {
  return Hamiltonian(std::make_shared<TransformedPotential>(q, h_plus));
}

CVector apply_operator(const MatrixDifferentialOperator& q, const VectorFunction& phi, double x) {
  if (phi.dim() != q.dim()) throw DimensionMismatch("vector function has wrong dimension");
  return image(q, expr_family(q.dim(), {phi})).values(x).col(0);
}

Family image(const MatrixDifferentialOperator& q, const Family& base) {
  return Family(std::make_shared<ImageFamily>(q, base));
}

ResidualReport make_report(const FamilyDifference& d, double tolerance) {
  ResidualReport r;
  r.residual = d.residual;
  r.scale = d.scale;
  r.tolerance = tolerance;
  r.pass = d.residual <= tolerance * d.scale;
  return r;
}

ResidualReport kernel_residual(const MatrixDifferentialOperator& q, const std::vector<double>& grid,
                               double tolerance) {
  const auto& origin = require_origin(q);
  const int N = q.order();
  FamilyDifference d;
  for (double x : grid) {
    const FamilyJet kj = origin.kernel.family.jet(x, N);
    const CoefficientJet c = q.coefficient_jet(x, 0);
    CMatrix sum = CMatrix::Zero(q.dim(), origin.kernel.family.size());
    for (int j = 0; j <= N; ++j) {
      const CMatrix term = c[static_cast<std::size_t>(j)][0] * kj[static_cast<std::size_t>(j)];
      d.scale = std::max(d.scale, numkit::max_abs(term));
      sum += term;
    }
    d.residual = std::max(d.residual, numkit::max_abs(sum));
  }
  return make_report(d, tolerance);
}

ResidualReport intertwining_residual(const MatrixDifferentialOperator& q, const Hamiltonian& h_from,
                                     const Hamiltonian& h_to, const Family& tests,
                                     const std::vector<double>& grid, double tolerance) {
  const Family lhs = image(q, shifted_image(h_from, 0.0, tests));
  const Family rhs = shifted_image(h_to, 0.0, image(q, tests));
  return make_report(compare_families(lhs, rhs, grid), tolerance);
}

}  // namespace intertwine
