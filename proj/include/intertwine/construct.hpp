#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "intertwine/schrodinger.hpp"
#include "intertwine/types.hpp"

namespace intertwine {

/// jet[j][a] = a-th derivative of the coefficient X_j at x (j = 0..order).
using CoefficientJet = std::vector<std::vector<CMatrix>>;

class CoefficientSource {
 public:
  virtual ~CoefficientSource() = default;
  virtual int dim() const = 0;
  virtual int order() const = 0;
  virtual CMatrix leading() const = 0;
  virtual CoefficientJet jet(double x, int derivatives) const = 0;
};

/// Where a kernel-built operator came from: the Hamiltonian it acts on and the
/// chain basis of its kernel.
struct OperatorOrigin {
  Hamiltonian base;
  KernelBasis kernel;
};

/// Q = sum_j X_j(x) d^j with constant leading coefficient X_N.
class MatrixDifferentialOperator {
 public:
  MatrixDifferentialOperator(std::shared_ptr<const CoefficientSource> src,
                             std::optional<OperatorOrigin> origin = std::nullopt)
      : src_(std::move(src)), origin_(std::move(origin)) {}

  int dim() const { return src_->dim(); }
  int order() const { return src_->order(); }
  CMatrix leading() const { return src_->leading(); }
  CMatrix coefficient(int j, double x) const { return coefficient_jet(x, 0)[static_cast<std::size_t>(j)][0]; }
  CoefficientJet coefficient_jet(double x, int derivatives) const { return src_->jet(x, derivatives); }
  const std::optional<OperatorOrigin>& origin() const { return origin_; }

 private:
  std::shared_ptr<const CoefficientSource> src_;
  std::optional<OperatorOrigin> origin_;
};

/// Row r holds member r and its derivatives up to order N-1, grouped by
/// derivative order with the component index running fastest.
struct WronskianEvaluation {
  double x = 0.0;
  CMatrix matrix;
  Complex det;
};

WronskianEvaluation wronskian(const Family& kernel, int order, double x);
/// Throws CountMismatch unless the chain set holds exactly n*N members.
WronskianEvaluation wronskian(const ChainSet& cs, int n, int order, double x);

/// Builds the unique operator with leading coefficient `leading` whose kernel
/// contains every kernel member. The lower coefficients are evaluated
/// pointwise as ratios of Wronskian-type determinants. Throws SingularLeading
/// or SingularWronskian (first failing window point).
MatrixDifferentialOperator build_intertwiner(const Hamiltonian& h_plus, const KernelBasis& kernel,
                                             const CMatrix& leading, const Grid& window,
                                             const Tolerances& tol = {});

MatrixDifferentialOperator build_intertwiner(const MatrixHamiltonian& h_plus, const ChainSet& cs,
                                             const Grid& window = {}, const Tolerances& tol = {});
MatrixDifferentialOperator build_intertwiner(const MatrixHamiltonian& h_plus, const ChainSet& cs,
                                             const CMatrix& leading, const Grid& window = {},
                                             const Tolerances& tol = {});

/// V_-(x) = X_N V_+(x) X_N^{-1} + 2 X_{N-1}'(x) X_N^{-1}, where X_{N-1}' comes
/// from the quotient rule with Jacobi's formula for the determinant
/// derivatives. Needs an operator built by build_intertwiner.
CMatrix final_potential(const MatrixDifferentialOperator& q, double x);

/// The transformed Hamiltonian H_- with pointwise potential jets. The
/// potential derivatives use the multilinear expansion of the determinants.
Hamiltonian final_hamiltonian(const MatrixDifferentialOperator& q);
Hamiltonian final_hamiltonian(const MatrixDifferentialOperator& q, const Hamiltonian& h_plus);

CVector apply_operator(const MatrixDifferentialOperator& q, const VectorFunction& phi, double x);

/// Pointwise family Q Phi_r; derivatives are exact through the coefficient jets.
Family image(const MatrixDifferentialOperator& q, const Family& base);

struct ResidualReport {
  double residual = 0.0;
  double scale = 1.0;
  double tolerance = 0.0;
  bool pass = false;
  double relative() const { return residual / scale; }
};

ResidualReport make_report(const FamilyDifference& d, double tolerance);

/// max ||Q Phi_l|| over the window for every kernel member. The scale is the
/// largest term |X_j Phi_l^{(j)}|.
ResidualReport kernel_residual(const MatrixDifferentialOperator& q, const std::vector<double>& grid,
                               double tolerance = 1e-8);

/// Q H_from = H_to Q checked on test functions: max ||Q(H_from Phi) - H_to(Q Phi)||.
ResidualReport intertwining_residual(const MatrixDifferentialOperator& q, const Hamiltonian& h_from,
                                     const Hamiltonian& h_to, const Family& tests,
                                     const std::vector<double>& grid, double tolerance = 1e-8);

}  // namespace intertwine
