#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "intertwine/expr.hpp"
#include "intertwine/types.hpp"

namespace intertwine {

/// n-component vector of expressions.
struct VectorFunction {
  std::vector<Expr> components;

  VectorFunction() = default;
  VectorFunction(std::initializer_list<Expr> c) : components(c) {}
  explicit VectorFunction(std::vector<Expr> c) : components(std::move(c)) {}

  int dim() const { return static_cast<int>(components.size()); }
  CVector evaluate(double x) const;
};

/// H = -I d^2/dx^2 + V(x) with a symbolic n x n potential (row-major).
class MatrixHamiltonian {
 public:
  MatrixHamiltonian(int n, std::vector<Expr> potential);
  /// Zero potential of order n.
  static MatrixHamiltonian free(int n);

  int dim() const { return n_; }
  const Expr& potential(int i, int j) const { return v_[static_cast<std::size_t>(i * n_ + j)]; }
  CMatrix potential_at(double x) const;

 private:
  int n_;
  std::vector<Expr> v_;
};

/// H Phi = -Phi'' + V Phi, symbolically.
VectorFunction apply_hamiltonian(const MatrixHamiltonian& h, const VectorFunction& phi);

/// (lambda - H)^power Phi, symbolically.
VectorFunction apply_shifted(const MatrixHamiltonian& h, Complex lambda, int power,
                             const VectorFunction& phi);

/// Jordan chain: H Phi_0 = lambda Phi_0, (H - lambda) Phi_i = Phi_{i-1}.
struct AssociationChain {
  Complex lambda;
  std::vector<VectorFunction> members;

  int length() const { return static_cast<int>(members.size()); }
};

struct ChainSet {
  std::vector<AssociationChain> chains;

  int total() const;
  /// Members of all chains in chain order.
  std::vector<VectorFunction> flattened() const;
};

struct ChainReport {
  std::vector<double> link_residuals;  // one per member, max over the grid
  double scale = 1.0;                  // max |term| seen, at least one
  double tolerance = 0.0;
  bool pass = false;
  double max_residual() const;
};

/// Checks every link of the chain on the grid; never throws for bad chains.
ChainReport verify_chain(const MatrixHamiltonian& h, const AssociationChain& chain,
                         const std::vector<double>& grid, double tolerance = 1e-10);

/// Eigenvalue and Jordan block orders of T+ restricted to one eigenvalue.
struct SpectralEntry {
  Complex lambda;
  std::vector<int> block_orders;

  int geometric_multiplicity() const { return static_cast<int>(block_orders.size()); }
  int kappa() const;      // largest block order
  int min_order() const;  // smallest block order
};

struct SpectralSummary {
  std::vector<SpectralEntry> entries;
  std::vector<std::string> warnings;

  int total() const;
};

/// Orientation of the materialized T+ blocks, recorded in reports.
inline constexpr const char* kTPlusConvention =
    "lower-bidiagonal: H Phi_i = lambda Phi_i + Phi_{i-1}";

/// Chain shape: the only data the spectral bookkeeping needs.
struct ChainShape {
  Complex lambda;
  int length = 0;
};

std::vector<ChainShape> shapes_of(const ChainSet& cs);

bool same_eigenvalue(Complex a, Complex b);

/// Groups chains by eigenvalue (first-appearance order). Throws EmptyChainSet.
/// When `n` is positive a warning is recorded for eigenvalues with more than 2n
/// blocks, which no solution space of a second-order n x n system can hold.
SpectralSummary spectral_summary(const std::vector<ChainShape>& chains, int n = 0);
SpectralSummary spectral_summary(const ChainSet& cs, int n = 0);

/// Block-diagonal T+ with H Phi_i = sum_j T_ij Phi_j in the concatenated basis.
CMatrix t_plus_matrix(const std::vector<ChainShape>& chains);
CMatrix t_plus_matrix(const ChainSet& cs);

// ---------------------------------------------------------------------------
// Pointwise machinery. Everything downstream of the symbolic input works with
// derivative jets evaluated at a point.

/// jet[k] is the n x m matrix whose column r holds the k-th derivative of
/// member r.
using FamilyJet = std::vector<CMatrix>;

/// Source of pointwise derivative jets for a family of n-vector functions.
class FamilySource {
 public:
  virtual ~FamilySource() = default;
  virtual int dim() const = 0;
  virtual int size() const = 0;
  virtual FamilyJet jet(double x, int order) const = 0;
};

/// Value handle over an immutable FamilySource.
class Family {
 public:
  Family() = default;
  explicit Family(std::shared_ptr<const FamilySource> src) : src_(std::move(src)) {}

  int dim() const { return src_->dim(); }
  int size() const { return src_->size(); }
  FamilyJet jet(double x, int order) const { return src_->jet(x, order); }
  CMatrix values(double x) const { return jet(x, 0)[0]; }

 private:
  std::shared_ptr<const FamilySource> src_;
};

/// Family backed by expressions; derivative trees are built on demand and cached.
Family expr_family(int n, std::vector<VectorFunction> members);
/// Members picked by index from another family.
Family select(const Family& base, std::vector<int> indices);
/// Columns of `a` followed by columns of `b`.
Family concat(const Family& a, const Family& b);
/// Linear combinations: member c of the result is sum_r weights(r, c) base_r.
Family mix(const Family& base, const CMatrix& weights);

/// Source of pointwise potential jets: jet[k] = V^{(k)}(x).
class PotentialSource {
 public:
  virtual ~PotentialSource() = default;
  virtual int dim() const = 0;
  virtual std::vector<CMatrix> jet(double x, int order) const = 0;
};

/// Pointwise Hamiltonian handle H = -I d^2 + V(x); V may be symbolic or derived.
class Hamiltonian {
 public:
  Hamiltonian() = default;
  explicit Hamiltonian(std::shared_ptr<const PotentialSource> src) : src_(std::move(src)) {}
  Hamiltonian(const MatrixHamiltonian& h);  // NOLINT(google-explicit-constructor)

  int dim() const { return src_->dim(); }
  std::vector<CMatrix> potential_jet(double x, int order) const { return src_->jet(x, order); }
  CMatrix potential(double x) const { return potential_jet(x, 0)[0]; }

 private:
  std::shared_ptr<const PotentialSource> src_;
};

/// (H - shift) applied to every member of a family.
Family shifted_image(const Hamiltonian& h, Complex shift, const Family& base);

/// prod_l (H - lambda_l)^{power_l} applied to a family.
Family polynomial_image(const Hamiltonian& h, const std::vector<std::pair<Complex, int>>& roots,
                        const Family& base);

/// Kernel data of an operator: a family together with its chain layout.
struct KernelBasis {
  Family family;
  std::vector<ChainShape> chains;

  int total() const;
};

KernelBasis kernel_basis(const ChainSet& cs, int n);

/// Maximum over the grid of the infinity norm of a - b, together with the
/// largest magnitude seen in either family (floored at one).
struct FamilyDifference {
  double residual = 0.0;
  double scale = 1.0;
  double relative() const { return residual / scale; }
};

FamilyDifference compare_families(const Family& a, const Family& b, const std::vector<double>& grid);
/// Same comparison against zero.
FamilyDifference family_magnitude(const Family& a, const std::vector<double>& grid);

/// Default probe functions used for operator identity residuals.
std::vector<VectorFunction> default_test_functions(int n);

}  // namespace intertwine
