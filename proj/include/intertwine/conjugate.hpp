#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "intertwine/construct.hpp"
#include "intertwine/schrodinger.hpp"

namespace intertwine {

/// Monic P(lambda) = prod (lambda - lambda_l)^{kappa_l}.
struct SusyPolynomial {
  std::vector<std::pair<Complex, int>> roots;
  int order = 0;            // N of Q-
  int conjugate_order = 0;  // N' = 2 deg P - N

  int degree() const;
  Complex operator()(Complex lambda) const;
};

SusyPolynomial susy_polynomial(const SpectralSummary& summary, int order);

/// Chains of H+ completing ker prod (H+ - lambda_l)^{kappa_l}: per eigenvalue
/// 2n chains holding 2n kappa_l members, the generating chains of Q- among them.
struct ExtensionBasis {
  std::vector<AssociationChain> chains;
};

struct ConjugateResult {
  MatrixDifferentialOperator q_plus;
  SusyPolynomial polynomial;
  KernelBasis kernel;             // images Q- Psi that survive, as H- chains
  Complex normalization{1.0, 0.0};  // scalar fitted on top of the analytic leading coefficient
  ResidualReport product;         // ||Q+ Q- Phi - P(H+) Phi||
};

/// Builds Q+ from the images of the extension chains under Q-. Needs Q- built
/// by build_intertwiner. Throws ExtensionCountMismatch, SingularWronskian or
/// NormalizationFailure.
ConjugateResult build_conjugate(const MatrixDifferentialOperator& q_minus, const Hamiltonian& h_minus,
                                const ExtensionBasis& ext, const Grid& window, const Tolerances& tol = {},
                                const std::vector<VectorFunction>& tests = {});
ConjugateResult build_conjugate(const MatrixDifferentialOperator& q_minus, const ExtensionBasis& ext,
                                const Grid& window, const Tolerances& tol = {},
                                const std::vector<VectorFunction>& tests = {});

enum class SymmetryMode { Hermitian, Transpose, ComplexConjugate };

std::string to_string(SymmetryMode mode);
/// "hermitian", "transpose" or "complex_conjugate". Throws std::invalid_argument.
SymmetryMode parse_symmetry_mode(const std::string& text);

/// Q+ from the symmetry cases of the Hamiltonian pair:
///   hermitian  sum (-d)^j X_j^dagger,  transpose  sum (-d)^j X_j^t,
///   conjugate  sum X_j^* d^j.
/// The required symmetry of (H+, H-) is checked on the window first; throws
/// SymmetryViolated with the measured relative defect.
MatrixDifferentialOperator conjugate_by_symmetry(const MatrixDifferentialOperator& q_minus, SymmetryMode mode,
                                                 const Hamiltonian& h_plus, const Hamiltonian& h_minus,
                                                 const Grid& window, const Tolerances& tol = {});

struct AlgebraReport {
  ResidualReport plus_minus;                   // (a) Q+ Q- = P(H+)
  std::optional<ResidualReport> minus_plus;    // (b) Q- Q+ = P(H-), only when asserted
  double nilpotency = 0.0;                     // (c) Q^2 = Qbar^2 = 0, exact by block structure
  ResidualReport intertwining_minus;           // (d) Q- H+ = H- Q-
  ResidualReport intertwining_plus;            // (d) Q+ H- = H+ Q+
  bool degree_identity = false;                // N + N' = 2 deg P

  bool pass() const;
};

AlgebraReport verify_susy_algebra(const MatrixDifferentialOperator& q_plus, const MatrixDifferentialOperator& q_minus,
                                  const Hamiltonian& h_plus, const Hamiltonian& h_minus, const SusyPolynomial& p,
                                  const Family& tests, const std::vector<double>& grid, bool check_minus_plus,
                                  double tolerance = 1e-8);

}  // namespace intertwine
