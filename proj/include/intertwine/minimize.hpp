#pragma once

#include <utility>
#include <vector>

#include "intertwine/construct.hpp"
#include "intertwine/schrodinger.hpp"

namespace intertwine {

/// Q = P * prod_l (lambda_l - H_+)^{k_l} with P of order M = N - 2 sum k_l.
struct MinimizationCertificate {
  std::vector<std::pair<Complex, int>> factors;  // (lambda_l, k_l)
  int order = 0;                                 // N of the operator examined
  int residual_order = 0;                        // M

  bool minimizable() const { return !factors.empty(); }
  int degree() const;
  /// Root multiset of the monic polynomial prod (lambda - lambda_l)^{k_l}.
  std::vector<Complex> polynomial_roots() const;
};

/// Selects every eigenvalue carrying exactly 2n Jordan blocks, each with the
/// smallest block order at that eigenvalue. Empty factors mean the operator
/// is not minimizable.
MinimizationCertificate minimizable_factors(const SpectralSummary& summary, int n);

struct MinimizationResult {
  MatrixDifferentialOperator p;
  ChainSet reduced;          // kernel chains of P
  ResidualReport residual;   // ||Q Phi - P(prod (lambda_l - H)^{k_l} Phi)|| on test functions
};

/// prod_l (lambda_l - H)^{k_l} applied to every chain member. Identically zero
/// images (grid sup <= zero_rel * chain scale) are dropped; they must form a
/// prefix of their chain. Throws FactorInconsistent otherwise.
ChainSet reduce_chains(const MatrixHamiltonian& h, const ChainSet& cs,
                       const std::vector<std::pair<Complex, int>>& factors, const Grid& window,
                       double zero_rel = 1e-10);

/// Builds P from the reduced chains with the same leading coefficient as Q and
/// verifies the factorization on `tests`. Throws FactorInconsistent for an
/// empty certificate or a reduced count different from n*M, and propagates
/// SingularWronskian.
MinimizationResult minimize(const MatrixHamiltonian& h, const ChainSet& cs, const MinimizationCertificate& cert,
                            const CMatrix& leading, const Grid& window, const Tolerances& tol = {},
                            const std::vector<VectorFunction>& tests = {});

}  // namespace intertwine
