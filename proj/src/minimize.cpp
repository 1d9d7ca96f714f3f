#include "intertwine/minimize.hpp"

#include <algorithm>

#include "intertwine/errors.hpp"
#include "intertwine/numkit.hpp"

namespace intertwine {
namespace {

double sup_norm(const VectorFunction& f, const std::vector<double>& grid) {
  double r = 0.0;
  for (double x : grid) r = std::max(r, numkit::max_abs(f.evaluate(x)));
  return r;
}

}  // namespace

int MinimizationCertificate::degree() const {
  int d = 0;
  for (const auto& f : factors) d += f.second;
  return d;
}

std::vector<Complex> MinimizationCertificate::polynomial_roots() const {
  std::vector<Complex> roots;
  for (const auto& [lambda, k] : factors) roots.insert(roots.end(), static_cast<std::size_t>(k), lambda);
  return roots;
}

MinimizationCertificate minimizable_factors(const SpectralSummary& summary, int n) {
  MinimizationCertificate cert;
  cert.order = n > 0 ? summary.total() / n : 0;
  for (const auto& e : summary.entries) {
    if (e.geometric_multiplicity() == 2 * n) cert.factors.emplace_back(e.lambda, e.min_order());
  }
  cert.residual_order = cert.order - 2 * cert.degree();
  return cert;
}

ChainSet reduce_chains(const MatrixHamiltonian& h, const ChainSet& cs,
                       const std::vector<std::pair<Complex, int>>& factors, const Grid& window,
                       double zero_rel) {
  const auto grid = window.points();
  ChainSet out;
  for (const auto& chain : cs.chains) {
    double scale = 0.0;
    for (const auto& m : chain.members) scale = std::max(scale, sup_norm(m, grid));
    AssociationChain image{chain.lambda, {}};
    for (const auto& member : chain.members) {
      VectorFunction v = member;
      for (const auto& [lambda, k] : factors) v = apply_shifted(h, lambda, k, v);
      const bool zero = sup_norm(v, grid) <= zero_rel * std::max(scale, 1.0);
      if (zero && !image.members.empty()) {
        throw FactorInconsistent("a vanishing image follows a nonzero one in its chain");
      }
      if (!zero) image.members.push_back(std::move(v));
    }
    if (!image.members.empty()) out.chains.push_back(std::move(image));
  }
  return out;
}

MinimizationResult minimize(const MatrixHamiltonian& h, const ChainSet& cs, const MinimizationCertificate& cert,
                            const CMatrix& leading, const Grid& window, const Tolerances& tol,
                            const std::vector<VectorFunction>& tests) {
  if (!cert.minimizable()) throw FactorInconsistent("certificate has no factors: operator is not minimizable");
  const int n = h.dim();
  if (cert.residual_order < 0) throw FactorInconsistent("factor degrees exceed the operator order");

  ChainSet reduced = reduce_chains(h, cs, cert.factors, window, tol.zero_rel);
  if (reduced.total() != n * cert.residual_order) {
    throw FactorInconsistent("reduced kernel has " + std::to_string(reduced.total()) + " members, expected n*M = " +
                             std::to_string(n * cert.residual_order));
  }
  const Hamiltonian hp(h);
  const auto p = build_intertwiner(hp, kernel_basis(reduced, n), leading, window, tol);
  const auto q = build_intertwiner(hp, kernel_basis(cs, n), leading, window, tol);

  // prod (lambda_l - H)^{k_l} = (-1)^{sum k} prod (H - lambda_l)^{k_l}.
  const Family probes = expr_family(n, tests.empty() ? default_test_functions(n) : tests);
  const double sign = cert.degree() % 2 == 0 ? 1.0 : -1.0;
  const Family lhs = image(q, probes);
  const Family rhs = mix(image(p, polynomial_image(hp, cert.factors, probes)),
                         sign * CMatrix::Identity(probes.size(), probes.size()));
  return MinimizationResult{p, std::move(reduced), make_report(compare_families(lhs, rhs, window.points()), tol.residual)};
}

}  // namespace intertwine
