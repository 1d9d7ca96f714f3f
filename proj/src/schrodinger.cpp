#include "intertwine/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>

#include "intertwine/detail/binomial.hpp"
#include "intertwine/errors.hpp"
#include "intertwine/numkit.hpp"

namespace intertwine {

CVector VectorFunction::evaluate(double x) const {
  CVector v(dim());
  for (int m = 0; m < dim(); ++m) v(m) = intertwine::evaluate(components[static_cast<std::size_t>(m)], x);
  return v;
}

MatrixHamiltonian::MatrixHamiltonian(int n, std::vector<Expr> potential)
    : n_(n), v_(std::move(potential)) {
  if (n < 1) throw DimensionMismatch("Hamiltonian order must be positive");
  if (static_cast<int>(v_.size()) != n * n) {
    throw DimensionMismatch("potential needs n*n entries");
  }
}

MatrixHamiltonian MatrixHamiltonian::free(int n) {
  return MatrixHamiltonian(n, std::vector<Expr>(static_cast<std::size_t>(n * n)));
}

CMatrix MatrixHamiltonian::potential_at(double x) const {
  CMatrix v(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) v(i, j) = evaluate(potential(i, j), x);
  return v;
}

VectorFunction apply_hamiltonian(const MatrixHamiltonian& h, const VectorFunction& phi) {
  if (phi.dim() != h.dim()) throw DimensionMismatch("vector function has wrong dimension");
  const int n = h.dim();
  VectorFunction out;
  out.components.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Expr acc = -differentiate(phi.components[static_cast<std::size_t>(i)], 2);
    for (int j = 0; j < n; ++j) acc = acc + h.potential(i, j) * phi.components[static_cast<std::size_t>(j)];
    out.components.push_back(acc);
  }
  return out;
}

VectorFunction apply_shifted(const MatrixHamiltonian& h, Complex lambda, int power,
                             const VectorFunction& phi) {
  VectorFunction cur = phi;
  for (int p = 0; p < power; ++p) {
    VectorFunction hphi = apply_hamiltonian(h, cur);
    for (int m = 0; m < h.dim(); ++m) {
      auto& c = cur.components[static_cast<std::size_t>(m)];
      c = Expr(lambda) * c - hphi.components[static_cast<std::size_t>(m)];
    }
  }
  return cur;
}

int ChainSet::total() const {
  int t = 0;
  for (const auto& c : chains) t += c.length();
  return t;
}

std::vector<VectorFunction> ChainSet::flattened() const {
  std::vector<VectorFunction> out;
  for (const auto& c : chains)
    for (const auto& m : c.members) out.push_back(m);
  return out;
}

double ChainReport::max_residual() const {
  double r = 0.0;
  for (double v : link_residuals) r = std::max(r, v);
  return r;
}

ChainReport verify_chain(const MatrixHamiltonian& h, const AssociationChain& chain,
                         const std::vector<double>& grid, double tolerance) {
  ChainReport report;
  report.tolerance = tolerance;
  bool ok = !chain.members.empty();
  double base_norm = 0.0;
  std::vector<VectorFunction> hphi;
  for (const auto& m : chain.members) {
    if (m.dim() != h.dim()) throw DimensionMismatch("chain member has wrong dimension");
    hphi.push_back(apply_hamiltonian(h, m));
  }
  for (std::size_t i = 0; i < chain.members.size(); ++i) {
    double worst = 0.0;
    for (double x : grid) {
      const CVector phi = chain.members[i].evaluate(x);
      const CVector hp = hphi[i].evaluate(x);
      CVector lhs = hp - chain.lambda * phi;
      double scale = std::max(hp.cwiseAbs().maxCoeff(), std::abs(chain.lambda) * phi.cwiseAbs().maxCoeff());
      if (i > 0) {
        const CVector prev = chain.members[i - 1].evaluate(x);
        lhs -= prev;
        scale = std::max(scale, prev.cwiseAbs().maxCoeff());
      } else {
        base_norm = std::max(base_norm, phi.cwiseAbs().maxCoeff());
      }
      report.scale = std::max(report.scale, scale);
      worst = std::max(worst, lhs.cwiseAbs().maxCoeff());
    }
    report.link_residuals.push_back(worst);
  }
  // The eigenvector at the bottom of the chain must not vanish identically.
  if (base_norm == 0.0) ok = false;
  report.pass = ok && report.max_residual() <= tolerance * report.scale;
  return report;
}

int SpectralEntry::kappa() const { return *std::max_element(block_orders.begin(), block_orders.end()); }
int SpectralEntry::min_order() const {
  return *std::min_element(block_orders.begin(), block_orders.end());
}

int SpectralSummary::total() const {
  int t = 0;
  for (const auto& e : entries)
    for (int k : e.block_orders) t += k;
  return t;
}

bool same_eigenvalue(Complex a, Complex b) {
  return std::abs(a - b) <= 1e-12 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

std::vector<ChainShape> shapes_of(const ChainSet& cs) {
  std::vector<ChainShape> out;
  for (const auto& c : cs.chains) out.push_back({c.lambda, c.length()});
  return out;
}

SpectralSummary spectral_summary(const std::vector<ChainShape>& chains, int n) {
  SpectralSummary s;
  for (const auto& c : chains) {
    if (c.length <= 0) continue;
    auto it = std::find_if(s.entries.begin(), s.entries.end(),
                           [&](const SpectralEntry& e) { return same_eigenvalue(e.lambda, c.lambda); });
    if (it == s.entries.end()) {
      s.entries.push_back({c.lambda, {c.length}});
    } else {
      it->block_orders.push_back(c.length);
    }
  }
  if (s.entries.empty()) throw EmptyChainSet();
  if (n > 0) {
    for (const auto& e : s.entries) {
      if (e.geometric_multiplicity() > 2 * n) {
        s.warnings.push_back("eigenvalue carries " + std::to_string(e.geometric_multiplicity()) +
                             " blocks, more than 2n = " + std::to_string(2 * n));
      }
    }
  }
  return s;
}

SpectralSummary spectral_summary(const ChainSet& cs, int n) { return spectral_summary(shapes_of(cs), n); }

CMatrix t_plus_matrix(const std::vector<ChainShape>& chains) {
  int d = 0;
  for (const auto& c : chains) d += c.length;
  CMatrix t = CMatrix::Zero(d, d);
  int offset = 0;
  for (const auto& c : chains) {
    for (int i = 0; i < c.length; ++i) {
      t(offset + i, offset + i) = c.lambda;
      if (i > 0) t(offset + i, offset + i - 1) = 1.0;
    }
    offset += c.length;
  }
  return t;
}

CMatrix t_plus_matrix(const ChainSet& cs) { return t_plus_matrix(shapes_of(cs)); }

// ---------------------------------------------------------------------------

namespace {

class ExprFamily final : public FamilySource {
 public:
  ExprFamily(int n, std::vector<VectorFunction> members) : n_(n), members_(std::move(members)) {
    for (const auto& m : members_) {
      if (m.dim() != n_) throw DimensionMismatch("family member has wrong dimension");
    }
    std::vector<Expr> level;
    for (const auto& m : members_)
      for (const auto& c : m.components) level.push_back(c);
    derivatives_.push_back(std::move(level));
  }

  int dim() const override { return n_; }
  int size() const override { return static_cast<int>(members_.size()); }

  FamilyJet jet(double x, int order) const override {
    const auto levels = derivatives_upto(order);
    FamilyJet out;
    out.reserve(static_cast<std::size_t>(order + 1));
    for (int k = 0; k <= order; ++k) {
      CMatrix m(n_, size());
      const auto& lvl = *levels[static_cast<std::size_t>(k)];
      for (int r = 0; r < size(); ++r)
        for (int c = 0; c < n_; ++c) m(c, r) = evaluate(lvl[static_cast<std::size_t>(r * n_ + c)], x);
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  // Derivative levels are append-only, so handing out stable pointers is safe.
  std::vector<const std::vector<Expr>*> derivatives_upto(int order) const {
    std::lock_guard<std::mutex> lock(mutex_);
    while (static_cast<int>(derivatives_.size()) <= order) {
      std::vector<Expr> next;
      for (const auto& e : derivatives_.back()) next.push_back(differentiate(e));
      derivatives_.push_back(std::move(next));
    }
    std::vector<const std::vector<Expr>*> out;
    for (int k = 0; k <= order; ++k) out.push_back(&derivatives_[static_cast<std::size_t>(k)]);
    return out;
  }

  int n_;
  std::vector<VectorFunction> members_;
  mutable std::mutex mutex_;
  mutable std::deque<std::vector<Expr>> derivatives_;
};

class SelectFamily final : public FamilySource {
 public:
  SelectFamily(Family base, std::vector<int> idx) : base_(std::move(base)), idx_(std::move(idx)) {
    for (int i : idx_) {
      if (i < 0 || i >= base_.size()) throw DimensionMismatch("family index out of range");
    }
  }
  int dim() const override { return base_.dim(); }
  int size() const override { return static_cast<int>(idx_.size()); }
  FamilyJet jet(double x, int order) const override {
    FamilyJet b = base_.jet(x, order);
    FamilyJet out;
    for (const auto& lvl : b) {
      CMatrix m(dim(), size());
      for (int r = 0; r < size(); ++r) m.col(r) = lvl.col(idx_[static_cast<std::size_t>(r)]);
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  Family base_;
  std::vector<int> idx_;
};

class ConcatFamily final : public FamilySource {
 public:
  ConcatFamily(Family a, Family b) : a_(std::move(a)), b_(std::move(b)) {
    if (a_.dim() != b_.dim()) throw DimensionMismatch("concatenated families differ in dimension");
  }
  int dim() const override { return a_.dim(); }
  int size() const override { return a_.size() + b_.size(); }
  FamilyJet jet(double x, int order) const override {
    FamilyJet ja = a_.jet(x, order);
    FamilyJet jb = b_.jet(x, order);
    FamilyJet out;
    for (int k = 0; k <= order; ++k) {
      CMatrix m(dim(), size());
      m << ja[static_cast<std::size_t>(k)], jb[static_cast<std::size_t>(k)];
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  Family a_, b_;
};

class SymbolicPotential final : public PotentialSource {
 public:
  explicit SymbolicPotential(const MatrixHamiltonian& h) : n_(h.dim()) {
    std::vector<Expr> level;
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) level.push_back(h.potential(i, j));
    derivatives_.push_back(std::move(level));
  }
  int dim() const override { return n_; }
  std::vector<CMatrix> jet(double x, int order) const override {
    std::vector<const std::vector<Expr>*> levels;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      while (static_cast<int>(derivatives_.size()) <= order) {
        std::vector<Expr> next;
        for (const auto& e : derivatives_.back()) next.push_back(differentiate(e));
        derivatives_.push_back(std::move(next));
      }
      for (int k = 0; k <= order; ++k) levels.push_back(&derivatives_[static_cast<std::size_t>(k)]);
    }
    std::vector<CMatrix> out;
    for (const auto* lvl : levels) {
      CMatrix m(n_, n_);
      for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = evaluate((*lvl)[static_cast<std::size_t>(i * n_ + j)], x);
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  int n_;
  mutable std::mutex mutex_;
  mutable std::deque<std::vector<Expr>> derivatives_;
};

class MixedFamily final : public FamilySource {
 public:
  MixedFamily(Family base, CMatrix weights) : base_(std::move(base)), weights_(std::move(weights)) {
    if (weights_.rows() != base_.size()) throw DimensionMismatch("mixing weights do not match family size");
  }
  int dim() const override { return base_.dim(); }
  int size() const override { return static_cast<int>(weights_.cols()); }
  FamilyJet jet(double x, int order) const override {
    FamilyJet out = base_.jet(x, order);
    for (auto& m : out) m = m * weights_;
    return out;
  }

 private:
  Family base_;
  CMatrix weights_;
};

class ShiftedImage final : public FamilySource {
 public:
  ShiftedImage(Hamiltonian h, Complex shift, Family base)
      : h_(std::move(h)), shift_(shift), base_(std::move(base)) {
    if (h_.dim() != base_.dim()) throw DimensionMismatch("Hamiltonian and family differ in dimension");
  }
  int dim() const override { return base_.dim(); }
  int size() const override { return base_.size(); }
  FamilyJet jet(double x, int order) const override {
    const FamilyJet b = base_.jet(x, order + 2);
    const auto v = h_.potential_jet(x, order);
    FamilyJet out;
    for (int k = 0; k <= order; ++k) {
      CMatrix m = -b[static_cast<std::size_t>(k + 2)] - shift_ * b[static_cast<std::size_t>(k)];
      for (int a = 0; a <= k; ++a) {
        m += detail::binomial(k, a) * (v[static_cast<std::size_t>(a)] * b[static_cast<std::size_t>(k - a)]);
      }
      out.push_back(std::move(m));
    }
    return out;
  }

 private:
  Hamiltonian h_;
  Complex shift_;
  Family base_;
};

}  // namespace

Family expr_family(int n, std::vector<VectorFunction> members) {
  return Family(std::make_shared<ExprFamily>(n, std::move(members)));
}

Family select(const Family& base, std::vector<int> indices) {
  return Family(std::make_shared<SelectFamily>(base, std::move(indices)));
}

Family concat(const Family& a, const Family& b) { return Family(std::make_shared<ConcatFamily>(a, b)); }

Hamiltonian::Hamiltonian(const MatrixHamiltonian& h) : src_(std::make_shared<SymbolicPotential>(h)) {}

Family mix(const Family& base, const CMatrix& weights) {
  return Family(std::make_shared<MixedFamily>(base, weights));
}

Family shifted_image(const Hamiltonian& h, Complex shift, const Family& base) {
  return Family(std::make_shared<ShiftedImage>(h, shift, base));
}

Family polynomial_image(const Hamiltonian& h, const std::vector<std::pair<Complex, int>>& roots,
                        const Family& base) {
  Family cur = base;
  for (const auto& [lambda, power] : roots) {
    for (int p = 0; p < power; ++p) cur = shifted_image(h, lambda, cur);
  }
  return cur;
}

int KernelBasis::total() const {
  int t = 0;
  for (const auto& c : chains) t += c.length;
  return t;
}

KernelBasis kernel_basis(const ChainSet& cs, int n) {
  return KernelBasis{expr_family(n, cs.flattened()), shapes_of(cs)};
}

FamilyDifference compare_families(const Family& a, const Family& b, const std::vector<double>& grid) {
  if (a.dim() != b.dim() || a.size() != b.size()) throw DimensionMismatch("families differ in shape");
  FamilyDifference d;
  for (double x : grid) {
    const CMatrix va = a.values(x);
    const CMatrix vb = b.values(x);
    d.residual = std::max(d.residual, numkit::max_abs(va - vb));
    d.scale = std::max({d.scale, numkit::max_abs(va), numkit::max_abs(vb)});
  }
  return d;
}

FamilyDifference family_magnitude(const Family& a, const std::vector<double>& grid) {
  FamilyDifference d;
  for (double x : grid) d.residual = std::max(d.residual, numkit::max_abs(a.values(x)));
  return d;
}

std::vector<VectorFunction> default_test_functions(int n) {
  const Expr x = Expr::variable();
  std::vector<VectorFunction> out;
  for (int m = 0; m < n; ++m) {
    for (const Expr& f : {exp(Expr(0.5) * x), sin(Expr(2.0) * x)}) {
      VectorFunction v(std::vector<Expr>(static_cast<std::size_t>(n)));
      v.components[static_cast<std::size_t>(m)] = f;
      out.push_back(v);
    }
  }
  VectorFunction mixed(std::vector<Expr>(static_cast<std::size_t>(n)));
  for (int m = 0; m < n; ++m) {
    mixed.components[static_cast<std::size_t>(m)] = cos(x + Expr(static_cast<double>(m))) + Expr(0.25) * x;
  }
  out.push_back(mixed);
  return out;
}

}  // namespace intertwine
