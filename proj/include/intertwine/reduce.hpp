#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intertwine/construct.hpp"
#include "intertwine/schrodinger.hpp"

namespace intertwine {

/// An H+-invariant subspace of ker Q: a prefix of every chain of a (possibly
/// mixed) chain basis.
struct SubkernelCandidate {
  int order = 0;              // M
  std::vector<int> prefix;    // selected prefix length per chain
  /// d x d weights: column r is member r of the mixed basis in terms of the
  /// original flattened members. Empty for the original basis.
  CMatrix mixing;
  bool probe = false;

  int selected() const;
};

/// Every prefix assignment with n*M members and, when an eigenvalue carries
/// two or more chains, `probes` random-mixing candidates. Requires 1 <= M < N;
/// throws std::invalid_argument otherwise.
std::vector<SubkernelCandidate> enumerate_subkernels(const ChainSet& cs, int n, int residual_order, int probes = 32,
                                                     std::uint64_t seed = 0);

/// Chain basis of the candidate's subspace (selected prefixes).
KernelBasis candidate_basis(const ChainSet& cs, int n, const SubkernelCandidate& c);
/// Chain basis of the complementary members (chain suffixes), in the same
/// basis as the candidate.
KernelBasis remainder_basis(const ChainSet& cs, int n, const SubkernelCandidate& c);

enum class WronskianStatus { Nonvanishing, VanishesSomewhere, IdenticallyZero };
std::string to_string(WronskianStatus s);

struct CandidateEvidence {
  SubkernelCandidate candidate;
  WronskianStatus status = WronskianStatus::IdenticallyZero;
  double min_window_ratio = 0.0;  // smallest conditioning ratio on the window
  double max_sample_ratio = 0.0;  // largest ratio over window and random samples
};

struct Factorization {
  MatrixDifferentialOperator p;  // order M, leading identity
  Hamiltonian h_m;               // intermediate Hamiltonian
  MatrixDifferentialOperator k;  // order N - M, leading X_N
  ResidualReport residual;       // ||Q Phi - K(P Phi)||
};

enum class Verdict { Reducible, Irreducible, AbsolutelyIrreducible };
std::string to_string(Verdict v);

struct ReducibilityVerdict {
  Verdict verdict = Verdict::AbsolutelyIrreducible;
  int order = 0;                 // M of the witness when reducible
  std::optional<SubkernelCandidate> witness;
  std::optional<Factorization> factorization;
  std::vector<CandidateEvidence> evidence;
  bool exact = true;  // false when random probes stand in for continuous families
  Grid window;
  std::uint64_t seed = 0;
  int samples = 64;
  double sample_radius = 10.0;
};

/// Wronskian status of one candidate: on the window and at `samples` seeded
/// random points in [-radius, radius].
CandidateEvidence classify_candidate(const ChainSet& cs, int n, const SubkernelCandidate& c, const Grid& window,
                                     const std::vector<double>& samples, double threshold);

/// Q = K P with P built on the candidate, H_M = final Hamiltonian of P, and K
/// built on the images of the remaining members. Throws SingularWronskian or
/// CompositionDefect.
Factorization factorize(const MatrixHamiltonian& h_plus, const ChainSet& cs, const SubkernelCandidate& c,
                        const CMatrix& leading, const Grid& window, const Tolerances& tol = {},
                        const std::vector<VectorFunction>& tests = {});

ReducibilityVerdict classify_reducibility(const MatrixHamiltonian& h_plus, const ChainSet& cs, const CMatrix& leading,
                                          const Grid& window, const Tolerances& tol = {}, std::uint64_t seed = 0,
                                          int probes = 32, const std::vector<VectorFunction>& tests = {});

}  // namespace intertwine
