#ifndef QTRAJ_CHANNEL_ANALYSIS_HPP
#define QTRAJ_CHANNEL_ANALYSIS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/density_matrix.hpp"
#include "qtraj/kraus_model.hpp"

namespace qtraj {

// Eigenvalue-1 detection tolerance, with a warning band above it.
inline constexpr double kFixedPointTol = 1e-9;
inline constexpr double kFixedPointWarnTol = 1e-6;

// Word-probability separation threshold for identifiability.
inline constexpr double kSeparationTol = 1e-9;

// Exhaustive enumeration replaces sampling when |Y|^n stays at desk scale.
inline constexpr std::int64_t kExhaustiveWordBudget = 4096;

// Identifiability refuses searches beyond this many words per length.
inline constexpr double kIdentifiabilityBudget = 1e7;

/// Matrix realization of the channel on column-vectorized states:
/// S vec(rho) = vec(Phi(rho)).
struct Superoperator {
  Index dim = 0;  // d; the matrix is d^2 x d^2
  Matrix mat;

  Matrix apply(const Matrix& rho) const;
};

Superoperator build_superoperator(const KrausModel& model);

/// Orthonormal (Hilbert-Schmidt) Hermitian basis of {X : Phi(X) = X}.
struct FixedPointSpace {
  std::vector<Matrix> basis;
  std::vector<std::string> warnings;  // rank-ambiguity notes

  Index dimension() const { return static_cast<Index>(basis.size()); }
};

FixedPointSpace fixed_point_space(const KrausModel& model);

struct MinimalSubspace {
  Matrix projector;        // Hermitian idempotent M_i on the full space
  Index dim = 0;           // dim V_i
  Matrix invariant_state;  // minimal invariant state supported on V_i (d x d)
};

/// Invariant-structure report. When no full-rank invariant state exists the
/// channel is not faithful; the subspaces then decompose the maximal
/// invariant support rather than the whole space.
struct ChannelDecomposition {
  bool faithful = false;
  std::vector<MinimalSubspace> subspaces;
  Matrix maximal_invariant_state;  // maximal-rank invariant state (d x d)
  std::vector<std::string> warnings;

  std::size_t count() const { return subspaces.size(); }
};

ChannelDecomposition decompose(const KrausModel& model);

struct PairSeparation {
  std::size_t subspace_a = 0;
  std::size_t subspace_b = 0;
  bool separated = false;
  std::vector<std::size_t> witness;  // shortest separating word (outcome indices)
  double witness_prob_a = 0.0;
  double witness_prob_b = 0.0;
  double margin = 0.0;      // |P_a - P_b| at the witness, or max margin seen if undecided
};

struct IdentifiabilityResult {
  bool decided = false;     // every pair of minimal invariant states separated
  std::vector<PairSeparation> pairs;
};

/// Exhaustive word search up to max_len over every pair of minimal invariant
/// states of the two channels. Requires both channels faithful. Refuses when
/// |Y|^max_len exceeds the word budget.
IdentifiabilityResult check_identifiability(const KrausModel& model_a,
                                            const KrausModel& model_b, int max_len);

struct EntropyRateEstimate {
  int word_length = 0;
  std::int64_t sample_count = 0;
  double estimate = 0.0;       // nats per step
  double standard_error = 0.0;
  bool exhaustive = false;
  bool infinite = false;       // some P-positive word had Q-probability 0
};

/// Relative entropy rate estimate (1/n) E_P[log P(w)/Q(w)] over words of
/// length n. Exhaustive when |Y|^n <= 4096 (sample count then ignored),
/// otherwise Monte Carlo with M words sampled from (model_p, state_p).
EntropyRateEstimate entropy_rate(const KrausModel& model_p, const DensityMatrix& state_p,
                                 const KrausModel& model_q, const DensityMatrix& state_q,
                                 int n, std::int64_t samples, std::uint64_t seed);

}  // namespace qtraj

#endif
