#ifndef QTRAJ_KRAUS_MODEL_HPP
#define QTRAJ_KRAUS_MODEL_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtraj/density_matrix.hpp"
#include "qtraj/matrix_ops.hpp"

namespace qtraj {

inline constexpr double kCompletenessTol = 1e-9;

// Probabilities below this are treated as true zero-probability branches.
inline constexpr double kProbabilityFloor = 1e-14;

struct ModelParam {
  std::string registry;
  std::vector<double> values;
};

struct ValidityReport {
  bool pass = false;
  double residual = 0.0;  // max-abs of sum V†V - 1
};

/// A measurement model: outcome alphabet and, per outcome y, operators
/// {V_{y,mu}} with sum V†V = 1. Imperfect measurements are pre-compiled into
/// scaled operators at load time, so a single operator list per outcome
/// covers both perfect and imperfect readout.
class KrausModel {
 public:
  /// Structural checks only (square d x d operators, one non-empty list per
  /// outcome, unique labels). Completeness is reported by validate_model and
  /// enforced by make_validated / the model loaders.
  KrausModel(Index dim, std::vector<std::string> outcome_labels,
             std::vector<std::vector<Matrix>> operators,
             std::optional<ModelParam> param = std::nullopt);

  /// Constructs and additionally requires the completeness residual <= 1e-9.
  static KrausModel make_validated(Index dim, std::vector<std::string> outcome_labels,
                                   std::vector<std::vector<Matrix>> operators,
                                   std::optional<ModelParam> param = std::nullopt);

  /// Identity model: one outcome, V = 1.
  static KrausModel identity(Index dim);

  /// Block direct sum: dim = a.dim + b.dim, operators diag(V^a, V^b) matched
  /// by outcome label. Both inputs must share the alphabet.
  static KrausModel direct_sum(const KrausModel& a, const KrausModel& b);

  Index dim() const { return dim_; }
  std::size_t n_outcomes() const { return labels_.size(); }
  const std::vector<std::string>& outcome_labels() const { return labels_; }
  const std::vector<Matrix>& operators(std::size_t y) const;
  const std::optional<ModelParam>& param() const { return param_; }

  /// Index of a label in the alphabet; throws ValidationError when unknown.
  std::size_t outcome_index(const std::string& label) const;

 private:
  Index dim_;
  std::vector<std::string> labels_;
  std::vector<std::vector<Matrix>> ops_;
  std::optional<ModelParam> param_;
};

/// Completeness report: pass iff ||sum V†V - 1||_max <= 1e-9.
ValidityReport validate_model(const KrausModel& model);

/// Unnormalized map K_y(rho) = sum_mu V rho V†. Positive semidefinite with
/// trace in [0,1] for valid inputs.
Matrix apply_kraus(const KrausModel& model, std::size_t y, const Matrix& rho);

/// Tr(K_y(rho)).
double outcome_probability(const KrausModel& model, std::size_t y, const DensityMatrix& rho);

/// The channel Phi(rho) = sum_y K_y(rho).
DensityMatrix channel_apply(const KrausModel& model, const DensityMatrix& rho);

/// Raw channel action on an arbitrary matrix (no density-matrix validation).
Matrix channel_apply_raw(const KrausModel& model, const Matrix& x);

/// Probability of a finite outcome word: Tr(K_{y_{n-1}} o ... o K_{y_0}(rho)).
/// Direct composed products; intended for short words (entries underflow past
/// length ~50 — long-word likelihoods belong to the log-space filter).
double word_likelihood(const KrausModel& model, std::span<const std::size_t> word,
                       const DensityMatrix& rho);

struct KrausStep {
  double probability = 0.0;  // Tr(K_y(rho))
  Matrix state;              // K_y(rho)/Tr, re-Hermitized; input copy if Tr under floor
};

/// One conditional update. Shared by the simulator, the estimation filter and
/// the hypothesis blocks so replays reproduce states bit-exactly.
KrausStep kraus_step(const KrausModel& model, std::size_t y, const Matrix& rho);

/// Inverse-CDF outcome draw in declared label order from uniform u in [0,1).
/// Throws NumericalError when every outcome probability is below the floor.
std::size_t sample_outcome(const KrausModel& model, const Matrix& rho, double u);

}  // namespace qtraj

#endif
