#ifndef QTRAJ_TRAJECTORY_HPP
#define QTRAJ_TRAJECTORY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/density_matrix.hpp"
#include "qtraj/kraus_model.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

/// Stable 16-hex-digit fingerprint of a model (FNV-1a over a canonical
/// serialization); identifies the generator in record headers.
std::string model_fingerprint(const KrausModel& model);

/// One sampled measurement run: header identity plus the outcome sequence.
/// States are kept only when requested at generation time.
struct TrajectoryRecord {
  std::string model_hash;
  std::uint64_t seed = 0;
  Index dim = 0;
  std::vector<std::string> outcomes;  // labels in step order
  std::optional<Matrix> initial_state;
  std::vector<Matrix> states;  // post-measurement state per step when recorded

  std::size_t size() const { return outcomes.size(); }
};

/// The sampled Markov chain: outcome y drawn with probability Tr(K_y(rho)),
/// state replaced by the normalized conditional update.
class TrajectorySimulator {
 public:
  TrajectorySimulator(KrausModel model, const DensityMatrix& initial, std::uint64_t seed);

  struct Step {
    std::size_t outcome;
    double probability;
  };

  Step step();

  const KrausModel& model() const { return model_; }
  const Matrix& state_raw() const { return state_; }
  DensityMatrix state() const { return DensityMatrix::make(state_); }
  std::uint64_t step_index() const { return step_index_; }

 private:
  KrausModel model_;
  Matrix state_;
  std::uint64_t step_index_ = 0;
  Rng rng_;
};

/// Batched simulation; a pure function of (model, initial, steps, seed).
TrajectoryRecord run_trajectory(const KrausModel& model, const DensityMatrix& initial,
                                std::uint64_t n_steps, std::uint64_t seed, bool record_states);

/// Conditional-state estimator driven by externally supplied outcomes. The
/// caller owes ker(rho0_hat) contained in ker(rho0) of the data source; a
/// vanishing update trace signals that condition failed and throws.
class EstimationFilter {
 public:
  EstimationFilter(KrausModel model, const DensityMatrix& initial);

  DensityMatrix step(std::size_t outcome);

  const KrausModel& model() const { return model_; }
  const Matrix& estimate_raw() const { return estimate_; }
  DensityMatrix estimate() const { return DensityMatrix::make(estimate_); }
  std::uint64_t step_index() const { return step_index_; }

 private:
  KrausModel model_;
  Matrix estimate_;
  std::uint64_t step_index_ = 0;
};

}  // namespace qtraj

#endif
