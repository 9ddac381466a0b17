#ifndef QTRAJ_DISCRIMINATION_HPP
#define QTRAJ_DISCRIMINATION_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/density_matrix.hpp"
#include "qtraj/kraus_model.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

struct Candidate {
  std::string label;
  double value = std::numeric_limits<double>::quiet_NaN();  // NaN for file models
  KrausModel model;
};

/// Finite hypothesis set with a strictly positive prior. All candidate models
/// must share dimension and outcome alphabet.
class CandidateSet {
 public:
  CandidateSet(std::vector<Candidate> candidates, std::vector<double> prior);

  static std::vector<double> uniform_prior(std::size_t r);

  std::size_t size() const { return candidates_.size(); }
  const Candidate& candidate(std::size_t i) const { return candidates_[i]; }
  const std::vector<Candidate>& candidates() const { return candidates_; }
  const std::vector<double>& prior() const { return prior_; }
  Index dim() const { return candidates_.front().model.dim(); }
  const std::vector<std::string>& outcome_labels() const {
    return candidates_.front().model.outcome_labels();
  }

 private:
  std::vector<Candidate> candidates_;
  std::vector<double> prior_;
};

/// Per-step unnormalized log posteriors (log prior + cumulative
/// log-likelihood per candidate), entry 0 being the prior itself. Kept in log
/// form so slope diagnostics stay exact long after posteriors underflow.
struct PosteriorTrace {
  std::vector<std::vector<double>> log_scores;

  std::size_t steps() const { return log_scores.empty() ? 0 : log_scores.size() - 1; }
};

/// Block-diagonal hypothesis filter over the candidate set, maintained in log
/// space. A candidate whose conditional probability vanishes is frozen (log
/// weight -inf, state held) rather than deleted.
class HypothesisFilter {
 public:
  HypothesisFilter(const CandidateSet& candidates, const DensityMatrix& initial);

  /// Ingest one outcome; returns the updated posterior vector.
  std::vector<double> update(std::size_t outcome);

  /// Normalized posterior weights (max-shifted softmax of the log scores).
  std::vector<double> posteriors() const;

  /// log(prior) + cumulative log-likelihood per candidate; -inf when frozen.
  std::vector<double> log_scores() const;

  std::size_t size() const { return set_->size(); }
  const CandidateSet& candidate_set() const { return *set_; }
  bool frozen(std::size_t i) const;
  const Matrix& conditional_state_raw(std::size_t i) const { return states_[i]; }
  DensityMatrix conditional_state(std::size_t i) const;
  std::uint64_t step_index() const { return step_index_; }

  /// The implied block state diag(pi_1 rho_1, ..., pi_r rho_r) on C^{r d}.
  DensityMatrix block_state() const;

 private:
  const CandidateSet* set_;
  std::vector<double> log_weight_;  // cumulative log-likelihood, -inf = frozen
  std::vector<Matrix> states_;
  std::uint64_t step_index_ = 0;
};

struct SelectionResult {
  std::optional<std::size_t> selected;
  std::uint64_t crossing_step = 0;  // steps consumed when the threshold was crossed
  std::vector<double> final_posteriors;
  std::uint64_t steps_consumed = 0;
  PosteriorTrace trace;
};

/// Feed record outcomes until some posterior exceeds 1 - epsilon or the data
/// (or max_steps) runs out. Requires 0 < epsilon < 1/2.
SelectionResult run_discrimination(const CandidateSet& candidates, const DensityMatrix& initial,
                                   const TrajectoryRecord& record, double epsilon,
                                   std::uint64_t max_steps);

struct LyapunovEstimate {
  double slope = 0.0;       // nats per step
  double std_error = 0.0;
  bool frozen = false;
};

/// Least-squares slope of step -> log(pi^p / pi^p*) over the last half of the
/// trace, computed from log scores directly. The standard error models the
/// path as linear drift plus independent per-step innovations. Requires at
/// least 100 recorded steps.
LyapunovEstimate lyapunov_estimate(const PosteriorTrace& trace, std::size_t p,
                                   std::size_t p_star);

}  // namespace qtraj

#endif
