#include "qtraj/discrimination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> softmax_from_logs(const std::vector<double>& logs) {
  double best = -kInf;
  for (const double l : logs) best = std::max(best, l);
  std::vector<double> out(logs.size(), 0.0);
  if (best == -kInf) return out;
  double total = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    out[i] = std::exp(logs[i] - best);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

}  // namespace

CandidateSet::CandidateSet(std::vector<Candidate> candidates, std::vector<double> prior)
    : candidates_(std::move(candidates)), prior_(std::move(prior)) {
  if (candidates_.empty()) throw ValidationError("candidate set must be non-empty");
  if (prior_.size() != candidates_.size()) {
    throw ValidationError("prior size does not match candidate count");
  }
  const Index d = candidates_.front().model.dim();
  const auto& labels = candidates_.front().model.outcome_labels();
  for (const auto& c : candidates_) {
    if (c.model.dim() != d) throw ValidationError("candidate models must share dimension");
    if (c.model.outcome_labels() != labels) {
      throw ValidationError("candidate models must share the outcome alphabet");
    }
  }
  double sum = 0.0;
  for (const double p : prior_) {
    if (!(p > 0.0)) throw ValidationError("prior weights must be strictly positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "prior sums to " << sum << ", expected 1";
    throw ValidationError(os.str());
  }
}

std::vector<double> CandidateSet::uniform_prior(std::size_t r) {
  if (r == 0) throw ValidationError("uniform prior needs at least one candidate");
  return std::vector<double>(r, 1.0 / static_cast<double>(r));
}

HypothesisFilter::HypothesisFilter(const CandidateSet& candidates, const DensityMatrix& initial)
    : set_(&candidates) {
  if (initial.dim() != candidates.dim()) {
    throw ValidationError("initial estimate dimension does not match candidate models");
  }
  if (initial.min_eigenvalue() <= 1e-12) {
    throw ValidationError("hypothesis filter requires a full-rank initial state");
  }
  log_weight_.assign(candidates.size(), 0.0);
  states_.assign(candidates.size(), initial.matrix());
}

std::vector<double> HypothesisFilter::update(std::size_t outcome) {
  bool any_live = false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (log_weight_[i] == -kInf) continue;
    const KrausStep step = kraus_step(set_->candidate(i).model, outcome, states_[i]);
    if (step.probability > kProbabilityFloor) {
      states_[i] = step.state;
      log_weight_[i] += std::log(step.probability);
      any_live = true;
    } else {
      log_weight_[i] = -kInf;  // frozen; state held for inspection
    }
  }
  if (!any_live) {
    throw NumericalError("all hypotheses assign zero probability to the record");
  }
  ++step_index_;
  return posteriors();
}

std::vector<double> HypothesisFilter::log_scores() const {
  std::vector<double> scores(size());
  for (std::size_t i = 0; i < size(); ++i) {
    scores[i] = log_weight_[i] == -kInf ? -kInf : std::log(set_->prior()[i]) + log_weight_[i];
  }
  return scores;
}

std::vector<double> HypothesisFilter::posteriors() const {
  return softmax_from_logs(log_scores());
}

bool HypothesisFilter::frozen(std::size_t i) const { return log_weight_.at(i) == -kInf; }

DensityMatrix HypothesisFilter::conditional_state(std::size_t i) const {
  return DensityMatrix::make(states_.at(i));
}

DensityMatrix HypothesisFilter::block_state() const {
  const Index d = set_->dim();
  const auto pi = posteriors();
  Matrix block = Matrix::Zero(d * static_cast<Index>(size()), d * static_cast<Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    block.block(static_cast<Index>(i) * d, static_cast<Index>(i) * d, d, d) =
        pi[i] * states_[i];
  }
  return DensityMatrix::make(block);
}

SelectionResult run_discrimination(const CandidateSet& candidates, const DensityMatrix& initial,
                                   const TrajectoryRecord& record, double epsilon,
                                   std::uint64_t max_steps) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw ValidationError("threshold epsilon must lie in (0, 1/2)");
  }
  const KrausModel& first = candidates.candidate(0).model;

  HypothesisFilter filter(candidates, initial);
  SelectionResult result;
  result.trace.log_scores.push_back(filter.log_scores());
  result.final_posteriors = filter.posteriors();

  const std::uint64_t limit = std::min<std::uint64_t>(record.size(), max_steps);
  for (std::uint64_t k = 0; k < limit; ++k) {
    const std::size_t y = first.outcome_index(record.outcomes[k]);
    const auto pi = filter.update(y);
    result.trace.log_scores.push_back(filter.log_scores());
    result.final_posteriors = pi;
    result.steps_consumed = k + 1;
    const auto it = std::max_element(pi.begin(), pi.end());
    if (*it > 1.0 - epsilon) {
      result.selected = static_cast<std::size_t>(it - pi.begin());
      result.crossing_step = k + 1;
      break;
    }
  }
  return result;
}

LyapunovEstimate lyapunov_estimate(const PosteriorTrace& trace, std::size_t p,
                                   std::size_t p_star) {
  const std::size_t steps = trace.steps();
  if (steps < 100) {
    throw ValidationError("lyapunov estimate needs a trace of at least 100 steps");
  }
  const std::size_t begin = steps / 2;  // last half: steps begin..steps

  LyapunovEstimate out;
  std::vector<double> ratio;
  ratio.reserve(steps - begin + 1);
  for (std::size_t k = begin; k <= steps; ++k) {
    const double lp = trace.log_scores[k].at(p);
    const double ls = trace.log_scores[k].at(p_star);
    if (lp == -kInf) {
      out.frozen = true;
      out.slope = -kInf;
      return out;
    }
    if (ls == -kInf) {
      out.frozen = true;
      out.slope = kInf;
      return out;
    }
    ratio.push_back(lp - ls);
  }

  const std::size_t n = ratio.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += static_cast<double>(begin + i);
    mean_y += ratio[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(begin + i) - mean_x;
    sxx += dx * dx;
    sxy += dx * (ratio[i] - mean_y);
  }
  out.slope = sxy / sxx;

  // Innovation-based error: sd of one-step increments over sqrt(count).
  double inc_mean = 0.0;
  for (std::size_t i = 1; i < n; ++i) inc_mean += ratio[i] - ratio[i - 1];
  inc_mean /= static_cast<double>(n - 1);
  double inc_var = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double d = ratio[i] - ratio[i - 1] - inc_mean;
    inc_var += d * d;
  }
  inc_var = n > 2 ? inc_var / static_cast<double>(n - 2) : 0.0;
  out.std_error = std::sqrt(inc_var / static_cast<double>(n - 1));
  return out;
}

}  // namespace qtraj
