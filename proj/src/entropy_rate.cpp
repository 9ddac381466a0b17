#include <cmath>
#include <limits>
#include <vector>

#include "qtraj/channel_analysis.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

struct ExhaustiveAccum {
  double divergence = 0.0;  // sum_w P(w) log(P(w)/Q(w))
  std::int64_t words = 0;
  bool infinite = false;
};

// Unnormalized simultaneous evolution under both models; the P-branch prunes
// exact-zero subtrees since all extensions of a null word stay null.
void enumerate(const KrausModel& mp, const KrausModel& mq, const Matrix& p_mat,
               const Matrix& q_mat, int remaining, ExhaustiveAccum& acc) {
  if (remaining == 0) {
    acc.words += 1;
    const double p = p_mat.trace().real();
    if (p <= 0.0) return;
    const double q = q_mat.trace().real();
    if (q <= 0.0) {
      acc.infinite = true;
      return;
    }
    acc.divergence += p * std::log(p / q);
    return;
  }
  for (std::size_t y = 0; y < mp.n_outcomes(); ++y) {
    Matrix np = apply_kraus(mp, y, p_mat);
    if (np.trace().real() <= 0.0) {
      acc.words += static_cast<std::int64_t>(
          std::llround(std::pow(static_cast<double>(mp.n_outcomes()), remaining - 1)));
      continue;
    }
    Matrix nq = apply_kraus(mq, y, q_mat);
    enumerate(mp, mq, np, nq, remaining - 1, acc);
  }
}

}  // namespace

EntropyRateEstimate entropy_rate(const KrausModel& model_p, const DensityMatrix& state_p,
                                 const KrausModel& model_q, const DensityMatrix& state_q,
                                 int n, std::int64_t samples, std::uint64_t seed) {
  if (n < 1) throw ValidationError("entropy rate needs word length n >= 1");
  if (samples < 1) throw ValidationError("entropy rate needs sample count >= 1");
  if (model_p.outcome_labels() != model_q.outcome_labels()) {
    throw ValidationError("entropy rate requires a shared outcome alphabet");
  }
  if (state_p.dim() != model_p.dim() || state_q.dim() != model_q.dim()) {
    throw ValidationError("state dimension does not match its model");
  }

  EntropyRateEstimate out;
  out.word_length = n;

  const double word_count = std::pow(static_cast<double>(model_p.n_outcomes()), n);
  if (word_count <= static_cast<double>(kExhaustiveWordBudget)) {
    ExhaustiveAccum acc;
    enumerate(model_p, model_q, state_p.matrix(), state_q.matrix(), n, acc);
    out.exhaustive = true;
    out.sample_count = acc.words;
    out.infinite = acc.infinite;
    out.estimate = acc.infinite ? std::numeric_limits<double>::infinity() : acc.divergence / n;
    out.standard_error = 0.0;
    return out;
  }

  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t s = 0; s < samples; ++s) {
    Matrix p_state = state_p.matrix();
    Matrix q_state = state_q.matrix();
    double log_p = 0.0;
    double log_q = 0.0;
    bool q_null = false;
    for (int k = 0; k < n; ++k) {
      const std::size_t y = sample_outcome(model_p, p_state, rng.uniform01());
      const KrausStep sp = kraus_step(model_p, y, p_state);
      log_p += std::log(sp.probability);
      p_state = sp.state;
      const KrausStep sq = kraus_step(model_q, y, q_state);
      if (sq.probability <= kProbabilityFloor) {
        q_null = true;
        break;
      }
      log_q += std::log(sq.probability);
      q_state = sq.state;
    }
    if (q_null) {
      out.infinite = true;
      out.sample_count = s + 1;
      out.estimate = std::numeric_limits<double>::infinity();
      out.standard_error = 0.0;
      return out;
    }
    stats.push_back((log_p - log_q) / n);
  }

  double mean = 0.0;
  for (const double x : stats) mean += x;
  mean /= static_cast<double>(stats.size());
  double var = 0.0;
  for (const double x : stats) var += (x - mean) * (x - mean);
  var = stats.size() > 1 ? var / static_cast<double>(stats.size() - 1) : 0.0;

  out.sample_count = samples;
  out.estimate = mean;
  out.standard_error = std::sqrt(var / static_cast<double>(stats.size()));
  return out;
}

}  // namespace qtraj
