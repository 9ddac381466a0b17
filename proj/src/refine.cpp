#include "qtraj/refine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qtraj/channel_analysis.hpp"
#include "qtraj/discrimination.hpp"
#include "qtraj/errors.hpp"

namespace qtraj {

std::pair<double, double> initial_pair(double u, double v) {
  return {u + (v - u) / 3.0, u + 2.0 * (v - u) / 3.0};
}

std::pair<double, double> next_pair(double a, double b, double s) {
  const double third = (b - a) / 3.0;
  return {s - third, s + third};
}

namespace {

std::string fmt_value(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

RefinementTrace refine(const TrajectoryRecord& record, const ModelRegistryEntry& entry,
                       const RefineConfig& config) {
  if (!(config.lower < config.upper)) throw ValidationError("refine interval needs u < v");
  if (!(config.epsilon > 0.0 && config.epsilon < 0.5)) {
    throw ValidationError("threshold epsilon must lie in (0, 1/2)");
  }
  if (config.max_rounds < 1) throw ValidationError("refine needs max_rounds >= 1");
  const double delta =
      config.delta > 0.0 ? config.delta : (config.upper - config.lower) * 1e-3;

  RefinementTrace trace;
  const double midpoint = 0.5 * (config.lower + config.upper);

  if (record.outcomes.empty()) {
    trace.estimate = midpoint;
    trace.terminated_reason = "no_data";
    return trace;
  }

  auto [a, b] = initial_pair(config.lower, config.upper);
  double raw_a = a, raw_b = b;
  bool have_selection = false;
  double last_selected = midpoint;

  while (true) {
    if (trace.rounds.size() >= config.max_rounds) {
      trace.terminated_reason = "max_rounds";
      break;
    }
    if (a == b) {
      trace.terminated_reason = "degenerate_pair";
      have_selection = true;
      last_selected = a;
      break;
    }
    if (b - a < delta) {
      trace.terminated_reason = "resolution_floor";
      break;
    }

    KrausModel model_a = entry.make(std::span<const double>(&a, 1));
    KrausModel model_b = entry.make(std::span<const double>(&b, 1));
    bool faithful = true;
    auto inspect = [&](const KrausModel& model, double value) {
      const ChannelDecomposition dec = decompose(model);
      if (!dec.faithful) {
        trace.warnings.push_back("channel at parameter " + fmt_value(value) +
                                 " is not faithful; round aborted");
        faithful = false;
      } else if (dec.count() > 1) {
        trace.warnings.push_back("channel at parameter " + fmt_value(value) + " has " +
                                 std::to_string(dec.count()) +
                                 " minimal subspaces; selection may depend on the reached one");
      }
    };
    inspect(model_a, a);
    inspect(model_b, b);
    if (!faithful) {
      trace.terminated_reason = "non_faithful";
      break;
    }

    CandidateSet pair_set({{fmt_value(a), a, std::move(model_a)},
                           {fmt_value(b), b, std::move(model_b)}},
                          CandidateSet::uniform_prior(2));
    const SelectionResult round_result = run_discrimination(
        pair_set, DensityMatrix::mixed(pair_set.dim()), record, config.epsilon,
        record.size());

    RefineRound round;
    round.a = a;
    round.b = b;
    round.raw_a = raw_a;
    round.raw_b = raw_b;
    round.steps_used = round_result.steps_consumed;
    round.pi_a = round_result.final_posteriors[0];
    round.pi_b = round_result.final_posteriors[1];
    round.selected = round_result.selected ? static_cast<int>(*round_result.selected) : -1;
    trace.rounds.push_back(round);

    if (!round_result.selected) {
      trace.terminated_reason = "no_crossing";
      trace.ambiguous = std::abs(round.pi_a - round.pi_b) <= config.epsilon;
      break;
    }

    const double s = *round_result.selected == 0 ? a : b;
    have_selection = true;
    last_selected = s;

    std::tie(raw_a, raw_b) = next_pair(a, b, s);
    a = std::clamp(raw_a, config.lower, config.upper);
    b = std::clamp(raw_b, config.lower, config.upper);
  }

  trace.estimate = have_selection ? last_selected : midpoint;
  if (!have_selection && trace.terminated_reason != "no_data") {
    trace.warnings.push_back("no round ever crossed the threshold; estimate is the midpoint");
  }
  return trace;
}

}  // namespace qtraj
