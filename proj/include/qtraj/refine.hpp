#ifndef QTRAJ_REFINE_HPP
#define QTRAJ_REFINE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/model_registry.hpp"
#include "qtraj/trajectory.hpp"

namespace qtraj {

struct RefineConfig {
  double lower = 0.0;
  double upper = 3.0;
  double epsilon = 0.01;
  double delta = 0.0;  // resolution floor; <= 0 selects (upper - lower) * 1e-3
  std::uint64_t max_rounds = 64;
};

/// First tested pair: interior thirds of [u, v].
std::pair<double, double> initial_pair(double u, double v);

/// Pair around the selected value s: (s - (b-a)/3, s + (b-a)/3); the width
/// contracts by 2/3 per round.
std::pair<double, double> next_pair(double a, double b, double s);

struct RefineRound {
  double a = 0.0;       // tested pair (after clipping into [u, v])
  double b = 0.0;
  double raw_a = 0.0;   // pair produced by the update rule, before clipping
  double raw_b = 0.0;
  int selected = -1;    // 0 -> a, 1 -> b, -1 -> none
  std::uint64_t steps_used = 0;
  double pi_a = 0.0;    // final posteriors for the round
  double pi_b = 0.0;
};

struct RefinementTrace {
  std::vector<RefineRound> rounds;
  double estimate = 0.0;
  std::string terminated_reason;  // no_data | no_crossing | resolution_floor |
                                  // max_rounds | degenerate_pair | non_faithful
  bool ambiguous = false;         // no crossing and final posteriors within epsilon
  std::vector<std::string> warnings;
};

/// Interval-refinement estimation over a fixed record: each round replays the
/// record from its beginning through a fresh two-candidate filter at the pair
/// (a, b), then contracts the pair around the selected value.
RefinementTrace refine(const TrajectoryRecord& record, const ModelRegistryEntry& entry,
                       const RefineConfig& config);

}  // namespace qtraj

#endif
