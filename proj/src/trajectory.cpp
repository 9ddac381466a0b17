#include "qtraj/trajectory.hpp"

#include <cstdio>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
  out += ',';
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::string model_fingerprint(const KrausModel& model) {
  std::string canon;
  canon += "d=" + std::to_string(model.dim()) + ";";
  for (const auto& label : model.outcome_labels()) {
    canon += label;
    canon += '|';
  }
  canon += ';';
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    for (const auto& v : model.operators(y)) {
      for (Index r = 0; r < v.rows(); ++r) {
        for (Index c = 0; c < v.cols(); ++c) {
          append_double(canon, v(r, c).real());
          append_double(canon, v(r, c).imag());
        }
      }
      canon += '/';
    }
    canon += ';';
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return std::string(hex);
}

TrajectorySimulator::TrajectorySimulator(KrausModel model, const DensityMatrix& initial,
                                         std::uint64_t seed)
    : model_(std::move(model)), state_(initial.matrix()), rng_(seed) {
  if (initial.dim() != model_.dim()) {
    throw ValidationError("initial state dimension does not match the model");
  }
}

TrajectorySimulator::Step TrajectorySimulator::step() {
  const std::size_t y = sample_outcome(model_, state_, rng_.uniform01());
  const KrausStep update = kraus_step(model_, y, state_);
  if (update.probability <= kProbabilityFloor) {
    std::ostringstream os;
    os << "sampled outcome " << model_.outcome_labels()[y] << " has vanishing probability "
       << update.probability;
    throw NumericalError(os.str());
  }
  state_ = update.state;
  ++step_index_;
  return {y, update.probability};
}

TrajectoryRecord run_trajectory(const KrausModel& model, const DensityMatrix& initial,
                                std::uint64_t n_steps, std::uint64_t seed, bool record_states) {
  TrajectorySimulator sim(model, initial, seed);
  TrajectoryRecord record;
  record.model_hash = model_fingerprint(model);
  record.seed = seed;
  record.dim = model.dim();
  record.initial_state = initial.matrix();
  record.outcomes.reserve(n_steps);
  if (record_states) record.states.reserve(n_steps);
  for (std::uint64_t k = 0; k < n_steps; ++k) {
    const auto step = sim.step();
    record.outcomes.push_back(model.outcome_labels()[step.outcome]);
    if (record_states) record.states.push_back(sim.state_raw());
  }
  return record;
}

EstimationFilter::EstimationFilter(KrausModel model, const DensityMatrix& initial)
    : model_(std::move(model)), estimate_(initial.matrix()) {
  if (initial.dim() != model_.dim()) {
    throw ValidationError("initial estimate dimension does not match the model");
  }
}

DensityMatrix EstimationFilter::step(std::size_t outcome) {
  if (outcome >= model_.n_outcomes()) throw ValidationError("outcome index out of range");
  const KrausStep update = kraus_step(model_, outcome, estimate_);
  if (update.probability <= kProbabilityFloor) {
    std::ostringstream os;
    os << "filter divergence: outcome '" << model_.outcome_labels()[outcome]
       << "' has probability " << update.probability
       << " under the estimate (kernel condition violated)";
    throw NumericalError(os.str());
  }
  estimate_ = update.state;
  ++step_index_;
  return DensityMatrix::make(estimate_);
}

}  // namespace qtraj
