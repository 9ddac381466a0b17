#include "qtraj/model_registry.hpp"

#include <cmath>
#include <sstream>

#include "qtraj/errors.hpp"

namespace qtraj {

namespace {

// Two-outcome qubit family on [0, 3]:
//   V0 = [[sqrt(p/3), 0], [0, 1/2]],  V1 = [[0, sqrt(3)/2], [sqrt((3-p)/3), 0]].
KrausModel build_two_outcome_qubit(std::span<const double> params) {
  const double p = params[0];
  Matrix v0 = Matrix::Zero(2, 2);
  v0(0, 0) = std::sqrt(p / 3.0);
  v0(1, 1) = 0.5;
  Matrix v1 = Matrix::Zero(2, 2);
  v1(0, 1) = std::sqrt(3.0) / 2.0;
  v1(1, 0) = std::sqrt((3.0 - p) / 3.0);
  ModelParam param{"paper-example-5.2", {p}};
  return KrausModel(2, {"0", "1"}, {{v0}, {v1}}, param);
}

const ModelRegistryEntry kEntries[] = {
    {"paper-example-5.2", 1, {{0.0, 3.0}}, &build_two_outcome_qubit},
};

}  // namespace

KrausModel ModelRegistryEntry::make(std::span<const double> params) const {
  if (params.size() != param_dim) {
    std::ostringstream os;
    os << "registry '" << name << "' expects " << param_dim << " parameter(s), got "
       << params.size();
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!(params[i] >= domain[i].first && params[i] <= domain[i].second)) {
      std::ostringstream os;
      os << "parameter " << params[i] << " outside domain [" << domain[i].first << ", "
         << domain[i].second << "] of registry '" << name << "'";
      throw ValidationError(os.str());
    }
  }
  KrausModel model = build(params);
  const auto report = validate_model(model);
  if (!report.pass) {
    std::ostringstream os;
    os << "registry '" << name << "' produced an incomplete model (residual " << report.residual
       << ")";
    throw ValidationError(os.str());
  }
  return model;
}

const ModelRegistryEntry& registry_entry(const std::string& name) {
  for (const auto& entry : kEntries) {
    if (entry.name == name) return entry;
  }
  throw ValidationError("unknown model registry '" + name + "'");
}

std::vector<std::string> registry_names() {
  std::vector<std::string> names;
  for (const auto& entry : kEntries) names.push_back(entry.name);
  return names;
}

}  // namespace qtraj
