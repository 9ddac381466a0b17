#ifndef QTRAJ_MODEL_REGISTRY_HPP
#define QTRAJ_MODEL_REGISTRY_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/kraus_model.hpp"

namespace qtraj {

/// Named parametric model family with an inclusive per-component domain.
struct ModelRegistryEntry {
  std::string name;
  std::size_t param_dim = 0;
  std::vector<std::pair<double, double>> domain;
  KrausModel (*build)(std::span<const double>) = nullptr;

  /// Domain-checked, completeness-validated construction.
  KrausModel make(std::span<const double> params) const;
};

/// Look up a registry entry by name; throws ValidationError when unknown.
const ModelRegistryEntry& registry_entry(const std::string& name);

std::vector<std::string> registry_names();

}  // namespace qtraj

#endif
