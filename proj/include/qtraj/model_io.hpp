#ifndef QTRAJ_MODEL_IO_HPP
#define QTRAJ_MODEL_IO_HPP

#include <filesystem>
#include <string>

#include "qtraj/kraus_model.hpp"

namespace qtraj {

/// Load a model from JSON. Two document shapes:
///   fixed:     { "dim": d, "outcomes": [...],
///                "kraus": { "<label>": [ matrix per mu ] } }
///   registry:  { "registry": "<name>", "param": [ ... ] }
/// Matrices are nested arrays of [re, im] pairs, row by row. The loaded
/// model is completeness-validated.
KrausModel load_model(const std::filesystem::path& path);

KrausModel parse_model_json(const std::string& text);

/// Serialize in the fixed shape (numbers round-trip exactly).
std::string model_to_json(const KrausModel& model);

void save_model(const KrausModel& model, const std::filesystem::path& path);

}  // namespace qtraj

#endif
