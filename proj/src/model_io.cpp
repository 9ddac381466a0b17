#include "qtraj/model_io.hpp"

#include <json.hpp>

#include "qtraj/errors.hpp"
#include "qtraj/io_util.hpp"
#include "qtraj/model_registry.hpp"

namespace qtraj {

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& rows, Index d, const std::string& context) {
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(d)) {
    throw IoError("matrix in " + context + " must have " + std::to_string(d) + " rows");
  }
  Matrix m(d, d);
  for (Index r = 0; r < d; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(d)) {
      throw IoError("matrix row in " + context + " must have " + std::to_string(d) + " entries");
    }
    for (Index c = 0; c < d; ++c) {
      const json& entry = row[static_cast<std::size_t>(c)];
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
          !entry[1].is_number()) {
        throw IoError("matrix entry in " + context + " must be a [re, im] pair");
      }
      m(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

KrausModel parse_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("model document must be a JSON object");

  if (doc.contains("registry")) {
    if (!doc["registry"].is_string() || !doc.contains("param") || !doc["param"].is_array()) {
      throw IoError("registry model needs string 'registry' and array 'param'");
    }
    std::vector<double> params;
    for (const auto& p : doc["param"]) {
      if (!p.is_number()) throw IoError("'param' entries must be numbers");
      params.push_back(p.get<double>());
    }
    return registry_entry(doc["registry"].get<std::string>()).make(params);
  }

  if (!doc.contains("dim") || !doc["dim"].is_number_integer()) {
    throw IoError("fixed model needs integer 'dim'");
  }
  const Index d = doc["dim"].get<Index>();
  if (!doc.contains("outcomes") || !doc["outcomes"].is_array()) {
    throw IoError("fixed model needs array 'outcomes'");
  }
  std::vector<std::string> labels;
  for (const auto& l : doc["outcomes"]) {
    if (!l.is_string()) throw IoError("'outcomes' entries must be strings");
    labels.push_back(l.get<std::string>());
  }
  if (!doc.contains("kraus") || !doc["kraus"].is_object()) {
    throw IoError("fixed model needs object 'kraus'");
  }
  std::vector<std::vector<Matrix>> ops;
  ops.reserve(labels.size());
  for (const auto& label : labels) {
    if (!doc["kraus"].contains(label)) {
      throw IoError("'kraus' is missing outcome '" + label + "'");
    }
    const json& list = doc["kraus"][label];
    if (!list.is_array() || list.empty()) {
      throw IoError("'kraus[" + label + "]' must be a non-empty array of matrices");
    }
    std::vector<Matrix> family;
    for (const auto& mat : list) {
      family.push_back(parse_matrix(mat, d, "kraus[" + label + "]"));
    }
    ops.push_back(std::move(family));
  }
  return KrausModel::make_validated(d, std::move(labels), std::move(ops));
}

KrausModel load_model(const std::filesystem::path& path) {
  return parse_model_json(read_file(path));
}

std::string model_to_json(const KrausModel& model) {
  json doc;
  doc["dim"] = model.dim();
  doc["outcomes"] = model.outcome_labels();
  json kraus = json::object();
  for (std::size_t y = 0; y < model.n_outcomes(); ++y) {
    json family = json::array();
    for (const auto& v : model.operators(y)) {
      family.push_back(matrix_to_json(v));
    }
    kraus[model.outcome_labels()[y]] = std::move(family);
  }
  doc["kraus"] = std::move(kraus);
  return doc.dump(2) + "\n";
}

void save_model(const KrausModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model));
}

}  // namespace qtraj
