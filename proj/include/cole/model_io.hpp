// Copyright 2026 The COLE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Versioned JSON record of a trained surrogate: config, flat weight arrays,
// and the attached PCA model.

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cole/error.hpp"
#include "cole/surrogate.hpp"

namespace cole::numerics {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  std::vector<double> flat(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) throw InputError("model file: matrix size mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
  }
  return m;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto flat = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

}  // namespace detail

inline nlohmann::json model_to_json(const SurrogateModel& m) {
  nlohmann::json j;
  j["format"] = "cole-surrogate";
  j["version"] = kModelFormatVersion;
  j["config"] = {{"input_dim", m.config.input_dim},       {"hidden_width", m.config.hidden_width},
                 {"hidden_layers", m.config.hidden_layers}, {"leaky_slope", m.config.leaky_slope},
                 {"dropout_p", m.config.dropout_p},         {"output_dim", m.config.output_dim}};
  j["seed"] = m.seed;
  j["final_loss"] = m.final_loss;
  j["layers"] = nlohmann::json::array();
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    j["layers"].push_back({{"weight", detail::matrix_json(m.weights[l])},
                           {"bias", detail::vector_json(m.biases[l])}});
  }
  if (m.pca) {
    j["pca"] = {{"k_requested", m.pca->k_requested},
                {"mean", detail::vector_json(m.pca->mean)},
                {"components", detail::matrix_json(m.pca->components)},
                {"explained_variance", detail::vector_json(m.pca->explained_variance)}};
  } else {
    j["pca"] = nullptr;
  }
  return j;
}

inline SurrogateModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "cole-surrogate") throw InputError("not a surrogate model file");
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw InputError("unsupported model version " + j.at("version").dump());
    }
    SurrogateModel m;
    const auto& c = j.at("config");
    m.config.input_dim = c.at("input_dim");
    m.config.hidden_width = c.at("hidden_width");
    m.config.hidden_layers = c.at("hidden_layers");
    m.config.leaky_slope = c.at("leaky_slope");
    m.config.dropout_p = c.at("dropout_p");
    m.config.output_dim = c.at("output_dim");
    m.config.validate();
    m.seed = j.at("seed");
    m.final_loss = j.at("final_loss");
    for (const auto& layer : j.at("layers")) {
      m.weights.push_back(detail::matrix_from_json(layer.at("weight")));
      m.biases.push_back(detail::vector_from_json(layer.at("bias")));
    }
    if (m.weights.size() != m.config.hidden_layers + 1) throw InputError("model file: wrong layer count");
    if (!j.at("pca").is_null()) {
      const auto& p = j.at("pca");
      PcaModel pca;
      pca.k_requested = p.at("k_requested");
      pca.mean = detail::vector_from_json(p.at("mean"));
      pca.components = detail::matrix_from_json(p.at("components"));
      pca.explained_variance = detail::vector_from_json(p.at("explained_variance"));
      m.pca = std::move(pca);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("model file: ") + e.what());
  }
}

inline void save_model(const SurrogateModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write model file '" + path + "'");
  out << model_to_json(m).dump() << '\n';
}

inline SurrogateModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read model file '" + path + "'");
  try {
    return model_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("model file '" + path + "': " + e.what());
  }
}

}  // namespace cole::numerics
