// Copyright 2026 The irscreen Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "irscreen/autoencoder.hpp"

namespace irscreen {

nlohmann::json to_json(const MaeTrainConfig& c) {
  return {{"epochs", c.epochs},
          {"lambda_sl", c.lambda_sl},
          {"mask_prob", c.mask_prob},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"epsilon", c.epsilon},
          {"lr", c.lr},
          {"lr_decay_gamma", c.lr_decay_gamma},
          {"plateau_patience", c.plateau_patience},
          {"warmup_epochs", c.warmup_epochs},
          {"plateau_tolerance", c.plateau_tolerance},
          {"batch_size", c.batch_size},
          {"seed", c.seed}};
}

MaeTrainConfig mae_config_from_json(const nlohmann::json& j, MaeTrainConfig c) {
  require(j.is_object(), ErrorKind::Config, "autoencoder settings must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "epochs") c.epochs = v.get<int>();
    else if (key == "lambda_sl") c.lambda_sl = v.get<double>();
    else if (key == "mask_prob") c.mask_prob = v.get<double>();
    else if (key == "beta1") c.beta1 = v.get<double>();
    else if (key == "beta2") c.beta2 = v.get<double>();
    else if (key == "epsilon") c.epsilon = v.get<double>();
    else if (key == "lr") c.lr = v.get<double>();
    else if (key == "lr_decay_gamma") c.lr_decay_gamma = v.get<double>();
    else if (key == "plateau_patience") c.plateau_patience = v.get<int>();
    else if (key == "warmup_epochs") c.warmup_epochs = v.get<int>();
    else if (key == "plateau_tolerance") c.plateau_tolerance = v.get<double>();
    else if (key == "batch_size") c.batch_size = v.get<int>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else fail(ErrorKind::Config, "unknown autoencoder setting '" + key + "'");
  }
  c.validate();
  return c;
}

nlohmann::json to_json(const Autoencoder<double>& ae) {
  nlohmann::json j;
  j["format"] = "irscreen.model";
  j["version"] = 1;
  j["kind"] = "autoencoder";
  j["spec"] = {{"input_dim", ae.spec.input_dim},
               {"hidden", ae.spec.hidden},
               {"latent_dim", ae.spec.latent_dim},
               {"seed", ae.spec.seed},
               {"init", "glorot_uniform"}};
  auto& layers = j["layers"] = nlohmann::json::array();
  for (const auto& l : ae.layers) {
    nlohmann::json jl;
    jl["rows"] = l.weight.rows();
    jl["cols"] = l.weight.cols();
    // Row-major flattening.
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weight.size()));
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    jl["weight"] = std::move(w);
    jl["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
    layers.push_back(std::move(jl));
  }
  return j;
}

Autoencoder<double> autoencoder_from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "irscreen.model" && j.value("kind", "") == "autoencoder",
          ErrorKind::Parse, "not a serialized autoencoder");
  require(j.value("version", 0) == 1, ErrorKind::Parse, "unsupported model version");
  Autoencoder<double> ae;
  const auto& s = j.at("spec");
  ae.spec.input_dim = s.at("input_dim").get<int>();
  ae.spec.hidden = s.at("hidden").get<std::vector<int>>();
  ae.spec.latent_dim = s.at("latent_dim").get<int>();
  ae.spec.seed = s.at("seed").get<std::uint64_t>();
  ae.spec.validate();
  for (const auto& jl : j.at("layers")) {
    DenseLayer<double> l;
    const auto rows = jl.at("rows").get<Eigen::Index>();
    const auto cols = jl.at("cols").get<Eigen::Index>();
    const auto w = jl.at("weight").get<std::vector<double>>();
    const auto b = jl.at("bias").get<std::vector<double>>();
    require(static_cast<Eigen::Index>(w.size()) == rows * cols &&
                static_cast<Eigen::Index>(b.size()) == rows,
            ErrorKind::Parse, "autoencoder layer shape mismatch");
    l.weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    }
    l.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), rows);
    ae.layers.push_back(std::move(l));
  }
  require(ae.layers.size() == 2 * (ae.spec.hidden.size() + 1), ErrorKind::Parse,
          "autoencoder layer count does not match its spec");
  return ae;
}

}  // namespace irscreen
