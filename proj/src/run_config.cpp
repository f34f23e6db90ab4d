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

#include "irscreen/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "irscreen/error.hpp"

namespace irscreen {
namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

QcConfig qc_from_json(const json& j, QcConfig c) {
  require(j.is_object(), ErrorKind::Config, "'qc' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "min_wearable_days") c.min_wearable_days = v.get<int>();
    else if (key == "window_days") c.window_days = v.get<int>();
    else if (key == "bmi_min") c.bmi_min = v.get<double>();
    else if (key == "bmi_max") c.bmi_max = v.get<double>();
    else if (key == "homa_cutoff") c.homa_cutoff = v.get<double>();
    else if (key != "enabled") fail(ErrorKind::Config, "unknown qc key '" + key + "'");
  }
  return c;
}

FunctionalSpec functional_from_json(const json& j, FunctionalSpec s) {
  require(j.is_object(), ErrorKind::Config, "'functional' must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "scale") s.scale = v.get<double>();
    else if (key == "coefficients") s.coefficients = v.get<std::map<std::string, double>>();
    else if (key == "noise_sigma") s.noise_sigma = v.get<double>();
    else if (key == "study_days") s.study_days = v.get<int>();
    else if (key == "daily_jitter") s.daily_jitter = v.get<double>();
    else if (key == "missing_day_prob") s.missing_day_prob = v.get<double>();
    else if (key == "start_date") s.start_date = v.get<std::string>();
    else if (key == "constant_wearables") s.constant_wearables = v.get<bool>();
    else fail(ErrorKind::Config, "unknown functional key '" + key + "'");
  }
  return s;
}

SynthConfig synth_from_json(const json& j) {
  require(j.is_object(), ErrorKind::Config, "'synth' must be an object");
  SynthConfig s;
  for (const auto& [key, v] : j.items()) {
    if (key == "n") s.n = v.get<int>();
    else if (key == "seed") s.seed = v.get<std::uint64_t>();
    else if (key == "kind") {
      const auto kind = v.get<std::string>();
      require(kind == "calibrated" || kind == "functional", ErrorKind::Config,
              "synth kind must be 'calibrated' or 'functional'");
      s.functional = kind == "functional";
    } else if (key == "calibration") s.calibration = calibration_from_json(v, s.calibration);
    else if (key == "functional") s.functional_spec = functional_from_json(v, s.functional_spec);
    else fail(ErrorKind::Config, "unknown synth key '" + key + "'");
  }
  return s;
}

// Spec-level keys shared by every experiment; parsed through the experiment
// reader with a placeholder feature set.
ExperimentSpec defaults_from(const json& shared) {
  json j = shared;
  j["feature_set"] = "Demographics";
  ExperimentSpec s = experiment_spec_from_json(j);
  s.feature_set = FeatureSetSpec{};
  return s;
}

std::vector<ExperimentSpec> expand_grid(const json& g, const ExperimentSpec& defaults) {
  require(g.is_object(), ErrorKind::Config, "'grid' must be an object");
  std::vector<json> feature_sets;
  std::vector<int> windows = {defaults.window_days};
  std::vector<std::string> models = {std::string(to_string(defaults.model))};
  std::vector<std::string> cvs = {std::string(to_string(defaults.cv))};
  for (const auto& [key, v] : g.items()) {
    if (key == "feature_sets") feature_sets = v.get<std::vector<json>>();
    else if (key == "windows") windows = v.get<std::vector<int>>();
    else if (key == "models") models = v.get<std::vector<std::string>>();
    else if (key == "cv") cvs = v.get<std::vector<std::string>>();
    else fail(ErrorKind::Config, "unknown grid key '" + key + "'");
  }
  require(!feature_sets.empty(), ErrorKind::Config, "grid needs at least one feature set");
  std::vector<ExperimentSpec> out;
  for (const auto& fs : feature_sets) {
    for (int w : windows) {
      for (const auto& m : models) {
        for (const auto& cv : cvs) {
          // Leave-one-out is only defined for the direct boosters.
          if (cv == "loocv" && uses_autoencoder(parse_model_kind(m))) continue;
          out.push_back(experiment_spec_from_json({{"feature_set", fs}, {"window_days", w}, {"model", m}, {"cv", cv}},
                                                  defaults));
        }
      }
    }
  }
  return out;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  require(j.is_object(), ErrorKind::Config, "config must be a JSON object");
  RunConfig c;
  try {
    json shared = json::object();
    for (const char* key : {"seeds", "thresholds"}) {
      if (j.contains(key)) shared[key] = j.at(key);
    }
    if (const auto h = j.find("hyperparameters"); h != j.end()) {
      require(h->is_object(), ErrorKind::Config, "'hyperparameters' must be an object");
      for (const auto& [key, v] : h->items()) {
        require(key == "tree_params" || key == "linear_params" || key == "autoencoder" || key == "latent_dim" ||
                    key == "tune" || key == "stratified_folds",
                ErrorKind::Config, "unknown hyperparameters key '" + key + "'");
        shared[key] = v;
      }
    }
    const ExperimentSpec defaults = defaults_from(shared);

    for (const auto& [key, v] : j.items()) {
      if (key == "data_dir") c.data_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "output_dir") c.output_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "qc") {
        c.qc = qc_from_json(v, c.qc);
        if (v.contains("enabled")) c.apply_qc = v.at("enabled").get<bool>();
      } else if (key == "workers") c.workers = v.get<int>();
      else if (key == "robustness") {
        require(v.is_object(), ErrorKind::Config, "'robustness' must be an object");
        for (const auto& [rk, rv] : v.items()) {
          if (rk == "windows") c.sweep_windows = rv.get<std::vector<int>>();
          else if (rk == "stride_days") c.sweep_stride_days = rv.get<int>();
          else fail(ErrorKind::Config, "unknown robustness key '" + rk + "'");
        }
      } else if (key == "explain") {
        require(v.is_object(), ErrorKind::Config, "'explain' must be an object");
        for (const auto& [ek, ev] : v.items()) {
          if (ek == "probe_l2") c.probe.l2 = ev.get<double>();
          else if (ek == "probe_folds") c.probe.folds = ev.get<int>();
          else if (ek == "probe_seed") c.probe.seed = ev.get<std::uint64_t>();
          else if (ek == "high_bmi") c.high_bmi = ev.get<double>();
          else fail(ErrorKind::Config, "unknown explain key '" + ek + "'");
        }
      } else if (key == "synth") c.synth = synth_from_json(v);
      else if (key == "model_dir") c.model_dir = resolve(base_dir, v.get<std::string>());
      else if (key == "experiments") {
        require(v.is_array(), ErrorKind::Config, "'experiments' must be an array");
        for (const auto& e : v) c.experiments.push_back(experiment_spec_from_json(e, defaults));
      } else if (key == "grid" || key == "seeds" || key == "thresholds" || key == "hyperparameters") {
        continue;
      } else {
        fail(ErrorKind::Config, "unknown config key '" + key + "'");
      }
    }
    if (const auto g = j.find("grid"); g != j.end()) {
      for (auto& s : expand_grid(*g, defaults)) c.experiments.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, std::string("config: ") + e.what());
  }
  require(c.workers >= 1, ErrorKind::Config, "workers must be >= 1");
  require(!c.sweep_windows.empty(), ErrorKind::Config, "robustness needs at least one window");
  for (int w : c.sweep_windows) require(w >= 1, ErrorKind::Config, "sweep windows must be >= 1 day");
  require(c.sweep_stride_days >= 0, ErrorKind::Config, "stride_days must be >= 0");
  require(c.probe.folds >= 2 && c.probe.l2 >= 0.0, ErrorKind::Config, "probe needs >= 2 folds and l2 >= 0");
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::Config, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void RunConfig::apply_env_override() {
  if (const char* env = std::getenv("IRSCREEN_OUTPUT_DIR"); env != nullptr && *env != '\0') output_dir = env;
}

}  // namespace irscreen
