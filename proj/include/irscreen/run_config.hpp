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

#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "irscreen/explain.hpp"
#include "irscreen/ingestion.hpp"
#include "irscreen/pipeline.hpp"
#include "irscreen/synthcohort.hpp"

namespace irscreen {

struct SynthConfig {
  int n = 1000;
  std::uint64_t seed = 7;
  bool functional = false;
  CohortCalibration calibration = CohortCalibration::defaults();
  FunctionalSpec functional_spec = FunctionalSpec::defaults();
};

struct RunConfig {
  std::filesystem::path data_dir;
  std::filesystem::path output_dir = "irscreen_out";
  bool apply_qc = true;
  QcConfig qc;
  /// Explicit experiments followed by the expanded grid, in that order.
  std::vector<ExperimentSpec> experiments;
  int workers = 1;
  std::vector<int> sweep_windows = {7, 14, 30, 60};
  int sweep_stride_days = 0;
  ProbeConfig probe;
  double high_bmi = 30.0;
  SynthConfig synth;
  std::filesystem::path model_dir;

  /// Every key is checked; unknown keys raise Config. Relative paths resolve
  /// against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  /// IRSCREEN_OUTPUT_DIR, when set and non-empty, replaces output_dir.
  void apply_env_override();
};

}  // namespace irscreen
