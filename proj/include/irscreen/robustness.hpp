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

#include <array>
#include <json.hpp>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "irscreen/domain.hpp"
#include "irscreen/pipeline.hpp"

namespace irscreen {

inline constexpr int kDefaultSweepWindows[] = {7, 14, 30, 60};

struct WindowPrediction {
  Date window_end{};  // last day inside the window
  double y_pred = 0.0;
  IrClass class_pred = IrClass::IS;
};

struct WindowSweep {
  std::string id;
  int n_days = 0;
  std::vector<WindowPrediction> windows;  // latest window first
  bool insufficient_span = false;          // observed span shorter than n_days
};

struct SweepOptions {
  int stride_days = 0;  // 0: non-overlapping tiles (stride = n)
};

/// Windows tiled backward from the last observed wearable day; windows that
/// start before the first observed day, or lack a metric, are skipped.
WindowSweep rolling_window_predictions(const ParticipantRecord& record, const FrozenModel& model, int n_days,
                                       const SweepOptions& opts = {});

/// Each participant is swept with the fold model that held it out.
std::vector<WindowSweep> sweep_out_of_fold(std::span<const ParticipantRecord> records,
                                           const ExperimentResult& experiment, int n_days,
                                           const SweepOptions& opts = {});

/// 100 * population std / mean of the window predictions; nullopt below two windows.
std::optional<double> per_individual_cv(const WindowSweep& sweep);

enum class ConsistencyBand { Full, High, Medium, Low };
inline constexpr std::array<const char*, 4> kBandLabels = {"100%", "75-99.9%", "50-74.9%", "<50%"};

ConsistencyBand consistency_band(double fraction);

struct ParticipantConsistency {
  std::string id;
  int windows = 0;
  bool majority_ir = false;     // ties go to non-IR
  double stability = 0.0;       // share of windows matching the majority label
  std::optional<bool> true_ir;
  std::optional<double> truth_agreement;  // share of windows matching the true label
};

struct ConsistencyReport {
  int n_days = 0;
  std::vector<ParticipantConsistency> participants;  // swept participants with >= 1 window
  std::array<double, 4> stability_fraction{};        // by band, sums to 1
  std::array<double, 4> truth_fraction{};            // by band, participants with a known label
  double consistent_and_correct = 0.0;               // 100% stable and majority == truth
};

ConsistencyReport consistency_report(const std::vector<WindowSweep>& sweeps,
                                     const std::map<std::string, IrClass>& true_classes);

struct RobustnessSummary {
  int n_days = 0;
  std::vector<std::optional<double>> cv;  // per sweep
  std::optional<double> median_cv;
  ConsistencyReport consistency;
};

RobustnessSummary summarize_sweeps(const std::vector<WindowSweep>& sweeps,
                                   const std::map<std::string, IrClass>& true_classes);

void write_sweep_csv(std::ostream& out, const std::vector<WindowSweep>& sweeps);
/// Table-shaped JSON: one column per window length, one row per band.
nlohmann::json buckets_json(const std::string& feature_set, const std::vector<RobustnessSummary>& summaries);

}  // namespace irscreen
