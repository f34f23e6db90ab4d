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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "irscreen/domain.hpp"

namespace irscreen {

struct CohortFiles {
  std::filesystem::path participants;
  std::filesystem::path wearables;
  std::filesystem::path labs;

  /// participants.csv, wearables.csv and labs.csv inside `dir`.
  static CohortFiles in_directory(const std::filesystem::path& dir);
};

/// Loads and joins the three cohort files. Records come back sorted by id,
/// each with its wearable days sorted by date. Throws Parse on malformed
/// rows or duplicate (id, date) pairs, Join on ids unknown to participants.
std::vector<ParticipantRecord> load_cohort(const CohortFiles& files);

enum class ExclusionReason {
  NotFasting,
  BmiOutOfRange,
  HomaOutlier,
  InsufficientWearableDays,
  MissingRequiredFields,
};

std::string_view to_string(ExclusionReason r);

struct QcConfig {
  int min_wearable_days = 14;
  int window_days = 120;  // days counted inside [draw - window_days, draw)
  double bmi_min = 12.0;
  double bmi_max = 65.0;
  double homa_cutoff = 15.0;  // exclude HOMA-IR >= cutoff
};

struct QcReport {
  std::size_t input_n = 0;
  std::size_t retained_n = 0;
  std::size_t not_fasting = 0;
  std::size_t bmi_out_of_range = 0;
  std::size_t homa_outlier = 0;
  std::size_t insufficient_wearable_days = 0;
  std::size_t missing_required_fields = 0;
  std::size_t bmi_conflicts = 0;  // retained records whose explicit bmi disagreed
  std::vector<std::pair<std::string, ExclusionReason>> excluded;  // sorted by id

  std::size_t count(ExclusionReason r) const;
  bool operator==(const QcReport&) const = default;
};

/// Number of days in [anchor - n_days, anchor) carrying a core metric.
int observed_days_before(const ParticipantRecord& r, Date anchor, int n_days);

/// First failing gate wins, checked in the order of ExclusionReason.
std::pair<std::vector<ParticipantRecord>, QcReport> apply_quality_control(
    std::vector<ParticipantRecord> records, const QcConfig& config = {});

}  // namespace irscreen
