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

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace irscreen {

using Date = std::chrono::sys_days;

/// Parses an ISO-8601 calendar date (YYYY-MM-DD).
Date parse_date(std::string_view text);
std::string format_date(Date d);

/// Fasting blood draw. Concentrations are mg/dL unless noted; any analyte may
/// be absent, in which case experiments needing it skip the participant.
struct BloodPanel {
  std::optional<double> fasting_glucose;  // mg/dL
  std::optional<double> fasting_insulin;  // uU/mL
  std::optional<double> hba1c;            // percent
  std::optional<double> hdl;
  std::optional<double> ldl;
  std::optional<double> triglycerides;
  std::optional<double> total_cholesterol;
  std::map<std::string, double> metabolic_panel;
  bool fasting_flag = true;
  Date draw_date{};
};

struct Demographics {
  std::optional<double> age;
  std::optional<double> height_m;
  std::optional<double> weight_kg;
  std::optional<double> bmi;  // explicit value; see resolve_bmi
  std::string gender;
  std::string ethnicity;
  bool hypertension = false;
  std::map<std::string, bool> comorbidities;
};

struct WearableDaily {
  Date date{};
  std::optional<double> rhr;            // beats/min, sleep-period
  std::optional<double> hrv_rmssd;      // ms
  std::optional<double> steps;          // count/day
  std::optional<double> sleep_minutes;  // minutes
  std::map<std::string, double> extras;

  /// A day counts as observed when at least one core metric is present.
  bool has_core_metric() const noexcept { return rhr || steps; }
};

struct ParticipantRecord {
  std::string id;
  Demographics demographics;
  std::vector<WearableDaily> days;  // sorted by date, unique dates
  std::optional<BloodPanel> labs;
};

struct HomaIr {
  double value = 0.0;
};

/// insulin (uU/mL) x glucose (mg/dL) / 405. Throws Domain on negative input.
HomaIr compute_homa_ir(double insulin, double glucose);

/// HOMA-IR of a record, or nullopt when insulin or glucose is missing.
std::optional<HomaIr> homa_ir_of(const ParticipantRecord& record);

enum class IrClass { IS = 0, ImpairedIS = 1, IR = 2 };

std::string_view to_string(IrClass c);

struct IrThresholds {
  double is_upper = 1.5;
  double ir_lower = 2.9;

  /// Throws Domain unless 0 < is_upper < ir_lower.
  void validate() const;
};

/// IS below is_upper, IR at or above ir_lower, ImpairedIS in between.
IrClass classify_ir(HomaIr h, const IrThresholds& t = {});

inline bool is_insulin_resistant(IrClass c) noexcept { return c == IrClass::IR; }

enum class BmiClass { Unknown, Underweight, Normal, Overweight, Obese };
enum class ActivityClass { Unknown, Sedentary, Low, Somewhat, Active, Highly };

std::string_view to_string(BmiClass c);
std::string_view to_string(ActivityClass c);

BmiClass bmi_class(std::optional<double> bmi);
ActivityClass activity_class(std::optional<double> median_daily_steps);

struct BmiResolution {
  std::optional<double> bmi;
  bool conflict = false;  // derived and explicit disagree by more than 0.5
};

/// weight / height^2 when both are present, else the explicit field.
BmiResolution resolve_bmi(const Demographics& d);

struct Strata {
  BmiClass bmi = BmiClass::Unknown;
  ActivityClass activity = ActivityClass::Unknown;
};

Strata derive_strata(const Demographics& d, std::optional<double> median_daily_steps);

}  // namespace irscreen
