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

#include "irscreen/domain.hpp"

#include <cmath>
#include <cstdio>

#include "irscreen/error.hpp"

namespace irscreen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain_error";
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Join: return "join_error";
    case ErrorKind::MissingFeature: return "missing_feature";
    case ErrorKind::EmptyDesign: return "empty_design";
    case ErrorKind::ColumnMismatch: return "column_mismatch";
    case ErrorKind::NonFinite: return "non_finite";
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Config: return "config_error";
    case ErrorKind::Io: return "io_error";
  }
  return "error";
}

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  const std::string s(text);
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    fail(ErrorKind::Parse, "invalid date '" + s + "', expected YYYY-MM-DD");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                        std::chrono::day{d}};
  if (!ymd.ok()) fail(ErrorKind::Parse, "invalid calendar date '" + s + "'");
  return Date{ymd};
}

std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

HomaIr compute_homa_ir(double insulin, double glucose) {
  if (!(insulin >= 0.0) || !(glucose >= 0.0)) {
    fail(ErrorKind::Domain, "HOMA-IR needs non-negative insulin and glucose");
  }
  return HomaIr{insulin * glucose / 405.0};
}

std::optional<HomaIr> homa_ir_of(const ParticipantRecord& record) {
  if (!record.labs || !record.labs->fasting_insulin || !record.labs->fasting_glucose) {
    return std::nullopt;
  }
  return compute_homa_ir(*record.labs->fasting_insulin, *record.labs->fasting_glucose);
}

std::string_view to_string(IrClass c) {
  switch (c) {
    case IrClass::IS: return "IS";
    case IrClass::ImpairedIS: return "ImpairedIS";
    case IrClass::IR: return "IR";
  }
  return "?";
}

void IrThresholds::validate() const {
  if (!(0.0 < is_upper && is_upper < ir_lower && std::isfinite(ir_lower))) {
    fail(ErrorKind::Domain, "thresholds need 0 < is_upper < ir_lower");
  }
}

IrClass classify_ir(HomaIr h, const IrThresholds& t) {
  if (std::isnan(h.value)) fail(ErrorKind::Domain, "cannot classify NaN HOMA-IR");
  t.validate();
  if (h.value < t.is_upper) return IrClass::IS;
  if (h.value >= t.ir_lower) return IrClass::IR;
  return IrClass::ImpairedIS;
}

std::string_view to_string(BmiClass c) {
  switch (c) {
    case BmiClass::Unknown: return "unknown";
    case BmiClass::Underweight: return "underweight";
    case BmiClass::Normal: return "normal";
    case BmiClass::Overweight: return "overweight";
    case BmiClass::Obese: return "obese";
  }
  return "?";
}

std::string_view to_string(ActivityClass c) {
  switch (c) {
    case ActivityClass::Unknown: return "unknown";
    case ActivityClass::Sedentary: return "sedentary";
    case ActivityClass::Low: return "low";
    case ActivityClass::Somewhat: return "somewhat";
    case ActivityClass::Active: return "active";
    case ActivityClass::Highly: return "highly";
  }
  return "?";
}

BmiClass bmi_class(std::optional<double> bmi) {
  if (!bmi || !std::isfinite(*bmi)) return BmiClass::Unknown;
  if (*bmi < 18.5) return BmiClass::Underweight;
  if (*bmi < 25.0) return BmiClass::Normal;
  if (*bmi < 30.0) return BmiClass::Overweight;
  return BmiClass::Obese;
}

ActivityClass activity_class(std::optional<double> steps) {
  if (!steps || !std::isfinite(*steps)) return ActivityClass::Unknown;
  if (*steps < 5000.0) return ActivityClass::Sedentary;
  if (*steps < 7500.0) return ActivityClass::Low;
  if (*steps < 10000.0) return ActivityClass::Somewhat;
  if (*steps < 12500.0) return ActivityClass::Active;
  return ActivityClass::Highly;
}

BmiResolution resolve_bmi(const Demographics& d) {
  BmiResolution out;
  if (d.height_m && d.weight_kg && *d.height_m > 0.0) {
    out.bmi = *d.weight_kg / (*d.height_m * *d.height_m);
    if (d.bmi && std::abs(*d.bmi - *out.bmi) > 0.5) out.conflict = true;
  } else {
    out.bmi = d.bmi;
  }
  return out;
}

Strata derive_strata(const Demographics& d, std::optional<double> median_daily_steps) {
  return {bmi_class(resolve_bmi(d).bmi), activity_class(median_daily_steps)};
}

}  // namespace irscreen
