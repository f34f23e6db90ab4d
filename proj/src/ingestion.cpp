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

#include "irscreen/ingestion.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"

namespace irscreen {
namespace {

const std::set<std::string> kParticipantColumns = {
    "id", "age", "gender", "ethnicity", "height_m", "weight_kg", "bmi", "hypertension", "fasting"};
const std::set<std::string> kWearableColumns = {"id", "date", "rhr", "hrv_rmssd", "steps",
                                                "sleep_minutes"};
const std::set<std::string> kLabColumns = {"id", "draw_date", "insulin", "glucose", "hba1c",
                                           "hdl", "ldl", "triglycerides", "total_cholesterol"};

bool flag(const csv::Table& t, std::size_t row, std::size_t col) {
  const auto v = csv::number(t, row, col);
  if (!v) return false;
  if (*v != 0.0 && *v != 1.0) {
    fail(ErrorKind::Parse, t.where(row) + ": column '" + t.header[col] + "' must be 0 or 1");
  }
  return *v == 1.0;
}

std::optional<double> non_negative(const csv::Table& t, std::size_t row, std::size_t col) {
  const auto v = csv::number(t, row, col);
  if (v && *v < 0.0) {
    fail(ErrorKind::Parse, t.where(row) + ": column '" + t.header[col] + "' must be >= 0");
  }
  return v;
}

void check_id(const csv::Table& t, std::size_t row, const std::string& id) {
  if (id.empty()) fail(ErrorKind::Parse, t.where(row) + ": empty participant id");
}

}  // namespace

CohortFiles CohortFiles::in_directory(const std::filesystem::path& dir) {
  return {dir / "participants.csv", dir / "wearables.csv", dir / "labs.csv"};
}

std::vector<ParticipantRecord> load_cohort(const CohortFiles& files) {
  std::map<std::string, ParticipantRecord> by_id;
  std::map<std::string, bool> fasting;

  const csv::Table p = csv::read(files.participants);
  {
    const auto c_id = p.require_column("id");
    const auto c_age = p.require_column("age");
    const auto c_gender = p.require_column("gender");
    const auto c_eth = p.require_column("ethnicity");
    const auto c_h = p.require_column("height_m");
    const auto c_w = p.require_column("weight_kg");
    const auto c_bmi = p.column("bmi");
    const auto c_htn = p.require_column("hypertension");
    const auto c_fast = p.require_column("fasting");
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
      const std::string& id = p.rows[i][c_id];
      check_id(p, i, id);
      ParticipantRecord r;
      r.id = id;
      auto& d = r.demographics;
      d.age = non_negative(p, i, c_age);
      d.gender = p.rows[i][c_gender];
      d.ethnicity = p.rows[i][c_eth];
      d.height_m = non_negative(p, i, c_h);
      d.weight_kg = non_negative(p, i, c_w);
      if (c_bmi) d.bmi = non_negative(p, i, *c_bmi);
      d.hypertension = flag(p, i, c_htn);
      for (std::size_t c = 0; c < p.header.size(); ++c) {
        if (!kParticipantColumns.count(p.header[c])) d.comorbidities[p.header[c]] = flag(p, i, c);
      }
      if (!by_id.emplace(id, std::move(r)).second) {
        fail(ErrorKind::Parse, p.where(i) + ": duplicate participant id '" + id + "'");
      }
      fasting[id] = flag(p, i, c_fast);
    }
  }

  const csv::Table w = csv::read(files.wearables);
  {
    const auto c_id = w.require_column("id");
    const auto c_date = w.require_column("date");
    const auto c_rhr = w.require_column("rhr");
    const auto c_hrv = w.require_column("hrv_rmssd");
    const auto c_steps = w.require_column("steps");
    const auto c_sleep = w.require_column("sleep_minutes");
    std::set<std::pair<std::string, Date>> seen;
    for (std::size_t i = 0; i < w.rows.size(); ++i) {
      const std::string& id = w.rows[i][c_id];
      check_id(w, i, id);
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        fail(ErrorKind::Join, w.where(i) + ": unknown participant id '" + id + "'");
      }
      WearableDaily day;
      try {
        day.date = parse_date(w.rows[i][c_date]);
      } catch (const Error& e) {
        fail(ErrorKind::Parse, w.where(i) + ": " + e.what());
      }
      if (!seen.emplace(id, day.date).second) {
        fail(ErrorKind::Parse, w.where(i) + ": duplicate wearable row for '" + id + "' on " +
                                   format_date(day.date));
      }
      day.rhr = csv::number(w, i, c_rhr);
      if (day.rhr && !(*day.rhr > 20.0 && *day.rhr < 250.0)) {
        fail(ErrorKind::Parse, w.where(i) + ": rhr outside (20, 250)");
      }
      day.hrv_rmssd = non_negative(w, i, c_hrv);
      day.steps = non_negative(w, i, c_steps);
      day.sleep_minutes = non_negative(w, i, c_sleep);
      if (day.sleep_minutes && *day.sleep_minutes > 1440.0) {
        fail(ErrorKind::Parse, w.where(i) + ": sleep_minutes above 1440");
      }
      for (std::size_t c = 0; c < w.header.size(); ++c) {
        if (kWearableColumns.count(w.header[c])) continue;
        if (const auto v = csv::number(w, i, c)) day.extras[w.header[c]] = *v;
      }
      it->second.days.push_back(std::move(day));
    }
  }

  const csv::Table l = csv::read(files.labs);
  {
    const auto c_id = l.require_column("id");
    const auto c_date = l.require_column("draw_date");
    const auto c_ins = l.require_column("insulin");
    const auto c_glu = l.require_column("glucose");
    const auto c_a1c = l.require_column("hba1c");
    const auto c_hdl = l.require_column("hdl");
    const auto c_ldl = l.require_column("ldl");
    const auto c_tg = l.require_column("triglycerides");
    const auto c_tc = l.require_column("total_cholesterol");
    for (std::size_t i = 0; i < l.rows.size(); ++i) {
      const std::string& id = l.rows[i][c_id];
      check_id(l, i, id);
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        fail(ErrorKind::Join, l.where(i) + ": unknown participant id '" + id + "'");
      }
      if (it->second.labs) {
        fail(ErrorKind::Parse, l.where(i) + ": duplicate lab row for '" + id + "'");
      }
      BloodPanel b;
      try {
        b.draw_date = parse_date(l.rows[i][c_date]);
      } catch (const Error& e) {
        fail(ErrorKind::Parse, l.where(i) + ": " + e.what());
      }
      b.fasting_insulin = non_negative(l, i, c_ins);
      b.fasting_glucose = non_negative(l, i, c_glu);
      b.hba1c = non_negative(l, i, c_a1c);
      b.hdl = non_negative(l, i, c_hdl);
      b.ldl = non_negative(l, i, c_ldl);
      b.triglycerides = non_negative(l, i, c_tg);
      b.total_cholesterol = non_negative(l, i, c_tc);
      for (std::size_t c = 0; c < l.header.size(); ++c) {
        if (kLabColumns.count(l.header[c])) continue;
        if (const auto v = non_negative(l, i, c)) b.metabolic_panel[l.header[c]] = *v;
      }
      b.fasting_flag = fasting.at(id);
      it->second.labs = std::move(b);
    }
  }

  std::vector<ParticipantRecord> out;
  out.reserve(by_id.size());
  for (auto& [id, r] : by_id) {
    std::sort(r.days.begin(), r.days.end(),
              [](const WearableDaily& a, const WearableDaily& b) { return a.date < b.date; });
    out.push_back(std::move(r));
  }
  return out;
}

std::string_view to_string(ExclusionReason r) {
  switch (r) {
    case ExclusionReason::NotFasting: return "not_fasting";
    case ExclusionReason::BmiOutOfRange: return "bmi_out_of_range";
    case ExclusionReason::HomaOutlier: return "homa_outlier";
    case ExclusionReason::InsufficientWearableDays: return "insufficient_wearable_days";
    case ExclusionReason::MissingRequiredFields: return "missing_required_fields";
  }
  return "?";
}

std::size_t QcReport::count(ExclusionReason r) const {
  switch (r) {
    case ExclusionReason::NotFasting: return not_fasting;
    case ExclusionReason::BmiOutOfRange: return bmi_out_of_range;
    case ExclusionReason::HomaOutlier: return homa_outlier;
    case ExclusionReason::InsufficientWearableDays: return insufficient_wearable_days;
    case ExclusionReason::MissingRequiredFields: return missing_required_fields;
  }
  return 0;
}

int observed_days_before(const ParticipantRecord& r, Date anchor, int n_days) {
  const Date start = anchor - std::chrono::days{n_days};
  int n = 0;
  for (const auto& d : r.days) {
    if (d.date >= start && d.date < anchor && d.has_core_metric()) ++n;
  }
  return n;
}

std::pair<std::vector<ParticipantRecord>, QcReport> apply_quality_control(
    std::vector<ParticipantRecord> records, const QcConfig& config) {
  std::sort(records.begin(), records.end(),
            [](const ParticipantRecord& a, const ParticipantRecord& b) { return a.id < b.id; });
  QcReport report;
  report.input_n = records.size();
  std::vector<ParticipantRecord> kept;
  for (auto& r : records) {
    const auto bmi = resolve_bmi(r.demographics);
    const auto homa = homa_ir_of(r);
    std::optional<ExclusionReason> reason;
    if (r.labs && !r.labs->fasting_flag) {
      reason = ExclusionReason::NotFasting;
    } else if (bmi.bmi && (*bmi.bmi < config.bmi_min || *bmi.bmi > config.bmi_max)) {
      reason = ExclusionReason::BmiOutOfRange;
    } else if (homa && homa->value >= config.homa_cutoff) {
      reason = ExclusionReason::HomaOutlier;
    } else if (r.labs && observed_days_before(r, r.labs->draw_date, config.window_days) <
                             config.min_wearable_days) {
      reason = ExclusionReason::InsufficientWearableDays;
    } else if (!r.labs || !bmi.bmi || !homa || !r.demographics.age) {
      reason = ExclusionReason::MissingRequiredFields;
    }
    if (!reason) {
      if (bmi.conflict) ++report.bmi_conflicts;
      kept.push_back(std::move(r));
      continue;
    }
    switch (*reason) {
      case ExclusionReason::NotFasting: ++report.not_fasting; break;
      case ExclusionReason::BmiOutOfRange: ++report.bmi_out_of_range; break;
      case ExclusionReason::HomaOutlier: ++report.homa_outlier; break;
      case ExclusionReason::InsufficientWearableDays: ++report.insufficient_wearable_days; break;
      case ExclusionReason::MissingRequiredFields: ++report.missing_required_fields; break;
    }
    report.excluded.emplace_back(r.id, *reason);
  }
  report.retained_n = kept.size();
  return {std::move(kept), report};
}

}  // namespace irscreen
