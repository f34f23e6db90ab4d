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

#include "irscreen/featureset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace irscreen {
namespace {

std::string lower_alnum(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

double median_of(std::vector<double> v) {
  const auto n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::optional<double> lab_value(const BloodPanel& b, std::string_view name) {
  if (name == "glucose") return b.fasting_glucose;
  if (name == "hba1c") return b.hba1c;
  if (name == "hdl") return b.hdl;
  if (name == "ldl") return b.ldl;
  if (name == "triglycerides") return b.triglycerides;
  if (name == "total_cholesterol") return b.total_cholesterol;
  const auto it = b.metabolic_panel.find(std::string(name));
  if (it == b.metabolic_panel.end()) return std::nullopt;
  return it->second;
}

}  // namespace

void AggregationWindow::validate(bool allow_any) const {
  const bool allowed = std::find(std::begin(kAllowedWindows), std::end(kAllowedWindows),
                                 n_days) != std::end(kAllowedWindows);
  require(n_days > 0 && (allowed || allow_any), ErrorKind::InvalidArgument,
          "window length " + std::to_string(n_days) + " is not an allowed aggregation window");
}

std::string_view to_string(Panel p) {
  switch (p) {
    case Panel::Wearables: return "Wearables";
    case Panel::Demographics: return "Demographics";
    case Panel::FastingGlucose: return "Glucose";
    case Panel::LipidPanel: return "Lipid Panel";
    case Panel::MetabolicPanel: return "Metabolic Panel";
    case Panel::HbA1c: return "HbA1c";
    case Panel::Hypertension: return "Hypertension";
  }
  return "?";
}

Panel parse_panel(std::string_view name) {
  const std::string k = lower_alnum(name);
  if (k == "wearables" || k == "wearable") return Panel::Wearables;
  if (k == "demographics" || k == "demo") return Panel::Demographics;
  if (k == "glucose" || k == "fastingglucose") return Panel::FastingGlucose;
  if (k == "lipidpanel" || k == "lipidpanels" || k == "lipids") return Panel::LipidPanel;
  if (k == "metabolicpanel" || k == "metabolic") return Panel::MetabolicPanel;
  if (k == "hba1c") return Panel::HbA1c;
  if (k == "hypertension") return Panel::Hypertension;
  fail(ErrorKind::InvalidArgument, "unknown feature panel '" + std::string(name) + "'");
}

FeatureSetSpec::FeatureSetSpec(std::string n, std::vector<Panel> p)
    : name(std::move(n)), panels(std::move(p)) {
  std::sort(panels.begin(), panels.end());
  panels.erase(std::unique(panels.begin(), panels.end()), panels.end());
  require(!panels.empty(), ErrorKind::InvalidArgument, "feature set needs at least one panel");
}

bool FeatureSetSpec::has(Panel p) const {
  return std::find(panels.begin(), panels.end(), p) != panels.end();
}

std::vector<std::string> FeatureSetSpec::wearable_metrics() const {
  auto m = core_wearable_metrics();
  m.insert(m.end(), wearable_extras.begin(), wearable_extras.end());
  return m;
}

std::vector<std::string> FeatureSetSpec::columns() const {
  std::vector<std::string> cols;
  auto add = [&](const std::string& c) {
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
  };
  for (Panel p : panels) {
    switch (p) {
      case Panel::Wearables:
        for (const auto& m : wearable_metrics()) {
          add(m + "_mean");
          add(m + "_std");
          add(m + "_median");
        }
        break;
      case Panel::Demographics:
        add("age");
        add("bmi");
        break;
      case Panel::FastingGlucose: add("glucose"); break;
      case Panel::LipidPanel:
        for (const char* c : {"hdl", "ldl", "triglycerides", "total_cholesterol"}) add(c);
        break;
      case Panel::MetabolicPanel:
        for (const auto& a : metabolic_analytes) add(a);
        break;
      case Panel::HbA1c: add("hba1c"); break;
      case Panel::Hypertension: add("hypertension"); break;
    }
  }
  return cols;
}

const std::vector<FeatureSetSpec>& feature_set_registry() {
  using P = Panel;
  static const std::vector<FeatureSetSpec> registry = {
      {"Demographics", {P::Demographics}},
      {"Wearables", {P::Wearables}},
      {"Glucose", {P::FastingGlucose}},
      {"Lipid Panel", {P::LipidPanel}},
      {"Wearables + Demographics", {P::Wearables, P::Demographics}},
      {"Wearables + Demographics + Glucose", {P::Wearables, P::Demographics, P::FastingGlucose}},
      {"Wearables + Demographics + Lipid Panel", {P::Wearables, P::Demographics, P::LipidPanel}},
      {"Wearables + Demographics + Glucose + Lipid Panel",
       {P::Wearables, P::Demographics, P::FastingGlucose, P::LipidPanel}},
      {"Wearables + Demographics + Lipid Panel + Metabolic Panel",
       {P::Wearables, P::Demographics, P::LipidPanel, P::MetabolicPanel}},
  };
  return registry;
}

FeatureSetSpec feature_set_by_name(std::string_view name) {
  for (const auto& s : feature_set_registry()) {
    if (lower_alnum(s.name) == lower_alnum(name)) return s;
  }
  std::vector<Panel> panels;
  std::size_t start = 0;
  while (start <= name.size()) {
    const auto plus = name.find('+', start);
    panels.push_back(parse_panel(name.substr(start, plus - start)));
    if (plus == std::string_view::npos) break;
    start = plus + 1;
  }
  return FeatureSetSpec(std::string(name), std::move(panels));
}

std::optional<double> wearable_metric(const WearableDaily& day, std::string_view metric) {
  if (metric == "rhr") return day.rhr;
  if (metric == "hrv_rmssd") return day.hrv_rmssd;
  if (metric == "steps") return day.steps;
  if (metric == "sleep_minutes") return day.sleep_minutes;
  const auto it = day.extras.find(std::string(metric));
  if (it == day.extras.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<double> window_values(std::span<const WearableDaily> days, const AggregationWindow& w,
                                  std::string_view metric) {
  const Date start = w.anchor - std::chrono::days{w.n_days};
  std::vector<double> vals;
  for (const auto& d : days) {
    if (d.date < start || d.date >= w.anchor) continue;
    if (const auto v = wearable_metric(d, metric)) vals.push_back(*v);
  }
  return vals;
}

}  // namespace

std::map<std::string, double> aggregate_wearables_window(std::span<const WearableDaily> days,
                                                         const AggregationWindow& w,
                                                         const std::vector<std::string>& metrics) {
  std::map<std::string, double> out;
  for (const auto& m : metrics) {
    const auto vals = window_values(days, w, m);
    if (vals.empty()) {
      fail(ErrorKind::MissingFeature, "no in-window values for wearable metric '" + m + "'");
    }
    const double n = static_cast<double>(vals.size());
    // Sum in sorted order so the result does not depend on row storage order.
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : sorted) ss += (v - mean) * (v - mean);
    out[m + "_mean"] = mean;
    out[m + "_std"] = std::sqrt(ss / n);
    out[m + "_median"] = median_of(std::move(sorted));
  }
  return out;
}

std::optional<double> median_daily_steps(std::span<const WearableDaily> days,
                                         const AggregationWindow& w) {
  auto vals = window_values(days, w, "steps");
  if (vals.empty()) return std::nullopt;
  return median_of(std::move(vals));
}

std::optional<std::map<std::string, double>> feature_values(const ParticipantRecord& r,
                                                            const FeatureSetSpec& spec,
                                                            int n_days,
                                                            std::optional<Date> anchor) {
  std::map<std::string, double> values;
  const BloodPanel* labs = r.labs ? &*r.labs : nullptr;
  if (spec.has(Panel::Wearables)) {
    if (!anchor && !labs) return std::nullopt;
    const AggregationWindow w{n_days, anchor ? *anchor : labs->draw_date};
    try {
      values = aggregate_wearables_window(r.days, w, spec.wearable_metrics());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MissingFeature) return std::nullopt;
      throw;
    }
  }
  if (spec.has(Panel::Demographics)) {
    const auto bmi = resolve_bmi(r.demographics).bmi;
    if (!r.demographics.age || !bmi) return std::nullopt;
    values["age"] = *r.demographics.age;
    values["bmi"] = *bmi;
  }
  if (spec.has(Panel::Hypertension)) values["hypertension"] = r.demographics.hypertension ? 1 : 0;
  for (const auto& col : spec.columns()) {
    if (values.count(col)) continue;
    if (!labs) return std::nullopt;
    const auto v = lab_value(*labs, col);
    if (!v) return std::nullopt;
    values[col] = *v;
  }
  return values;
}

std::optional<Eigen::VectorXd> feature_row(const ParticipantRecord& r, const FeatureSetSpec& spec,
                                           int n_days, std::optional<Date> anchor) {
  const auto values = feature_values(r, spec, n_days, anchor);
  if (!values) return std::nullopt;
  const auto cols = spec.columns();
  Eigen::VectorXd row(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) row(static_cast<Eigen::Index>(j)) = values->at(cols[j]);
  return row;
}

DesignMatrix build_design_matrix(std::span<const ParticipantRecord> records,
                                 const FeatureSetSpec& spec, int n_days) {
  DesignMatrix dm;
  dm.columns = spec.columns();
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> targets;
  for (const auto& r : records) {
    const auto homa = homa_ir_of(r);
    if (!homa) continue;
    auto row = feature_row(r, spec, n_days);
    if (!row) continue;
    dm.ids.push_back(r.id);
    rows.push_back(std::move(*row));
    targets.push_back(homa->value);
  }
  if (rows.empty()) {
    fail(ErrorKind::EmptyDesign, "no participant carries every column of '" + spec.name + "'");
  }
  dm.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dm.columns.size()));
  dm.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    dm.X.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    dm.y(static_cast<Eigen::Index>(i)) = targets[i];
  }
  return dm;
}

}  // namespace irscreen
