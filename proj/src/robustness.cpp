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

#include "irscreen/robustness.hpp"

#include <algorithm>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"
#include "irscreen/stats.hpp"

namespace irscreen {

WindowSweep rolling_window_predictions(const ParticipantRecord& record, const FrozenModel& model, int n_days,
                                       const SweepOptions& opts) {
  require(n_days >= 1, ErrorKind::InvalidArgument, "window length must be >= 1");
  require(opts.stride_days >= 0, ErrorKind::InvalidArgument, "stride must be >= 0");
  WindowSweep sweep;
  sweep.id = record.id;
  sweep.n_days = n_days;

  std::optional<Date> first, last;
  for (const auto& d : record.days) {
    if (!d.has_core_metric()) continue;
    if (!first || d.date < *first) first = d.date;
    if (!last || d.date > *last) last = d.date;
  }
  if (!first || (*last - *first).count() + 1 < n_days) {
    sweep.insufficient_span = true;
    return sweep;
  }

  const auto& cols = model.input_columns();
  const int stride = opts.stride_days == 0 ? n_days : opts.stride_days;
  for (Date end = *last; (end - *first).count() + 1 >= n_days; end -= std::chrono::days{stride}) {
    const Date anchor = end + std::chrono::days{1};
    const auto values = feature_values(record, model.feature_set, n_days, anchor);
    if (!values) continue;
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(cols.size()));
    bool complete = true;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto it = values->find(cols[c]);
      if (it == values->end()) {
        complete = false;
        break;
      }
      row(0, static_cast<Eigen::Index>(c)) = it->second;
    }
    if (!complete) continue;
    const double y = model.predict(row)(0);
    sweep.windows.push_back({end, y, classify_ir(HomaIr{y}, model.thresholds)});
  }
  return sweep;
}

std::vector<WindowSweep> sweep_out_of_fold(std::span<const ParticipantRecord> records,
                                           const ExperimentResult& experiment, int n_days,
                                           const SweepOptions& opts) {
  std::map<std::string, int> fold_of;
  for (const auto& r : experiment.predictions.rows) fold_of[r.id] = r.fold;
  std::vector<WindowSweep> out;
  for (const auto& rec : records) {
    const auto it = fold_of.find(rec.id);
    if (it == fold_of.end()) continue;
    out.push_back(rolling_window_predictions(
        rec, experiment.fold_models[static_cast<std::size_t>(it->second)], n_days, opts));
  }
  return out;
}

std::optional<double> per_individual_cv(const WindowSweep& sweep) {
  if (sweep.windows.size() < 2) return std::nullopt;
  std::vector<double> y;
  for (const auto& w : sweep.windows) y.push_back(w.y_pred);
  return coefficient_of_variation(y);
}

ConsistencyBand consistency_band(double fraction) {
  if (fraction >= 1.0 - 1e-12) return ConsistencyBand::Full;
  if (fraction >= 0.75) return ConsistencyBand::High;
  if (fraction >= 0.5) return ConsistencyBand::Medium;
  return ConsistencyBand::Low;
}

ConsistencyReport consistency_report(const std::vector<WindowSweep>& sweeps,
                                     const std::map<std::string, IrClass>& true_classes) {
  require(!sweeps.empty(), ErrorKind::InvalidArgument, "consistency needs at least one sweep");
  ConsistencyReport rep;
  rep.n_days = sweeps.front().n_days;
  std::size_t with_truth = 0, stable_correct = 0;
  for (const auto& s : sweeps) {
    if (s.windows.empty()) continue;
    ParticipantConsistency p;
    p.id = s.id;
    p.windows = static_cast<int>(s.windows.size());
    int ir = 0;
    for (const auto& w : s.windows) ir += w.class_pred == IrClass::IR ? 1 : 0;
    p.majority_ir = 2 * ir > p.windows;
    const int agree = p.majority_ir ? ir : p.windows - ir;
    p.stability = static_cast<double>(agree) / p.windows;
    rep.stability_fraction[static_cast<std::size_t>(consistency_band(p.stability))] += 1.0;
    if (const auto it = true_classes.find(s.id); it != true_classes.end()) {
      p.true_ir = it->second == IrClass::IR;
      const int truth_agree = *p.true_ir ? ir : p.windows - ir;
      p.truth_agreement = static_cast<double>(truth_agree) / p.windows;
      rep.truth_fraction[static_cast<std::size_t>(consistency_band(*p.truth_agreement))] += 1.0;
      ++with_truth;
      if (consistency_band(p.stability) == ConsistencyBand::Full && p.majority_ir == *p.true_ir) ++stable_correct;
    }
    rep.participants.push_back(std::move(p));
  }
  const double n = static_cast<double>(rep.participants.size());
  if (n > 0) {
    for (auto& f : rep.stability_fraction) f /= n;
  }
  if (with_truth > 0) {
    for (auto& f : rep.truth_fraction) f /= static_cast<double>(with_truth);
    rep.consistent_and_correct = static_cast<double>(stable_correct) / static_cast<double>(with_truth);
  }
  return rep;
}

RobustnessSummary summarize_sweeps(const std::vector<WindowSweep>& sweeps,
                                   const std::map<std::string, IrClass>& true_classes) {
  RobustnessSummary s;
  s.consistency = consistency_report(sweeps, true_classes);
  s.n_days = s.consistency.n_days;
  std::vector<double> defined;
  for (const auto& sw : sweeps) {
    s.cv.push_back(per_individual_cv(sw));
    if (s.cv.back()) defined.push_back(*s.cv.back());
  }
  if (!defined.empty()) s.median_cv = median_of(defined);
  return s;
}

void write_sweep_csv(std::ostream& out, const std::vector<WindowSweep>& sweeps) {
  csv::write_row(out, {"id", "n_days", "window_end", "y_pred", "class_pred"});
  for (const auto& s : sweeps) {
    for (const auto& w : s.windows) {
      csv::write_row(out, {s.id, std::to_string(s.n_days), format_date(w.window_end),
                           csv::format_number(w.y_pred), std::string(to_string(w.class_pred))});
    }
  }
}

nlohmann::json buckets_json(const std::string& feature_set, const std::vector<RobustnessSummary>& summaries) {
  nlohmann::json j;
  j["feature_set"] = feature_set;
  j["bands"] = kBandLabels;
  auto& cols = j["windows"] = nlohmann::json::array();
  for (const auto& s : summaries) {
    cols.push_back({{"n_days", s.n_days},
                    {"participants", s.consistency.participants.size()},
                    {"stability", s.consistency.stability_fraction},
                    {"truth_agreement", s.consistency.truth_fraction},
                    {"consistent_and_correct", s.consistency.consistent_and_correct},
                    {"median_cv_percent", s.median_cv ? nlohmann::json(*s.median_cv) : nlohmann::json(nullptr)}});
  }
  return j;
}

}  // namespace irscreen
