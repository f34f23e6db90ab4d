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

#include "irscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"

namespace irscreen {

namespace {

std::optional<double> ratio(long num, long den) {
  if (den <= 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

RegressionMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred) {
  require(y_true.size() == y_pred.size() && !y_true.empty(), ErrorKind::InvalidArgument,
          "regression metrics need equal non-zero lengths");
  const double n = static_cast<double>(y_true.size());
  const double mean = mean_of(y_true);
  double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double e = y_true[i] - y_pred[i];
    ss_res += e * e;
    abs_sum += std::abs(e);
    ss_tot += (y_true[i] - mean) * (y_true[i] - mean);
  }
  RegressionMetrics m;
  m.mae = abs_sum / n;
  m.mse = ss_res / n;
  if (ss_tot > 0.0) m.r2 = 1.0 - ss_res / ss_tot;
  return m;
}

ConfusionCounts ConfusionCounts::from_matrix(const std::array<std::array<long, 3>, 3>& m) {
  ConfusionCounts c;
  c.matrix = m;
  constexpr int ir = static_cast<int>(IrClass::IR);
  for (int t = 0; t < 3; ++t) {
    for (int p = 0; p < 3; ++p) {
      const long v = m[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
      require(v >= 0, ErrorKind::InvalidArgument, "confusion counts must be >= 0");
      const bool pos_true = t == ir, pos_pred = p == ir;
      if (pos_true && pos_pred) c.tp += v;
      else if (pos_true) c.fn += v;
      else if (pos_pred) c.fp += v;
      else c.tn += v;
    }
  }
  return c;
}

ConfusionCounts ConfusionCounts::from_classes(std::span<const IrClass> truth,
                                              std::span<const IrClass> predicted) {
  require(truth.size() == predicted.size(), ErrorKind::InvalidArgument,
          "class vectors must have equal length");
  std::array<std::array<long, 3>, 3> m{};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++m[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
  }
  return from_matrix(m);
}

ClassificationRates classification_metrics(const ConfusionCounts& c) {
  ClassificationRates r;
  r.sensitivity = ratio(c.tp, c.tp + c.fn);
  r.specificity = ratio(c.tn, c.tn + c.fp);
  r.precision = ratio(c.tp, c.tp + c.fp);
  const auto& is_row = c.matrix[static_cast<std::size_t>(IrClass::IS)];
  const long fp_is = is_row[static_cast<std::size_t>(IrClass::IR)];
  const long tn_is = is_row[0] + is_row[1] + is_row[2] - fp_is;
  r.adjusted_specificity = ratio(tn_is, tn_is + fp_is);
  return r;
}

RankingCurves ranking_curves(std::span<const double> scores, std::span<const int> labels) {
  require(scores.size() == labels.size(), ErrorKind::InvalidArgument,
          "scores and labels must have equal length");
  long pos = 0;
  for (int l : labels) {
    require(l == 0 || l == 1, ErrorKind::InvalidArgument, "labels must be 0 or 1");
    pos += l;
  }
  const long neg = static_cast<long>(labels.size()) - pos;
  require(pos > 0 && neg > 0, ErrorKind::InvalidArgument, "ranking metrics need both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RankingCurves c;
  c.auroc = 0.0;
  c.roc.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  c.pr.push_back({0.0, 1.0, std::numeric_limits<double>::infinity()});
  long tp = 0, fp = 0;
  double prev_fpr = 0.0, prev_tpr = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == s) {
      if (labels[order[j]] == 1) ++tp; else ++fp;
      ++j;
    }
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    c.auroc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    c.auprc += (tpr - prev_recall) * precision;
    c.roc.push_back({fpr, tpr, s});
    c.pr.push_back({tpr, precision, s});
    prev_fpr = fpr;
    prev_tpr = tpr;
    prev_recall = tpr;
    i = j;
  }
  return c;
}

namespace {

MetricBlock evaluate_block(std::span<const double> y_true, std::span<const double> y_pred,
                           const IrThresholds& thresholds) {
  MetricBlock b;
  b.n = y_true.size();
  b.regression = regression_metrics(y_true, y_pred);
  std::vector<IrClass> t, p;
  std::vector<int> labels;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    t.push_back(classify_ir(HomaIr{y_true[i]}, thresholds));
    p.push_back(classify_ir(HomaIr{y_pred[i]}, thresholds));
    labels.push_back(t.back() == IrClass::IR ? 1 : 0);
  }
  b.counts = ConfusionCounts::from_classes(t, p);
  b.rates = classification_metrics(b.counts);
  const bool both = std::find(labels.begin(), labels.end(), 1) != labels.end() &&
                    std::find(labels.begin(), labels.end(), 0) != labels.end();
  if (both) {
    const auto curves = ranking_curves(y_pred, labels);
    b.auroc = curves.auroc;
    b.auprc = curves.auprc;
  }
  return b;
}

void summarize(std::map<std::string, SummaryStat>& out, const std::string& name,
               const std::vector<double>& values) {
  if (values.empty()) return;
  out[name] = SummaryStat{mean_of(values), population_std(values), values.size()};
}

}  // namespace

EvaluationReport evaluate_predictions(std::span<const double> y_true, std::span<const double> y_pred,
                                      std::span<const int> fold, const IrThresholds& thresholds) {
  require(y_true.size() == y_pred.size() && y_true.size() == fold.size(), ErrorKind::InvalidArgument,
          "evaluation inputs must have equal length");
  EvaluationReport rep;
  rep.pooled = evaluate_block(y_true, y_pred, thresholds);
  std::vector<int> labels;
  for (double y : y_true) labels.push_back(classify_ir(HomaIr{y}, thresholds) == IrClass::IR ? 1 : 0);
  if (rep.pooled.auroc) rep.pooled_curves = ranking_curves(y_pred, labels);
  rep.pred_true_correlation = pearson(y_true, y_pred);

  const std::set<int> fold_ids(fold.begin(), fold.end());
  std::map<std::string, std::vector<double>> per;
  for (int f : fold_ids) {
    std::vector<double> t, p;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      if (fold[i] == f) {
        t.push_back(y_true[i]);
        p.push_back(y_pred[i]);
      }
    }
    MetricBlock b = evaluate_block(t, p, thresholds);
    auto add = [&](const char* name, const std::optional<double>& v) {
      if (v) per[name].push_back(*v);
    };
    add("r2", b.regression.r2);
    add("mae", b.regression.mae);
    add("mse", b.regression.mse);
    add("sensitivity", b.rates.sensitivity);
    add("specificity", b.rates.specificity);
    add("adjusted_specificity", b.rates.adjusted_specificity);
    add("precision", b.rates.precision);
    add("auroc", b.auroc);
    add("auprc", b.auprc);
    rep.folds.push_back(std::move(b));
  }
  for (const auto& [name, values] : per) summarize(rep.fold_summary, name, values);
  return rep;
}

nlohmann::json to_json(const RegressionMetrics& m) {
  return {{"r2", opt(m.r2)}, {"mae", m.mae}, {"mse", m.mse}};
}

nlohmann::json to_json(const ConfusionCounts& c) {
  nlohmann::json m = nlohmann::json::array();
  for (const auto& row : c.matrix) m.push_back(row);
  return {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}, {"matrix", m}};
}

nlohmann::json to_json(const ClassificationRates& r) {
  return {{"sensitivity", opt(r.sensitivity)},
          {"specificity", opt(r.specificity)},
          {"adjusted_specificity", opt(r.adjusted_specificity)},
          {"precision", opt(r.precision)}};
}

nlohmann::json to_json(const MetricBlock& b) {
  nlohmann::json j = to_json(b.regression);
  j.update(to_json(b.rates));
  j["n"] = b.n;
  j["auroc"] = opt(b.auroc);
  j["auprc"] = opt(b.auprc);
  j["confusion"] = to_json(b.counts);
  return j;
}

nlohmann::json to_json(const EvaluationReport& r) {
  nlohmann::json j;
  j["pooled"] = to_json(r.pooled);
  auto& folds = j["folds"] = nlohmann::json::array();
  for (const auto& f : r.folds) folds.push_back(to_json(f));
  auto& summary = j["fold_summary"] = nlohmann::json::object();
  for (const auto& [name, s] : r.fold_summary) summary[name] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  j["pearson_pred_true"] = {{"r", opt(r.pred_true_correlation.r)},
                            {"p_value", opt(r.pred_true_correlation.p_value)},
                            {"n", r.pred_true_correlation.n}};
  return j;
}

void write_roc_csv(std::ostream& out, const RankingCurves& c) {
  csv::write_row(out, {"fpr", "tpr", "threshold"});
  for (const auto& p : c.roc) {
    csv::write_row(out, {csv::format_number(p.x), csv::format_number(p.y), csv::format_number(p.threshold)});
  }
}

void write_pr_csv(std::ostream& out, const RankingCurves& c) {
  csv::write_row(out, {"recall", "precision", "threshold"});
  for (const auto& p : c.pr) {
    csv::write_row(out, {csv::format_number(p.x), csv::format_number(p.y), csv::format_number(p.threshold)});
  }
}

}  // namespace irscreen
