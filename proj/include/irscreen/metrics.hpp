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
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "irscreen/domain.hpp"
#include "irscreen/stats.hpp"

namespace irscreen {

struct RegressionMetrics {
  std::optional<double> r2;  // undefined for constant targets
  double mae = 0.0;
  double mse = 0.0;
};

RegressionMetrics regression_metrics(std::span<const double> y_true, std::span<const double> y_pred);

/// Binary counts with IR as the positive class, plus the 3-class matrix
/// indexed [true][predicted] in IrClass order.
struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  std::array<std::array<long, 3>, 3> matrix{};

  static ConfusionCounts from_matrix(const std::array<std::array<long, 3>, 3>& m);
  static ConfusionCounts from_classes(std::span<const IrClass> truth, std::span<const IrClass> predicted);
};

struct ClassificationRates {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> adjusted_specificity;
  std::optional<double> precision;
};

ClassificationRates classification_metrics(const ConfusionCounts& c);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;
};

struct RankingCurves {
  double auroc = 0.5;
  double auprc = 0.0;
  std::vector<CurvePoint> roc;  // (fpr, tpr)
  std::vector<CurvePoint> pr;   // (recall, precision)
};

/// Higher score means more likely positive. Throws when only one class is present.
RankingCurves ranking_curves(std::span<const double> scores, std::span<const int> labels);

struct SummaryStat {
  double mean = 0.0;
  double std = 0.0;  // population std across folds
  std::size_t n = 0;
};

struct MetricBlock {
  std::size_t n = 0;
  RegressionMetrics regression;
  ConfusionCounts counts;
  ClassificationRates rates;
  std::optional<double> auroc;
  std::optional<double> auprc;
};

struct EvaluationReport {
  std::vector<MetricBlock> folds;
  MetricBlock pooled;
  std::map<std::string, SummaryStat> fold_summary;
  std::optional<RankingCurves> pooled_curves;
  PearsonResult pred_true_correlation;
};

/// Per-fold and pooled evaluation of out-of-fold HOMA-IR predictions. The
/// ranking score is the predicted HOMA-IR; the label is the true IR class.
EvaluationReport evaluate_predictions(std::span<const double> y_true, std::span<const double> y_pred,
                                      std::span<const int> fold, const IrThresholds& thresholds);

nlohmann::json to_json(const RegressionMetrics& m);
nlohmann::json to_json(const ConfusionCounts& c);
nlohmann::json to_json(const ClassificationRates& r);
nlohmann::json to_json(const MetricBlock& b);
/// Curves are omitted; they go to CSV.
nlohmann::json to_json(const EvaluationReport& r);

void write_roc_csv(std::ostream& out, const RankingCurves& c);
void write_pr_csv(std::ostream& out, const RankingCurves& c);

}  // namespace irscreen
