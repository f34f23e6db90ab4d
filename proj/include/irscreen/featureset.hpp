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

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "irscreen/domain.hpp"
#include "irscreen/error.hpp"

namespace irscreen {

inline constexpr int kAllowedWindows[] = {7, 14, 30, 60, 90, 120};

struct AggregationWindow {
  int n_days = 7;
  Date anchor{};  // exclusive end: days in [anchor - n_days, anchor)

  /// Throws InvalidArgument unless n_days is one of kAllowedWindows (or any
  /// positive length when allow_any is set).
  void validate(bool allow_any = false) const;
};

// Ordered: column order follows this enumeration.
enum class Panel {
  Wearables,
  Demographics,
  FastingGlucose,
  LipidPanel,
  MetabolicPanel,
  HbA1c,
  Hypertension,
};

std::string_view to_string(Panel p);
Panel parse_panel(std::string_view name);

inline const std::vector<std::string>& core_wearable_metrics() {
  static const std::vector<std::string> m = {"rhr", "hrv_rmssd", "steps", "sleep_minutes"};
  return m;
}

inline const std::vector<std::string>& default_metabolic_analytes() {
  static const std::vector<std::string> m = {"glucose",   "albumin_globulin_ratio",
                                             "creatinine", "egfr",
                                             "bun",        "sodium",
                                             "potassium",  "chloride",
                                             "crp"};
  return m;
}

struct FeatureSetSpec {
  std::string name;
  std::vector<Panel> panels;                   // kept sorted and unique
  std::vector<std::string> wearable_extras;    // opt-in extra daily signals
  std::vector<std::string> metabolic_analytes = default_metabolic_analytes();

  FeatureSetSpec() = default;
  FeatureSetSpec(std::string n, std::vector<Panel> p);

  bool has(Panel p) const;
  std::vector<std::string> wearable_metrics() const;
  /// Ordered column names, duplicates (glucose in two panels) removed.
  std::vector<std::string> columns() const;
};

/// Nine named sets used throughout; arbitrary subsets are built directly.
const std::vector<FeatureSetSpec>& feature_set_registry();
/// Registry lookup, falling back to parsing "A + B + C" panel lists.
FeatureSetSpec feature_set_by_name(std::string_view name);

/// mean / population std / median of each metric over the window.
/// Keys are "<metric>_mean", "<metric>_std", "<metric>_median".
/// Throws MissingFeature when a metric has no in-window value.
std::map<std::string, double> aggregate_wearables_window(std::span<const WearableDaily> days,
                                                         const AggregationWindow& w,
                                                         const std::vector<std::string>& metrics);

std::optional<double> wearable_metric(const WearableDaily& day, std::string_view metric);

/// Median of all observed daily steps inside the window, if any.
std::optional<double> median_daily_steps(std::span<const WearableDaily> days,
                                         const AggregationWindow& w);

/// One unstandardized feature row; Missing when the record lacks a required
/// value. `anchor` overrides the blood-draw date for rolling windows.
std::optional<Eigen::VectorXd> feature_row(const ParticipantRecord& r,
                                           const FeatureSetSpec& spec, int n_days,
                                           std::optional<Date> anchor = std::nullopt);

/// Same as feature_row, with a column -> value map.
std::optional<std::map<std::string, double>> feature_values(
    const ParticipantRecord& r, const FeatureSetSpec& spec, int n_days,
    std::optional<Date> anchor = std::nullopt);

struct DesignMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd X;
  Eigen::VectorXd y;  // HOMA-IR

  Eigen::Index rows() const { return X.rows(); }
};

/// Rows for every record carrying all required columns. Throws EmptyDesign
/// when nothing survives. Insulin is never a column.
DesignMatrix build_design_matrix(std::span<const ParticipantRecord> records,
                                 const FeatureSetSpec& spec, int n_days);

/// Per-column affine map fitted on training rows only. Zero-variance columns
/// are dropped at fit time and listed in `dropped`.
template <typename Scalar>
struct StandardizerParams {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<std::string> input_columns;
  std::vector<Eigen::Index> kept;
  Vector mean;   // per kept column
  Vector scale;  // population std per kept column
  std::vector<std::string> dropped;

  std::vector<std::string> output_columns() const {
    std::vector<std::string> out;
    out.reserve(kept.size());
    for (auto k : kept) out.push_back(input_columns[static_cast<std::size_t>(k)]);
    return out;
  }
};

template <typename Derived>
StandardizerParams<typename Derived::Scalar> fit_standardizer(
    const Eigen::MatrixBase<Derived>& train, std::vector<std::string> columns) {
  using Scalar = typename Derived::Scalar;
  require(train.rows() > 0, ErrorKind::InvalidArgument, "standardizer needs training rows");
  require(static_cast<Eigen::Index>(columns.size()) == train.cols(), ErrorKind::ColumnMismatch,
          "standardizer column names do not match matrix width");
  StandardizerParams<Scalar> p;
  p.input_columns = std::move(columns);
  const Scalar n = static_cast<Scalar>(train.rows());
  std::vector<Scalar> means, scales;
  for (Eigen::Index j = 0; j < train.cols(); ++j) {
    const Scalar mu = train.col(j).sum() / n;
    const Scalar var = (train.col(j).array() - mu).square().sum() / n;
    const Scalar sd = std::sqrt(var);
    if (!(sd > Scalar(1e-12) * std::max(Scalar(1), std::abs(mu)))) {
      p.dropped.push_back(p.input_columns[static_cast<std::size_t>(j)]);
      continue;
    }
    p.kept.push_back(j);
    means.push_back(mu);
    scales.push_back(sd);
  }
  p.mean = Eigen::Map<const typename StandardizerParams<Scalar>::Vector>(
      means.data(), static_cast<Eigen::Index>(means.size()));
  p.scale = Eigen::Map<const typename StandardizerParams<Scalar>::Vector>(
      scales.data(), static_cast<Eigen::Index>(scales.size()));
  return p;
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_standardizer(
    const StandardizerParams<Scalar>& p, const Eigen::MatrixBase<Derived>& rows) {
  require(rows.cols() == static_cast<Eigen::Index>(p.input_columns.size()),
          ErrorKind::ColumnMismatch, "standardizer applied to a matrix of the wrong width");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows.rows(),
                                                            static_cast<Eigen::Index>(p.kept.size()));
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    out.col(k) = (rows.col(p.kept[static_cast<std::size_t>(k)]).array() - p.mean(k)) / p.scale(k);
  }
  return out;
}

using Standardizer = StandardizerParams<double>;

}  // namespace irscreen
