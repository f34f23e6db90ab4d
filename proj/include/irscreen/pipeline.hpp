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
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "irscreen/autoencoder.hpp"
#include "irscreen/domain.hpp"
#include "irscreen/featureset.hpp"
#include "irscreen/folds.hpp"
#include "irscreen/gbm.hpp"
#include "irscreen/metrics.hpp"

namespace irscreen {

enum class ModelKind { TreeDirect, LinearDirect, AeThenLinear, MaeThenLinear };
enum class CvScheme { KFold5, Loocv };

std::string_view to_string(ModelKind m);
std::string_view to_string(CvScheme c);
ModelKind parse_model_kind(std::string_view s);
CvScheme parse_cv_scheme(std::string_view s);

inline bool uses_autoencoder(ModelKind m) {
  return m == ModelKind::AeThenLinear || m == ModelKind::MaeThenLinear;
}

inline const std::vector<std::uint64_t>& default_seeds() {
  static const std::vector<std::uint64_t> s = {0, 92, 1, 2024, 12121};
  return s;
}

/// Fixed hyperparameters used when nested tuning is off.
GbmParams default_tree_params();
GbmParams default_linear_params();

struct ExperimentSpec {
  FeatureSetSpec feature_set;
  int window_days = 30;
  ModelKind model = ModelKind::TreeDirect;
  CvScheme cv = CvScheme::KFold5;
  std::vector<std::uint64_t> seeds = default_seeds();
  IrThresholds thresholds;
  GbmParams tree_params = default_tree_params();
  GbmParams linear_params = default_linear_params();
  MaeTrainConfig ae_config;  // mask_prob is forced to 0 for the plain autoencoder
  int latent_dim = 8;
  bool stratified_folds = false;
  bool tune = false;  // nested grid search inside each training fold

  /// "<feature set> | <n>d | <model> | <cv>"
  std::string label() const;
  void validate() const;
  const GbmParams& booster_params() const;
};

/// Trained model plus the standardizer it was fitted with; applied to new rows
/// without any refitting.
struct FrozenModel {
  FeatureSetSpec feature_set;
  int window_days = 30;
  IrThresholds thresholds;
  Standardizer standardizer;
  std::optional<Autoencoder<double>> encoder;
  GbmModel booster;

  const std::vector<std::string>& input_columns() const { return standardizer.input_columns; }
  /// Rows are unstandardized features in input_columns() order.
  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::MatrixXd>& raw) const;
  /// Booster inputs (standardized features or embeddings).
  Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& raw) const;
};

nlohmann::json to_json(const FrozenModel& m);
FrozenModel frozen_model_from_json(const nlohmann::json& j);

/// Fit standardizer, optional (masked) autoencoder and booster on the given
/// rows. `seed` drives every random stream of the fit.
FrozenModel fit_frozen_model(const ExperimentSpec& spec, const std::vector<std::string>& columns,
                             const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y, std::uint64_t seed);

struct PredictionRow {
  std::string id;
  std::optional<double> y_true;
  double y_pred = 0.0;
  int fold = -1;
  std::optional<IrClass> class_true;
  IrClass class_pred = IrClass::IS;
};

struct PredictionSet {
  std::vector<PredictionRow> rows;

  std::vector<double> y_true() const;
  std::vector<double> y_pred() const;
  std::vector<int> folds() const;
};

void write_predictions_csv(std::ostream& out, const PredictionSet& p);

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<std::string> columns;
  std::vector<std::string> skipped_ids;  // lacking a required value
  FoldAssignment folds;
  std::vector<FrozenModel> fold_models;
  PredictionSet predictions;  // ordered by id
  EvaluationReport report;
};

/// `repeat` selects the split seed seeds[repeat]; fold k's models use
/// seeds[(repeat + k) % seeds.size()].
ExperimentResult run_experiment(std::span<const ParticipantRecord> records, const ExperimentSpec& spec,
                                int repeat = 0);

/// Same, on an already-built design matrix.
ExperimentResult run_experiment(const DesignMatrix& design, const ExperimentSpec& spec, int repeat = 0);

nlohmann::json report_json(const ExperimentResult& r);

struct GridCell {
  ExperimentSpec spec;
  std::optional<ExperimentResult> result;
  std::string error;  // set when the cell failed
};

/// Cells run on `workers` threads; output order follows `specs`.
std::vector<GridCell> run_experiment_grid(std::span<const ParticipantRecord> records,
                                          const std::vector<ExperimentSpec>& specs, int workers = 1);

/// Rows lacking a frozen-model column raise MissingFeature naming the columns.
PredictionSet predict_and_classify(const FrozenModel& model, std::span<const ParticipantRecord> records);

/// Value lists expanded as a Cartesian product over a base parameter set.
struct ParamGrid {
  std::vector<int> n_estimators;
  std::vector<double> learning_rate;
  std::vector<double> reg_lambda;
  std::vector<double> reg_alpha;
  std::vector<int> max_depth;  // ignored for linear boosters

  std::vector<GbmParams> expand(const GbmParams& base) const;
};

const ParamGrid& paper_linear_grid();
const ParamGrid& paper_tree_grid();
/// Small grid used by nested tuning unless overridden.
const ParamGrid& compact_grid(Booster b);

/// Lowest mean inner-CV MSE wins; ties keep the earlier grid entry.
GbmParams tune_gbm(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const GbmParams& base, const ParamGrid& grid, int inner_folds, std::uint64_t seed);

struct ExperimentComparison {
  std::string first, second;
  WilcoxonResult fold_r2;       // per-fold r2, rank-sum
  McNemarResult ir_correctness;  // per-participant binary IR classification
  long first_ir_identified = 0;
  long second_ir_identified = 0;
};

/// Both results must cover the same participants.
ExperimentComparison compare_experiments(const ExperimentResult& a, const ExperimentResult& b);
nlohmann::json to_json(const ExperimentComparison& c);

struct StratumBlock {
  std::string axis;     // "bmi" or "activity"
  std::string stratum;  // class label
  MetricBlock metrics;  // pooled over the stratum's out-of-fold predictions
};

/// Pooled metrics within BMI and activity classes; strata with fewer than two
/// participants are left out. Activity uses median daily steps inside the
/// experiment window.
std::vector<StratumBlock> stratified_evaluation(const ExperimentResult& r,
                                                std::span<const ParticipantRecord> records);
nlohmann::json to_json(const std::vector<StratumBlock>& strata);

nlohmann::json to_json(const ExperimentSpec& s);
ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const ExperimentSpec& defaults = {});

}  // namespace irscreen
