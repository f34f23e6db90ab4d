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
#include <ostream>
#include <string>
#include <vector>

#include "irscreen/gbm.hpp"

namespace irscreen {

struct ShapVector {
  double base = 0.0;          // phi_0
  Eigen::VectorXd phi;        // one entry per model feature
  double prediction = 0.0;    // model output for the explained row

  double reconstructed() const { return base + phi.sum(); }
};

/// Tree-path-dependent Shapley values for one tree, unscaled (leaf values as
/// stored). Adds into phi; returns the tree's cover-weighted expectation.
double tree_shap_accumulate(const RegressionTree& tree, const Eigen::Ref<const Eigen::VectorXd>& x,
                            Eigen::Ref<Eigen::VectorXd> phi);

/// Cover-weighted mean leaf value of a tree.
double tree_expected_value(const RegressionTree& tree);

ShapVector tree_shap_values(const GbmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// phi_j = w_j (x_j - mu_j); phi_0 is the prediction at the background means.
ShapVector linear_shap_values(const GbmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& background_mean);

/// Rows are samples. Tree models ignore the background; linear models use
/// its column means.
std::vector<ShapVector> shap_matrix(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::MatrixXd>& background);

struct ImportanceEntry {
  std::string feature;
  double mean_abs_shap = 0.0;
};

struct ImportanceSummary {
  std::vector<ImportanceEntry> ranking;  // descending, ties by feature name
};

ImportanceSummary importance_summary(const std::vector<std::string>& features,
                                     const std::vector<ShapVector>& shap);

struct ProbeConfig {
  double l2 = 1.0;  // ridge penalty on non-intercept weights
  int folds = 5;
  std::uint64_t seed = 0;
  int max_iter = 100;
};

/// Mean held-out AUROC of an L2 logistic regression on the embeddings under
/// internal k-fold CV. Folds lacking one class are skipped.
double probe_latent_space(const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                          const std::vector<int>& labels, const ProbeConfig& cfg = {});

/// Logistic regression by IRLS; returns (intercept, weights...).
Eigen::VectorXd fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<int>& y,
                             double l2, int max_iter = 100);

void write_shap_csv(std::ostream& out, const std::vector<std::string>& ids,
                    const std::vector<std::string>& features, const std::vector<ShapVector>& shap);
void write_importance_csv(std::ostream& out, const ImportanceSummary& s);
/// (model, feature, weight) triples with weights normalized to sum to 1 per model.
nlohmann::json sankey_triples(const std::string& model, const ImportanceSummary& s);

}  // namespace irscreen
