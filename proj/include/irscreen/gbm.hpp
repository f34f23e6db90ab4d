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

// Second-order gradient boosting for squared error with two learner types:
// exact-greedy regression trees scored by the regularized gain, and an
// elastic-net linear learner updated by cyclic coordinate descent.

#include <Eigen/Dense>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace irscreen {

enum class Booster { Tree, Linear };

std::string_view to_string(Booster b);

struct GbmParams {
  Booster booster = Booster::Tree;
  int n_estimators = 100;
  double learning_rate = 0.1;
  double reg_lambda = 1.0;   // L2 on leaf / linear weights
  double reg_alpha = 0.0;    // L1 on leaf / linear weights
  double gamma_split = 0.0;  // minimum gain to keep a split
  int max_depth = 3;
  double min_child_weight = 1.0;
  std::optional<double> base_score;  // mean(y) when unset
  std::uint64_t random_state = 0;

  void validate() const;
  bool operator==(const GbmParams&) const = default;
};

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;  // x[feature] < threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf weight, unscaled by the learning rate
  double cover = 0.0;  // hessian sum of training rows reaching the node

  bool is_leaf() const noexcept { return left < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  template <typename Row>
  int leaf_index(const Row& x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) < n.threshold ? n.left : n.right;
    }
    return i;
  }

  template <typename Row>
  double predict(const Row& x) const {
    return nodes[static_cast<std::size_t>(leaf_index(x))].value;
  }

  int leaf_count() const;
  int depth() const;
  bool operator==(const RegressionTree&) const = default;
};

struct SplitDecision {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;  // already net of gamma_split
  double grad_left = 0.0, hess_left = 0.0;
  double grad_right = 0.0, hess_right = 0.0;
};

/// 0.5 [GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l)] - gamma
double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma);

/// -sign(G) max(|G| - alpha, 0) / (H + lambda)
double leaf_weight(double grad_sum, double hess_sum, double lambda, double alpha);

/// Best split over every column of `features` at midpoints of sorted
/// distinct values; nullopt when no candidate has positive gain or every
/// column is constant. Ties (gains equal to a relative 1e-9) go to the lowest
/// feature, then lowest threshold.
std::optional<SplitDecision> best_split(std::span<const double> grad, std::span<const double> hess,
                                        const Eigen::Ref<const Eigen::MatrixXd>& features,
                                        double lambda, double gamma,
                                        double min_child_weight = 1.0);

struct GbmModel {
  GbmParams params;
  std::vector<std::string> feature_names;
  double base_score = 0.0;
  std::vector<RegressionTree> trees;  // tree booster
  Eigen::VectorXd weights;            // linear booster
  double bias = 0.0;                  // linear booster, added to base_score

  Eigen::Index n_features() const { return static_cast<Eigen::Index>(feature_names.size()); }
};

GbmModel fit_tree_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                           std::vector<std::string> feature_names = {});

GbmModel fit_linear_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                             std::vector<std::string> feature_names = {});

/// Dispatches on params.booster.
GbmModel fit_gbm(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                 std::vector<std::string> feature_names = {});

/// Throws ColumnMismatch when X has the wrong width.
Eigen::VectorXd gbm_predict(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X);

/// Name-checked variant: `columns` must equal the model's feature names.
Eigen::VectorXd gbm_predict(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const std::vector<std::string>& columns);

nlohmann::json to_json(const GbmParams& p);
GbmParams gbm_params_from_json(const nlohmann::json& j, GbmParams defaults = {});
nlohmann::json to_json(const GbmModel& m);
GbmModel gbm_from_json(const nlohmann::json& j);

}  // namespace irscreen
