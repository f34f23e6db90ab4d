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

#include "irscreen/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "irscreen/error.hpp"

namespace irscreen {

std::string_view to_string(Booster b) { return b == Booster::Tree ? "gbtree" : "gblinear"; }

void GbmParams::validate() const {
  require(n_estimators >= 1, ErrorKind::InvalidArgument, "n_estimators must be >= 1");
  require(learning_rate > 0.0, ErrorKind::InvalidArgument, "learning_rate must be > 0");
  require(reg_lambda >= 0.0 && reg_alpha >= 0.0 && gamma_split >= 0.0,
          ErrorKind::InvalidArgument, "regularization terms must be >= 0");
  require(booster == Booster::Linear || max_depth >= 1, ErrorKind::InvalidArgument,
          "max_depth must be >= 1 for the tree booster");
  require(min_child_weight >= 0.0, ErrorKind::InvalidArgument, "min_child_weight must be >= 0");
}

int RegressionTree::leaf_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double split_gain(double gl, double hl, double gr, double hr, double lambda, double gamma) {
  const double g = gl + gr, h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma;
}

double leaf_weight(double grad_sum, double hess_sum, double lambda, double alpha) {
  const double shrunk = std::max(std::abs(grad_sum) - alpha, 0.0);
  const double sign = grad_sum > 0.0 ? 1.0 : (grad_sum < 0.0 ? -1.0 : 0.0);
  return -sign * shrunk / (hess_sum + lambda);
}

namespace {

struct SplitScan {
  double lambda = 0.0;
  double gamma = 0.0;
  double min_child_weight = 1.0;
};

// Gains equal up to rounding count as ties; the mirrored partitions of two
// features accumulate gradient sums in different orders.
constexpr double kGainTieTolerance = 1e-9;

bool beats(double gain, double best_gain) {
  return gain > best_gain + kGainTieTolerance * std::abs(best_gain);
}

// Scans one feature whose node rows are given in ascending value order.
// Updates `best` only on a clearly larger gain, so earlier candidates win ties.
void scan_feature(int feature, std::span<const int> order, const double* values,
                  std::span<const double> grad, std::span<const double> hess, double g_total,
                  double h_total, const SplitScan& cfg, std::optional<SplitDecision>& best,
                  double& best_gain) {
  double gl = 0.0, hl = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const auto i = static_cast<std::size_t>(order[k]);
    gl += grad[i];
    hl += hess[i];
    const double lo = values[order[k]], hi = values[order[k + 1]];
    if (!(lo < hi)) continue;
    const double hr = h_total - hl;
    if (hl < cfg.min_child_weight || hr < cfg.min_child_weight) continue;
    const double gr = g_total - gl;
    const double gain = split_gain(gl, hl, gr, hr, cfg.lambda, cfg.gamma);
    if (beats(gain, best_gain)) {
      double thr = 0.5 * (lo + hi);
      if (!(thr > lo)) thr = hi;
      best_gain = gain;
      best = SplitDecision{feature, thr, gain, gl, hl, gr, hr};
    }
  }
}

void check_finite(const Eigen::Ref<const Eigen::MatrixXd>& X,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  require(X.rows() == y.size(), ErrorKind::InvalidArgument, "X and y row counts differ");
  require(X.rows() > 0, ErrorKind::InvalidArgument, "boosting needs at least one row");
  require(X.allFinite() && y.allFinite(), ErrorKind::NonFinite, "NaN or inf in boosting input");
}

std::vector<std::string> default_names(Eigen::Index d, std::vector<std::string> names) {
  if (names.empty()) {
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  }
  require(static_cast<Eigen::Index>(names.size()) == d, ErrorKind::ColumnMismatch,
          "feature name count does not match matrix width");
  return names;
}

class TreeGrower {
 public:
  TreeGrower(const Eigen::Ref<const Eigen::MatrixXd>& X, const GbmParams& p)
      : X_(X), params_(p), cfg_{p.reg_lambda, p.gamma_split, p.min_child_weight} {
    const auto n = static_cast<int>(X.rows());
    presorted_.resize(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      auto& idx = presorted_[static_cast<std::size_t>(j)];
      idx.resize(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return X(a, j) < X(b, j); });
    }
  }

  RegressionTree grow(std::span<const double> grad, std::span<const double> hess) {
    RegressionTree tree;
    grad_ = grad;
    hess_ = hess;
    tree_ = &tree;
    split_node(presorted_, 0);
    return tree;
  }

 private:
  int split_node(const std::vector<std::vector<int>>& sorted, int depth) {
    const auto& rows = sorted.front();
    double g = 0.0, h = 0.0;
    for (int i : rows) {
      g += grad_[static_cast<std::size_t>(i)];
      h += hess_[static_cast<std::size_t>(i)];
    }
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.push_back(TreeNode{});
    tree_->nodes.back().cover = h;

    std::optional<SplitDecision> best;
    if (depth < params_.max_depth && rows.size() >= 2) {
      double best_gain = 0.0;
      for (std::size_t j = 0; j < sorted.size(); ++j) {
        scan_feature(static_cast<int>(j), sorted[j], X_.col(static_cast<Eigen::Index>(j)).data(),
                     grad_, hess_, g, h, cfg_, best, best_gain);
      }
    }
    if (!best) {
      tree_->nodes[static_cast<std::size_t>(id)].value =
          leaf_weight(g, h, params_.reg_lambda, params_.reg_alpha);
      return id;
    }

    std::vector<std::vector<int>> left(sorted.size()), right(sorted.size());
    const auto col = X_.col(best->feature);
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      for (int i : sorted[j]) (col(i) < best->threshold ? left[j] : right[j]).push_back(i);
    }
    {
      auto& node = tree_->nodes[static_cast<std::size_t>(id)];
      node.feature = best->feature;
      node.threshold = best->threshold;
    }
    const int l = split_node(left, depth + 1);
    const int r = split_node(right, depth + 1);
    tree_->nodes[static_cast<std::size_t>(id)].left = l;
    tree_->nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  const Eigen::Ref<const Eigen::MatrixXd>& X_;
  const GbmParams& params_;
  SplitScan cfg_;
  std::vector<std::vector<int>> presorted_;
  std::span<const double> grad_, hess_;
  RegressionTree* tree_ = nullptr;
};

// Proximal coordinate step for w_j under 0.5 H d^2 + G d + lambda/2 (w+d)^2
// + alpha |w+d|; never crosses zero in a single step.
double coordinate_delta(double grad_sum, double hess_sum, double w, double lambda, double alpha) {
  if (hess_sum + lambda <= 1e-12) return 0.0;
  const double unpenalized = w - (grad_sum + lambda * w) / (hess_sum + lambda);
  if (unpenalized >= 0.0) {
    return std::max(-(grad_sum + lambda * w + alpha) / (hess_sum + lambda), -w);
  }
  return std::min(-(grad_sum + lambda * w - alpha) / (hess_sum + lambda), -w);
}

}  // namespace

std::optional<SplitDecision> best_split(std::span<const double> grad, std::span<const double> hess,
                                        const Eigen::Ref<const Eigen::MatrixXd>& features,
                                        double lambda, double gamma, double min_child_weight) {
  require(grad.size() == hess.size() && static_cast<Eigen::Index>(grad.size()) == features.rows(),
          ErrorKind::InvalidArgument, "gradient, hessian and feature lengths differ");
  require(grad.size() >= 2, ErrorKind::InvalidArgument, "split search needs at least two rows");
  const double g = std::accumulate(grad.begin(), grad.end(), 0.0);
  const double h = std::accumulate(hess.begin(), hess.end(), 0.0);
  const Eigen::MatrixXd X = features;  // column-major copy for contiguous columns
  std::optional<SplitDecision> best;
  double best_gain = 0.0;
  const SplitScan cfg{lambda, gamma, min_child_weight};
  std::vector<int> order(grad.size());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return X(a, j) < X(b, j); });
    scan_feature(static_cast<int>(j), order, X.col(j).data(), grad, hess, g, h, cfg, best,
                 best_gain);
  }
  return best;
}

GbmModel fit_tree_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                           const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                           std::vector<std::string> feature_names) {
  params.validate();
  check_finite(X, y);
  GbmModel m;
  m.params = params;
  m.params.booster = Booster::Tree;
  m.feature_names = default_names(X.cols(), std::move(feature_names));
  m.base_score = params.base_score ? *params.base_score : y.mean();

  const auto n = static_cast<std::size_t>(X.rows());
  std::vector<double> pred(n, m.base_score), grad(n), hess(n, 1.0);
  TreeGrower grower(X, m.params);
  for (int k = 0; k < params.n_estimators; ++k) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = pred[i] - y(static_cast<Eigen::Index>(i));
    RegressionTree tree = grower.grow(grad, hess);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] += params.learning_rate * tree.predict(X.row(static_cast<Eigen::Index>(i)));
    }
    m.trees.push_back(std::move(tree));
  }
  return m;
}

GbmModel fit_linear_ensemble(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                             std::vector<std::string> feature_names) {
  params.validate();
  check_finite(X, y);
  GbmModel m;
  m.params = params;
  m.params.booster = Booster::Linear;
  m.feature_names = default_names(X.cols(), std::move(feature_names));
  m.base_score = params.base_score ? *params.base_score : y.mean();
  m.weights = Eigen::VectorXd::Zero(X.cols());

  const double eta = params.learning_rate;
  const auto n = static_cast<double>(X.rows());
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(X.rows(), m.base_score) - y;
  const Eigen::VectorXd col_hess = X.colwise().squaredNorm().transpose();  // h_i = 1
  for (int k = 0; k < params.n_estimators; ++k) {
    const double db = eta * (-grad.sum() / n);
    m.bias += db;
    grad.array() += db;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double g = grad.dot(X.col(j));
      const double dw = eta * coordinate_delta(g, col_hess(j), m.weights(j), params.reg_lambda,
                                               params.reg_alpha);
      if (dw == 0.0) continue;
      m.weights(j) += dw;
      grad += dw * X.col(j);
    }
  }
  return m;
}

GbmModel fit_gbm(const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::VectorXd>& y, const GbmParams& params,
                 std::vector<std::string> feature_names) {
  return params.booster == Booster::Tree
             ? fit_tree_ensemble(X, y, params, std::move(feature_names))
             : fit_linear_ensemble(X, y, params, std::move(feature_names));
}

Eigen::VectorXd gbm_predict(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  require(X.cols() == model.n_features(), ErrorKind::ColumnMismatch,
          "model expects " + std::to_string(model.n_features()) + " columns, got " +
              std::to_string(X.cols()));
  if (model.params.booster == Booster::Linear) {
    return (X * model.weights).array() + (model.base_score + model.bias);
  }
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), model.base_score);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double s = 0.0;
    for (const auto& t : model.trees) s += t.predict(X.row(i));
    out(i) += model.params.learning_rate * s;
  }
  return out;
}

Eigen::VectorXd gbm_predict(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const std::vector<std::string>& columns) {
  if (columns != model.feature_names) {
    std::string msg = "column mismatch; model expects [";
    for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
      msg += (i ? "," : "") + model.feature_names[i];
    }
    fail(ErrorKind::ColumnMismatch, msg + "]");
  }
  return gbm_predict(model, X);
}

nlohmann::json to_json(const GbmParams& p) {
  nlohmann::json j = {
      {"booster", std::string(to_string(p.booster))},
      {"n_estimators", p.n_estimators},
      {"learning_rate", p.learning_rate},
      {"reg_lambda", p.reg_lambda},
      {"reg_alpha", p.reg_alpha},
      {"gamma", p.gamma_split},
      {"max_depth", p.max_depth},
      {"min_child_weight", p.min_child_weight},
      {"random_state", p.random_state},
  };
  j["base_score"] = p.base_score ? nlohmann::json(*p.base_score) : nlohmann::json(nullptr);
  return j;
}

GbmParams gbm_params_from_json(const nlohmann::json& j, GbmParams p) {
  require(j.is_object(), ErrorKind::Config, "booster parameters must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "booster") {
      const auto s = v.get<std::string>();
      require(s == "gbtree" || s == "gblinear" || s == "tree" || s == "linear", ErrorKind::Config,
              "unknown booster '" + s + "'");
      p.booster = (s == "gbtree" || s == "tree") ? Booster::Tree : Booster::Linear;
    } else if (key == "n_estimators") {
      p.n_estimators = v.get<int>();
    } else if (key == "learning_rate") {
      p.learning_rate = v.get<double>();
    } else if (key == "reg_lambda") {
      p.reg_lambda = v.get<double>();
    } else if (key == "reg_alpha") {
      p.reg_alpha = v.get<double>();
    } else if (key == "gamma") {
      p.gamma_split = v.get<double>();
    } else if (key == "max_depth") {
      p.max_depth = v.get<int>();
    } else if (key == "min_child_weight") {
      p.min_child_weight = v.get<double>();
    } else if (key == "random_state") {
      p.random_state = v.get<std::uint64_t>();
    } else if (key == "base_score") {
      p.base_score = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    } else {
      fail(ErrorKind::Config, "unknown booster parameter '" + key + "'");
    }
  }
  p.validate();
  return p;
}

nlohmann::json to_json(const GbmModel& m) {
  nlohmann::json j;
  j["format"] = "irscreen.model";
  j["version"] = 1;
  j["kind"] = "gbm";
  j["params"] = to_json(m.params);
  j["feature_names"] = m.feature_names;
  j["base_score"] = m.base_score;
  if (m.params.booster == Booster::Tree) {
    auto& trees = j["trees"] = nlohmann::json::array();
    for (const auto& t : m.trees) {
      nlohmann::json jt;
      for (const auto& n : t.nodes) {
        jt["feature"].push_back(n.feature);
        jt["threshold"].push_back(n.threshold);
        jt["left"].push_back(n.left);
        jt["right"].push_back(n.right);
        jt["value"].push_back(n.value);
        jt["cover"].push_back(n.cover);
      }
      trees.push_back(std::move(jt));
    }
  } else {
    nlohmann::json w = nlohmann::json::object();
    for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
      w[m.feature_names[i]] = m.weights(static_cast<Eigen::Index>(i));
    }
    j["weights"] = std::move(w);
    j["bias"] = m.bias;
  }
  return j;
}

GbmModel gbm_from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "irscreen.model" && j.value("kind", "") == "gbm",
          ErrorKind::Parse, "not a serialized boosting model");
  require(j.value("version", 0) == 1, ErrorKind::Parse, "unsupported model version");
  GbmModel m;
  m.params = gbm_params_from_json(j.at("params"));
  m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  m.base_score = j.at("base_score").get<double>();
  if (m.params.booster == Booster::Tree) {
    for (const auto& jt : j.at("trees")) {
      RegressionTree t;
      const auto& f = jt.at("feature");
      for (std::size_t i = 0; i < f.size(); ++i) {
        TreeNode n;
        n.feature = f[i].get<int>();
        n.threshold = jt.at("threshold")[i].get<double>();
        n.left = jt.at("left")[i].get<int>();
        n.right = jt.at("right")[i].get<int>();
        n.value = jt.at("value")[i].get<double>();
        n.cover = jt.at("cover")[i].get<double>();
        t.nodes.push_back(n);
      }
      m.trees.push_back(std::move(t));
    }
  } else {
    m.weights.resize(m.n_features());
    for (std::size_t i = 0; i < m.feature_names.size(); ++i) {
      m.weights(static_cast<Eigen::Index>(i)) = j.at("weights").at(m.feature_names[i]).get<double>();
    }
    m.bias = j.at("bias").get<double>();
  }
  return m;
}

}  // namespace irscreen
