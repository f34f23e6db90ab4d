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

#include "irscreen/explain.hpp"

#include <algorithm>
#include <cmath>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"
#include "irscreen/folds.hpp"
#include "irscreen/metrics.hpp"

namespace irscreen {

namespace {

// Polynomial-time TreeSHAP over the decision path. Each path element holds
// the fraction of "zero" (feature unknown) and "one" (feature known) flow and
// the permutation weight of subsets of the given size.
struct PathElement {
  int feature = -1;
  double zero_fraction = 0.0;
  double one_fraction = 0.0;
  double pweight = 0.0;
};

using Path = std::vector<PathElement>;

void extend_path(Path& path, int depth, double zero_fraction, double one_fraction, int feature) {
  auto& el = path[static_cast<std::size_t>(depth)];
  el = {feature, zero_fraction, one_fraction, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    auto& cur = path[static_cast<std::size_t>(i)];
    path[static_cast<std::size_t>(i + 1)].pweight += one_fraction * cur.pweight * (i + 1) / (depth + 1.0);
    cur.pweight = zero_fraction * cur.pweight * (depth - i) / (depth + 1.0);
  }
}

void unwind_path(Path& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].pweight;
  for (int i = depth - 1; i >= 0; --i) {
    auto& cur = path[static_cast<std::size_t>(i)];
    if (one != 0.0) {
      const double tmp = cur.pweight;
      cur.pweight = next * (depth + 1.0) / ((i + 1.0) * one);
      next = tmp - cur.pweight * zero * (depth - i) / (depth + 1.0);
    } else {
      cur.pweight = cur.pweight * (depth + 1.0) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    auto& dst = path[static_cast<std::size_t>(i)];
    const auto& src = path[static_cast<std::size_t>(i + 1)];
    dst.feature = src.feature;
    dst.zero_fraction = src.zero_fraction;
    dst.one_fraction = src.one_fraction;
  }
}

double unwound_path_sum(const Path& path, int depth, int index) {
  const double one = path[static_cast<std::size_t>(index)].one_fraction;
  const double zero = path[static_cast<std::size_t>(index)].zero_fraction;
  double next = path[static_cast<std::size_t>(depth)].pweight;
  double total = 0.0;
  for (int i = depth - 1; i >= 0; --i) {
    const double pw = path[static_cast<std::size_t>(i)].pweight;
    if (one != 0.0) {
      const double tmp = next * (depth + 1.0) / ((i + 1.0) * one);
      total += tmp;
      next = pw - tmp * zero * (depth - i) / (depth + 1.0);
    } else if (zero != 0.0) {
      total += pw / zero / ((depth - i) / (depth + 1.0));
    }
  }
  return total;
}

void tree_shap_recurse(const RegressionTree& tree, const Eigen::Ref<const Eigen::VectorXd>& x,
                       Eigen::Ref<Eigen::VectorXd> phi, int node, Path path, int depth,
                       double parent_zero, double parent_one, int parent_feature) {
  extend_path(path, depth, parent_zero, parent_one, parent_feature);
  const auto& n = tree.nodes[static_cast<std::size_t>(node)];
  if (n.is_leaf()) {
    for (int i = 1; i <= depth; ++i) {
      const auto& el = path[static_cast<std::size_t>(i)];
      const double w = unwound_path_sum(path, depth, i);
      phi(el.feature) += w * (el.one_fraction - el.zero_fraction) * n.value;
    }
    return;
  }
  const int hot = x(n.feature) < n.threshold ? n.left : n.right;
  const int cold = hot == n.left ? n.right : n.left;
  const double hot_zero = tree.nodes[static_cast<std::size_t>(hot)].cover / n.cover;
  const double cold_zero = tree.nodes[static_cast<std::size_t>(cold)].cover / n.cover;

  double incoming_zero = 1.0, incoming_one = 1.0;
  for (int k = 1; k <= depth; ++k) {
    if (path[static_cast<std::size_t>(k)].feature == n.feature) {
      incoming_zero = path[static_cast<std::size_t>(k)].zero_fraction;
      incoming_one = path[static_cast<std::size_t>(k)].one_fraction;
      unwind_path(path, depth, k);
      --depth;
      break;
    }
  }
  tree_shap_recurse(tree, x, phi, hot, path, depth + 1, hot_zero * incoming_zero, incoming_one, n.feature);
  tree_shap_recurse(tree, x, phi, cold, path, depth + 1, cold_zero * incoming_zero, 0.0, n.feature);
}

}  // namespace

double tree_expected_value(const RegressionTree& tree) {
  double weighted = 0.0;
  for (const auto& n : tree.nodes) {
    if (n.is_leaf()) weighted += n.cover * n.value;
  }
  return weighted / tree.nodes.front().cover;
}

double tree_shap_accumulate(const RegressionTree& tree, const Eigen::Ref<const Eigen::VectorXd>& x,
                            Eigen::Ref<Eigen::VectorXd> phi) {
  require(!tree.nodes.empty() && tree.nodes.front().cover > 0.0, ErrorKind::InvalidArgument,
          "tree has no cover information");
  const int max_depth = tree.depth();
  Path path(static_cast<std::size_t>(max_depth + 2));
  tree_shap_recurse(tree, x, phi, 0, path, 0, 1.0, 1.0, -1);
  return tree_expected_value(tree);
}

ShapVector tree_shap_values(const GbmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(model.params.booster == Booster::Tree, ErrorKind::InvalidArgument,
          "tree SHAP needs a tree booster");
  require(x.size() == model.n_features(), ErrorKind::ColumnMismatch,
          "row has " + std::to_string(x.size()) + " features, model expects " +
              std::to_string(model.n_features()));
  ShapVector s;
  s.phi = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd tree_phi(x.size());
  double expected = 0.0, pred = 0.0;
  for (const auto& t : model.trees) {
    tree_phi.setZero();
    expected += tree_shap_accumulate(t, x, tree_phi);
    s.phi += tree_phi;
    pred += t.predict(x);
  }
  const double eta = model.params.learning_rate;
  s.phi *= eta;
  s.base = model.base_score + eta * expected;
  s.prediction = model.base_score + eta * pred;
  return s;
}

ShapVector linear_shap_values(const GbmModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                              const Eigen::Ref<const Eigen::VectorXd>& background_mean) {
  require(model.params.booster == Booster::Linear, ErrorKind::InvalidArgument,
          "linear SHAP needs a linear booster");
  require(x.size() == model.n_features() && background_mean.size() == model.n_features(),
          ErrorKind::ColumnMismatch, "row width does not match the model");
  ShapVector s;
  s.phi = model.weights.cwiseProduct(x - background_mean);
  s.base = model.base_score + model.bias + model.weights.dot(background_mean);
  s.prediction = model.base_score + model.bias + model.weights.dot(x);
  return s;
}

std::vector<ShapVector> shap_matrix(const GbmModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X,
                                    const Eigen::Ref<const Eigen::MatrixXd>& background) {
  std::vector<ShapVector> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  if (model.params.booster == Booster::Tree) {
    for (Eigen::Index r = 0; r < X.rows(); ++r) out.push_back(tree_shap_values(model, X.row(r).transpose()));
  } else {
    require(background.rows() > 0, ErrorKind::InvalidArgument, "linear SHAP needs a background set");
    const Eigen::VectorXd mu = background.colwise().mean().transpose();
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
      out.push_back(linear_shap_values(model, X.row(r).transpose(), mu));
    }
  }
  return out;
}

ImportanceSummary importance_summary(const std::vector<std::string>& features,
                                     const std::vector<ShapVector>& shap) {
  ImportanceSummary s;
  for (std::size_t j = 0; j < features.size(); ++j) {
    double total = 0.0;
    for (const auto& v : shap) total += std::abs(v.phi(static_cast<Eigen::Index>(j)));
    s.ranking.push_back({features[j], shap.empty() ? 0.0 : total / static_cast<double>(shap.size())});
  }
  std::sort(s.ranking.begin(), s.ranking.end(), [](const auto& a, const auto& b) {
    if (a.mean_abs_shap != b.mean_abs_shap) return a.mean_abs_shap > b.mean_abs_shap;
    return a.feature < b.feature;
  });
  return s;
}

Eigen::VectorXd fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<int>& y,
                             double l2, int max_iter) {
  const Eigen::Index n = X.rows(), d = X.cols();
  require(static_cast<Eigen::Index>(y.size()) == n, ErrorKind::InvalidArgument, "label length mismatch");
  Eigen::MatrixXd A(n, d + 1);
  A.col(0).setOnes();
  A.rightCols(d) = X;
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) t(i) = y[static_cast<std::size_t>(i)];
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d + 1);
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, l2);
  penalty(0) = 1e-8;  // intercept effectively unpenalized
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd eta = A * beta;
    const Eigen::VectorXd p = (1.0 / (1.0 + (-eta.array()).exp())).matrix();
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).max(1e-10).matrix();
    const Eigen::VectorXd grad = A.transpose() * (p - t) + penalty.cwiseProduct(beta);
    Eigen::MatrixXd H = A.transpose() * w.asDiagonal() * A;
    H.diagonal() += penalty;
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    beta -= step;
    if (step.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  return beta;
}

double probe_latent_space(const Eigen::Ref<const Eigen::MatrixXd>& embeddings,
                          const std::vector<int>& labels, const ProbeConfig& cfg) {
  const auto n = static_cast<std::size_t>(embeddings.rows());
  require(labels.size() == n, ErrorKind::InvalidArgument, "label length mismatch");
  const long pos = std::count(labels.begin(), labels.end(), 1);
  require(pos > 0 && pos < static_cast<long>(n), ErrorKind::InvalidArgument,
          "probe labels must contain both classes");
  const auto folds = make_folds(n, cfg.folds, cfg.seed, std::span<const int>(labels));
  double auc_sum = 0.0;
  int used = 0;
  for (int f = 0; f < cfg.folds; ++f) {
    const auto tr = folds.train_rows(f), te = folds.test_rows(f);
    Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(tr.size()), embeddings.cols());
    std::vector<int> ytr, yte;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      Xtr.row(static_cast<Eigen::Index>(i)) = embeddings.row(static_cast<Eigen::Index>(tr[i]));
      ytr.push_back(labels[tr[i]]);
    }
    for (auto i : te) yte.push_back(labels[i]);
    const long tr_pos = std::count(ytr.begin(), ytr.end(), 1);
    const long te_pos = std::count(yte.begin(), yte.end(), 1);
    if (tr_pos == 0 || tr_pos == static_cast<long>(ytr.size()) || te_pos == 0 ||
        te_pos == static_cast<long>(yte.size())) {
      continue;
    }
    // Standardize on the training split only.
    const Eigen::RowVectorXd mu = Xtr.colwise().mean();
    Eigen::RowVectorXd sd = ((Xtr.rowwise() - mu).array().square().colwise().mean()).sqrt().matrix();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      if (sd(j) <= 0.0) sd(j) = 1.0;
    }
    const Eigen::MatrixXd Ztr = (Xtr.rowwise() - mu).array().rowwise() / sd.array();
    const Eigen::VectorXd beta = fit_logistic(Ztr, ytr, cfg.l2, cfg.max_iter);
    std::vector<double> scores;
    for (auto i : te) {
      const Eigen::RowVectorXd z =
          (embeddings.row(static_cast<Eigen::Index>(i)) - mu).array() / sd.array();
      scores.push_back(beta(0) + z.dot(beta.tail(beta.size() - 1)));
    }
    auc_sum += ranking_curves(scores, yte).auroc;
    ++used;
  }
  require(used > 0, ErrorKind::InvalidArgument, "no probe fold had both classes");
  return auc_sum / used;
}

void write_shap_csv(std::ostream& out, const std::vector<std::string>& ids,
                    const std::vector<std::string>& features, const std::vector<ShapVector>& shap) {
  require(ids.size() == shap.size(), ErrorKind::InvalidArgument, "one id per SHAP row");
  std::vector<std::string> header{"id"};
  header.insert(header.end(), features.begin(), features.end());
  header.push_back("base_value");
  header.push_back("prediction");
  csv::write_row(out, header);
  for (std::size_t i = 0; i < shap.size(); ++i) {
    std::vector<std::string> row{ids[i]};
    for (Eigen::Index j = 0; j < shap[i].phi.size(); ++j) row.push_back(csv::format_number(shap[i].phi(j)));
    row.push_back(csv::format_number(shap[i].base));
    row.push_back(csv::format_number(shap[i].prediction));
    csv::write_row(out, row);
  }
}

void write_importance_csv(std::ostream& out, const ImportanceSummary& s) {
  csv::write_row(out, {"rank", "feature", "mean_abs_shap"});
  for (std::size_t i = 0; i < s.ranking.size(); ++i) {
    csv::write_row(out, {std::to_string(i + 1), s.ranking[i].feature,
                         csv::format_number(s.ranking[i].mean_abs_shap)});
  }
}

nlohmann::json sankey_triples(const std::string& model, const ImportanceSummary& s) {
  double total = 0.0;
  for (const auto& e : s.ranking) total += e.mean_abs_shap;
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : s.ranking) {
    out.push_back({{"model", model},
                   {"feature", e.feature},
                   {"weight", total > 0.0 ? e.mean_abs_shap / total : 0.0}});
  }
  return out;
}

}  // namespace irscreen
