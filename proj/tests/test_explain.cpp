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


#include <doctest.h>

#include <random>

#include "irscreen/error.hpp"
#include "irscreen/explain.hpp"
#include "oracles.hpp"

using namespace irscreen;

TEST_CASE("a single stump attributes everything to its feature") {
  GbmModel m;
  m.feature_names = {"a", "b", "c"};
  m.base_score = 1.0;
  m.params.learning_rate = 0.5;
  RegressionTree t;
  t.nodes = {TreeNode{1, 0.0, 1, 2, 0.0, 10.0}, TreeNode{-1, 0, -1, -1, -2.0, 4.0},
             TreeNode{-1, 0, -1, -1, 3.0, 6.0}};
  m.trees = {t};
  const Eigen::Vector3d x(5.0, 1.0, -7.0);
  const auto sv = tree_shap_values(m, x);
  const double pred = gbm_predict(m, x.transpose())(0);
  CHECK(sv.base == doctest::Approx(1.0 + 0.5 * (0.4 * -2.0 + 0.6 * 3.0)));
  CHECK(sv.phi(1) == doctest::Approx(pred - sv.base));
  CHECK(sv.phi(0) == 0.0);
  CHECK(sv.phi(2) == 0.0);
  CHECK(tree_expected_value(t) == doctest::Approx(1.0));
}

TEST_CASE("tree SHAP local accuracy, coalition match and symmetry") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Eigen::MatrixXd X(80, 4);
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = z(rng);
    X(i, 3) = X(i, 0);  // duplicated column
    y(i) = X(i, 0) * X(i, 1) + std::abs(X(i, 2)) + 0.1 * z(rng);
  }
  GbmParams p;
  p.n_estimators = 25;
  p.max_depth = 3;
  const auto m = fit_tree_ensemble(X, y, p);
  for (int i = 0; i < 30; ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    const auto sv = tree_shap_values(m, x);
    CHECK(sv.reconstructed() == doctest::Approx(gbm_predict(m, x.transpose())(0)).epsilon(1e-12));
    CHECK((sv.phi - oracle::coalition_shapley(m, x)).cwiseAbs().maxCoeff() < 1e-10);
  }

  // Equal splits on two identical columns: both columns get the same share.
  GbmModel twin;
  twin.feature_names = {"a", "b"};
  twin.params.learning_rate = 1.0;
  RegressionTree ta, tb;
  ta.nodes = {TreeNode{0, 0.0, 1, 2, 0, 2}, TreeNode{-1, 0, -1, -1, -1, 1}, TreeNode{-1, 0, -1, -1, 1, 1}};
  tb.nodes = ta.nodes;
  tb.nodes[0].feature = 1;
  twin.trees = {ta, tb};
  const auto sv = tree_shap_values(twin, Eigen::Vector2d(0.5, 0.5));
  CHECK(sv.phi(0) == doctest::Approx(sv.phi(1)));
  CHECK(sv.phi(0) == doctest::Approx(1.0));
}

TEST_CASE("linear SHAP") {
  GbmModel m;
  m.params.booster = Booster::Linear;
  m.feature_names = {"a", "b", "c"};
  m.weights = Eigen::Vector3d(2.0, -1.0, 0.0);
  m.base_score = 0.5;
  const Eigen::Vector3d mu(1.0, 1.0, 1.0);
  const auto sv = linear_shap_values(m, Eigen::Vector3d(2.0, 4.0, 9.0), mu);
  CHECK(sv.phi(0) == 2.0);
  CHECK(sv.phi(1) == -3.0);
  CHECK(sv.phi(2) == 0.0);
  CHECK(sv.reconstructed() == doctest::Approx(gbm_predict(m, Eigen::RowVector3d(2.0, 4.0, 9.0))(0)));
  CHECK(linear_shap_values(m, mu, mu).phi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("importance ranking and sankey weights") {
  std::vector<ShapVector> shap(2);
  shap[0].phi = Eigen::Vector3d(1.0, -2.0, 0.5);
  shap[1].phi = Eigen::Vector3d(-1.0, 2.0, -0.5);
  const auto s = importance_summary({"b", "a", "c"}, shap);
  REQUIRE(s.ranking.size() == 3);
  CHECK(s.ranking[0].feature == "a");
  CHECK(s.ranking[1].feature == "b");
  CHECK(s.ranking[2].mean_abs_shap == 0.5);
  shap[0].phi(0) = 2.0;
  shap[1].phi(0) = 2.0;
  CHECK(importance_summary({"z", "a", "c"}, shap).ranking[0].feature == "a");  // tie goes by name
  double total = 0.0;
  for (const auto& t : sankey_triples("m", s)) total += t.at("weight").get<double>();
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("latent probe") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  Eigen::MatrixXd e(400, 3);
  std::vector<int> labels;
  for (int i = 0; i < 400; ++i) {
    for (int j = 0; j < 3; ++j) e(i, j) = z(rng);
    labels.push_back(e(i, 1) > 0.3 ? 1 : 0);
  }
  CHECK(probe_latent_space(e, labels) > 0.95);
  std::vector<int> shuffled = labels;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(std::abs(probe_latent_space(e, shuffled) - 0.5) < 0.1);
  CHECK(probe_latent_space(e, labels) == probe_latent_space(e, labels));
  CHECK_THROWS_AS(probe_latent_space(e, std::vector<int>(400, 1)), Error);
}
