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

#include "fixtures.hpp"
#include "irscreen/error.hpp"
#include "irscreen/featureset.hpp"

using namespace irscreen;

namespace {

std::vector<WearableDaily> steps_days(std::vector<std::optional<double>> steps) {
  std::vector<WearableDaily> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    WearableDaily d;
    d.date = fixture::day(static_cast<int>(i));
    d.steps = steps[i];
    d.rhr = 60.0;
    out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("window aggregation") {
  const AggregationWindow w{7, fixture::day(7)};
  const auto s = aggregate_wearables_window(steps_days({1000.0, 2000.0, 3000.0}), w, {"steps"});
  CHECK(s.at("steps_mean") == doctest::Approx(2000.0));
  CHECK(s.at("steps_median") == doctest::Approx(2000.0));
  CHECK(s.at("steps_std") == doctest::Approx(816.496580927726));

  const auto one = aggregate_wearables_window(steps_days({5.0}), w, {"rhr"});
  CHECK(one.at("rhr_mean") == 60.0);
  CHECK(one.at("rhr_median") == 60.0);
  CHECK(one.at("rhr_std") == 0.0);

  CHECK_THROWS_AS(aggregate_wearables_window(steps_days({std::nullopt, std::nullopt}), w, {"steps"}), Error);
  // days on or after the anchor are outside the window
  const auto late = aggregate_wearables_window(steps_days({1.0, 2.0, 3.0}), AggregationWindow{7, fixture::day(2)},
                                               {"steps"});
  CHECK(late.at("steps_mean") == doctest::Approx(1.5));
  CHECK_THROWS_AS((AggregationWindow{5, fixture::day(0)}.validate()), Error);
}

TEST_CASE("design matrix columns") {
  std::vector<ParticipantRecord> rs = {fixture::record("a", 25.0, 10.0, 90.0),
                                      fixture::record("b", 30.0, 12.0, 100.0)};
  const auto demo = build_design_matrix(rs, feature_set_by_name("Demographics"), 30);
  CHECK(demo.columns == std::vector<std::string>{"age", "bmi"});
  CHECK(demo.rows() == 2);
  CHECK(demo.y(1) == doctest::Approx(12.0 * 100.0 / 405.0));

  const auto wear = build_design_matrix(rs, FeatureSetSpec("w", {Panel::Wearables}), 30);
  CHECK(wear.columns.size() == 12);
  for (const auto& c : wear.columns) CHECK(c.find("insulin") == std::string::npos);
  CHECK(wear.X.allFinite());

  rs[1].labs->ldl.reset();
  const auto lipid = build_design_matrix(rs, FeatureSetSpec("l", {Panel::LipidPanel}), 30);
  CHECK(lipid.ids == std::vector<std::string>{"a"});

  rs[0].labs->ldl.reset();
  CHECK_THROWS_AS(build_design_matrix(rs, FeatureSetSpec("l", {Panel::LipidPanel}), 30), Error);
}

TEST_CASE("glucose appears once when two panels carry it") {
  const auto cols = feature_set_by_name("Wearables + Demographics + Lipid Panel + Metabolic Panel").columns();
  CHECK(std::count(cols.begin(), cols.end(), "glucose") == 1);
  CHECK(feature_set_registry().size() == 9);
}

TEST_CASE("standardizer") {
  Eigen::MatrixXd train(3, 2);
  train << 1, 5, 2, 5, 3, 5;
  const auto p = fit_standardizer(train, {"x", "const"});
  CHECK(p.output_columns() == std::vector<std::string>{"x"});
  CHECK(p.dropped == std::vector<std::string>{"const"});
  CHECK(p.mean(0) == doctest::Approx(2.0));
  CHECK(p.scale(0) == doctest::Approx(0.816496580927726));
  Eigen::MatrixXd held(2, 2);
  held << 2, 5, 4, 5;
  const auto z = apply_standardizer(p, held);
  CHECK(z(0, 0) == doctest::Approx(0.0));
  CHECK(z(1, 0) == doctest::Approx(2.0 / std::sqrt(2.0 / 3.0)));
  CHECK(z(1, 0) == doctest::Approx(2.449489742783178));
}

TEST_CASE("standardized training columns have zero mean and unit variance") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(3.0, 7.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::MatrixXd X(20, 4);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
    const auto p = fit_standardizer(X, {"a", "b", "c", "d"});
    const Eigen::MatrixXd z = apply_standardizer(p, X);
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      CHECK(std::abs(z.col(j).mean()) < 1e-12);
      CHECK((z.col(j).array().square().mean()) == doctest::Approx(1.0));
    }
  }
}
