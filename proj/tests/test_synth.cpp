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

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "irscreen/pipeline.hpp"
#include "irscreen/stats.hpp"
#include "irscreen/synthcohort.hpp"

using namespace irscreen;

namespace {

std::vector<double> homa_of(const std::vector<ParticipantRecord>& rs) {
  std::vector<double> out;
  for (const auto& r : rs) out.push_back(homa_ir_of(r)->value);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("calibrated cohort") {
  const auto c = generate_synthetic_cohort(5000, CohortCalibration::defaults(), 7);
  std::vector<double> glucose, homa;
  for (const auto& r : c.records) {
    if (!homa_ir_of(r)) continue;
    glucose.push_back(*r.labs->fasting_glucose);
    homa.push_back(homa_ir_of(r)->value);
  }
  CHECK(std::abs(*pearson(glucose, homa).r - 0.57) <= 0.05);
  // back-solved insulin reproduces the planted HOMA-IR
  for (const auto& r : c.records) {
    if (!homa_ir_of(r) || c.planted.count(r.id)) continue;
    CHECK(homa_ir_of(r)->value == doctest::Approx(c.person_level_homa.at(r.id)).epsilon(1e-9));
  }
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c.calibration.latent_correlation).eigenvalues();
  CHECK(ev.minCoeff() > 0.0);
}

TEST_CASE("zeroed correlation targets give independent variables") {
  auto cal = CohortCalibration::defaults();
  for (auto& [name, r] : cal.homa_correlation) r = 0.0;
  cal.cross_correlation = 0.0;
  const auto c = generate_synthetic_cohort(5000, cal, 8);
  std::vector<double> glucose, bmi, homa;
  for (const auto& r : c.records) {
    if (!homa_ir_of(r) || !resolve_bmi(r.demographics).bmi) continue;
    glucose.push_back(*r.labs->fasting_glucose);
    bmi.push_back(*resolve_bmi(r.demographics).bmi);
    homa.push_back(homa_ir_of(r)->value);
  }
  CHECK(std::abs(*pearson(glucose, homa).r) < 0.05);
  CHECK(std::abs(*pearson(bmi, homa).r) < 0.05);
}

TEST_CASE("same seed writes identical files") {
  fixture::TempDir a("synth_a"), b("synth_b");
  const auto c1 = generate_synthetic_cohort(200, CohortCalibration::defaults(), 3);
  const auto c2 = generate_synthetic_cohort(200, CohortCalibration::defaults(), 3);
  write_cohort_csv(c1.records, a.path);
  write_cohort_csv(c2.records, b.path);
  for (const char* f : {"participants.csv", "wearables.csv", "labs.csv"}) CHECK(slurp(a.path / f) == slurp(b.path / f));
  const auto reloaded = load_cohort(CohortFiles::in_directory(a.path));
  CHECK(reloaded.size() == c1.records.size());
  CHECK(homa_of(reloaded) == homa_of(c1.records));
}

TEST_CASE("noiseless functional cohort is recoverable") {
  auto fs = FunctionalSpec::defaults();
  fs.noise_sigma = 0.0;
  fs.daily_jitter = 0.0;
  // trees approximate the smooth target piecewise, so recovery is sample-limited:
  // about 0.92 at n = 1000, above 0.95 from n = 3000
  const auto c = generate_functional_cohort(3000, fs, 4);
  CHECK(c.ideal_r2 == 1.0);
  ExperimentSpec s;
  // the lipid and metabolic panels carry every variable of the generating function
  s.feature_set = feature_set_by_name("Wearables + Demographics + Lipid Panel + Metabolic Panel");
  s.tree_params.n_estimators = 400;
  s.tree_params.max_depth = 3;
  const auto r = run_experiment(c.records, s);
  CHECK(*r.report.pooled.regression.r2 >= 0.95);
}

TEST_CASE("noise floor bounds skill and glucose adds information") {
  // find the noise level whose ideal R2 is about 0.6
  auto fs = FunctionalSpec::defaults();
  double lo = 0.0, hi = 5.0;
  for (int it = 0; it < 30; ++it) {
    fs.noise_sigma = 0.5 * (lo + hi);
    (generate_functional_cohort(1000, fs, 5).ideal_r2 > 0.6 ? lo : hi) = fs.noise_sigma;
  }
  const auto c = generate_functional_cohort(1000, fs, 5);
  CHECK(c.ideal_r2 == doctest::Approx(0.6).epsilon(0.01));
  ExperimentSpec s;
  s.feature_set = feature_set_by_name("Wearables + Demographics + Glucose");
  CHECK(*run_experiment(c.records, s).report.pooled.regression.r2 <= c.ideal_r2 + 0.02);

  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto cohort = generate_functional_cohort(500, FunctionalSpec::defaults(), seed);
    ExperimentSpec without = s, with = s;
    without.feature_set = feature_set_by_name("Wearables + Demographics");
    CHECK(*run_experiment(cohort.records, without).report.pooled.regression.r2 <
          *run_experiment(cohort.records, with).report.pooled.regression.r2);
  }
}
