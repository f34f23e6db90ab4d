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

// Desk-scale cohort generators. The calibrated generator samples person-level
// values through a Gaussian copula whose latent correlations are solved so the
// observed Pearson correlation with HOMA-IR hits each target. The functional
// generator draws independent features and sets HOMA-IR by a known formula.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "irscreen/domain.hpp"
#include "irscreen/ingestion.hpp"

namespace irscreen {

/// Truncated normal (or log-normal when `log_normal`) marginal described by
/// its median and standard deviation on the natural scale.
struct Marginal {
  double median = 0.0;
  double sd = 1.0;
  double lo = -1e300;
  double hi = 1e300;
  bool log_normal = false;

  /// Location / scale of the underlying normal (log scale for log-normal).
  double mu() const;
  double sigma() const;
  /// Maps a standard-normal draw to the marginal by quantile transform.
  double from_latent(double z) const;
};

struct PlantedViolations {
  int not_fasting = 0;
  int bmi_out_of_range = 0;
  int homa_outlier = 0;
  int insufficient_wearable_days = 0;
  int missing_required_fields = 0;

  int total() const {
    return not_fasting + bmi_out_of_range + homa_outlier + insufficient_wearable_days + missing_required_fields;
  }
};

struct CohortCalibration {
  std::map<std::string, Marginal> marginals;         // person-level variables
  std::map<std::string, double> homa_correlation;    // target Pearson r with HOMA-IR
  double cross_correlation = 0.1;                    // magnitude between targeted variables
  std::vector<double> class_proportions = {459.0, 406.0, 300.0};  // IS, ImpairedIS, IR
  double homa_max = 15.0;                            // HOMA-IR truncated below this
  int study_days = 120;
  double daily_jitter = 0.5;       // daily sd as a fraction of the between-person sd
  double missing_day_prob = 0.05;  // whole wearable day absent
  PlantedViolations violations;
  std::string start_date = "2024-01-01";

  static CohortCalibration defaults();
  /// HOMA-IR log-normal parameters matching the class proportions at the
  /// default 1.5 / 2.9 cut points.
  Marginal homa_marginal() const;
};

nlohmann::json to_json(const CohortCalibration& c);
CohortCalibration calibration_from_json(const nlohmann::json& j, CohortCalibration defaults = CohortCalibration::defaults());

/// Pearson correlation of two marginals whose latent normals correlate at rho,
/// by tensor Gauss-Hermite quadrature.
double implied_pearson(const Marginal& a, const Marginal& b, double rho, int nodes = 96);

/// Latent rho in (-1, 1) whose implied Pearson correlation equals target.
double solve_latent_rho(const Marginal& a, const Marginal& b, double target);

/// Nodes and weights for E[f(Z)], Z ~ N(0, 1) (probabilists' Hermite).
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_normal(int n);

/// Clip eigenvalues at `floor` and rescale to unit diagonal.
Eigen::MatrixXd nearest_correlation_psd(const Eigen::MatrixXd& m, double floor = 1e-6);

struct CalibrationReport {
  std::vector<std::string> variables;   // latent order, "homa_ir" first
  Eigen::MatrixXd latent_correlation;   // after repair
  std::map<std::string, double> latent_rho;
  std::map<std::string, double> target_r;
  std::map<std::string, double> implied_r;  // after repair
};

nlohmann::json to_json(const CalibrationReport& r);

struct GeneratedCohort {
  std::vector<ParticipantRecord> records;  // sorted by id
  std::map<std::string, double> person_level_homa;  // planted HOMA-IR per id
  std::map<std::string, ExclusionReason> planted;   // violations by id
};

struct CalibratedCohort : GeneratedCohort {
  CalibrationReport calibration;
};

CalibratedCohort generate_synthetic_cohort(int n, const CohortCalibration& calibration, std::uint64_t seed);

struct FunctionalSpec {
  double scale = 2.5;  // HOMA-IR = scale * exp(sum_k beta_k z_k) + noise
  std::map<std::string, double> coefficients;  // on z = (value - median) / sd
  double noise_sigma = 0.3;
  int study_days = 120;
  double daily_jitter = 0.5;
  double missing_day_prob = 0.05;
  std::string start_date = "2024-01-01";
  /// Wearable means used as-is every day (no jitter) when set.
  bool constant_wearables = false;

  static FunctionalSpec defaults();
  /// Deterministic part of HOMA-IR for person-level values.
  double g(const std::map<std::string, double>& values,
           const std::map<std::string, Marginal>& marginals) const;
};

struct FunctionalCohort : GeneratedCohort {
  double ideal_r2 = 0.0;  // 1 - sigma^2 / Var(y), on the generated sample
};

FunctionalCohort generate_functional_cohort(int n, const FunctionalSpec& spec, std::uint64_t seed);

/// Writes participants.csv, wearables.csv and labs.csv into `dir`.
CohortFiles write_cohort_csv(const std::vector<ParticipantRecord>& records, const std::filesystem::path& dir);

}  // namespace irscreen
