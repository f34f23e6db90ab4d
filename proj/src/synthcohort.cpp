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

#include "irscreen/synthcohort.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"
#include "irscreen/random.hpp"
#include "irscreen/stats.hpp"

namespace irscreen {

double Marginal::mu() const { return log_normal ? std::log(median) : median; }

double Marginal::sigma() const {
  if (!log_normal) return sd;
  const double q = (sd / median) * (sd / median);
  return std::sqrt(std::log((1.0 + std::sqrt(1.0 + 4.0 * q)) / 2.0));
}

double Marginal::from_latent(double z) const {
  const double m = mu(), s = sigma();
  auto to_scale = [&](double v) {
    if (!log_normal) return v;
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  };
  const double a = normal_cdf((to_scale(lo) - m) / s);
  const double b = normal_cdf((to_scale(hi) - m) / s);
  double u = a + normal_cdf(z) * (b - a);
  u = std::clamp(u, std::max(a, 1e-15), std::min(b, 1.0 - 1e-15));
  const double x = m + s * normal_quantile(u);
  const double v = log_normal ? std::exp(x) : x;
  return std::clamp(v, lo, hi);
}

namespace {

Marginal normal(double median, double sd, double lo, double hi) { return {median, sd, lo, hi, false}; }

// Class-conditional counts (IS, ImpairedIS, IR) for binary conditions.
const std::map<std::string, std::array<double, 3>>& comorbidity_counts() {
  static const std::map<std::string, std::array<double, 3>> m = {
      {"cvd", {2, 21, 14}},          {"hyperlipidemia", {43, 125, 79}},
      {"diabetes", {2, 16, 46}},     {"respiratory", {29, 67, 58}},
      {"kidney_disease", {5, 12, 6}}};
  return m;
}

constexpr std::array<double, 3> kHypertensionCounts = {32, 101, 113};

const std::vector<std::pair<std::string, double>>& gender_counts() {
  static const std::vector<std::pair<std::string, double>> g = {
      {"Female", 636}, {"Male", 505}, {"Other", 21}, {"Not reported", 3}};
  return g;
}

const std::vector<std::pair<std::string, double>>& ethnicity_counts() {
  static const std::vector<std::pair<std::string, double>> e = {
      {"White", 905},           {"Hispanic", 67},     {"Asian Indian", 54},
      {"Asian Eastern", 31},    {"African American", 46}, {"Native American", 4},
      {"Mixed", 38},            {"Not reported", 20}};
  return e;
}

const std::set<std::string>& wearable_variables() {
  static const std::set<std::string> s = {"rhr", "hrv_rmssd", "steps", "sleep_minutes"};
  return s;
}

const std::set<std::string>& lab_variables() {
  static const std::set<std::string> s = {"glucose", "hba1c", "hdl", "ldl", "triglycerides"};
  return s;
}

std::string pick(const std::vector<std::pair<std::string, double>>& counts, std::mt19937_64& rng) {
  double total = 0.0;
  for (const auto& [_, c] : counts) total += c;
  double u = uniform01(rng) * total;
  for (const auto& [name, c] : counts) {
    if (u < c) return name;
    u -= c;
  }
  return counts.back().first;
}

std::string participant_id(int i, int n) {
  const int width = std::max(5, static_cast<int>(std::to_string(n).size()));
  std::string digits = std::to_string(i + 1);
  return "P" + std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

struct DailyPlan {
  Date start{};
  int study_days = 120;
  double jitter = 0.5;
  double missing_prob = 0.05;
  bool constant = false;
};

// Turns person-level values into a full participant record.
ParticipantRecord materialize(const std::string& id, const std::map<std::string, double>& v, double homa,
                              const std::map<std::string, Marginal>& marginals, const DailyPlan& plan,
                              std::mt19937_64& rng) {
  ParticipantRecord r;
  r.id = id;
  const auto cls = static_cast<std::size_t>(classify_ir(HomaIr{homa}));
  auto& d = r.demographics;
  d.age = std::round(v.at("age"));
  const double height = std::clamp(1.70 + 0.09 * standard_normal(rng), 1.45, 2.05);
  d.height_m = std::round(height * 1000.0) / 1000.0;
  d.bmi = v.at("bmi");
  d.weight_kg = *d.bmi * *d.height_m * *d.height_m;
  d.gender = pick(gender_counts(), rng);
  d.ethnicity = pick(ethnicity_counts(), rng);
  const std::array<double, 3> class_n = {459, 406, 300};
  d.hypertension = uniform01(rng) < kHypertensionCounts[cls] / class_n[cls];
  for (const auto& [name, counts] : comorbidity_counts()) d.comorbidities[name] = uniform01(rng) < counts[cls] / class_n[cls];

  BloodPanel labs;
  labs.fasting_glucose = v.at("glucose");
  labs.fasting_insulin = homa * 405.0 / v.at("glucose");
  labs.hba1c = v.at("hba1c");
  labs.hdl = v.at("hdl");
  labs.ldl = v.at("ldl");
  labs.triglycerides = v.at("triglycerides");
  labs.total_cholesterol = *labs.ldl + *labs.hdl + *labs.triglycerides / 5.0;
  for (const auto& [name, value] : v) {
    if (!lab_variables().count(name) && !wearable_variables().count(name) && name != "age" && name != "bmi") {
      labs.metabolic_panel[name] = value;
    }
  }
  labs.fasting_flag = true;
  labs.draw_date = plan.start + std::chrono::days{plan.study_days};
  r.labs = labs;

  auto daily = [&](const std::string& metric, double lo, double hi) {
    if (plan.constant) return v.at(metric);
    return std::clamp(v.at(metric) + plan.jitter * marginals.at(metric).sd * standard_normal(rng), lo, hi);
  };
  // Skewed, positive signals get mean-preserving multiplicative noise.
  auto daily_positive = [&](const std::string& metric) {
    if (plan.constant) return v.at(metric);
    const auto& m = marginals.at(metric);
    const double s = plan.jitter * m.sd / m.median;
    return v.at(metric) * std::exp(s * standard_normal(rng) - 0.5 * s * s);
  };
  for (int day = 0; day < plan.study_days; ++day) {
    const bool missing = uniform01(rng) < plan.missing_prob;
    WearableDaily w;
    w.date = plan.start + std::chrono::days{day};
    w.rhr = daily("rhr", 35.0, 180.0);
    w.hrv_rmssd = daily_positive("hrv_rmssd");
    w.steps = std::round(daily_positive("steps"));
    w.sleep_minutes = daily("sleep_minutes", 60.0, 1000.0);
    if (!missing || plan.constant) r.days.push_back(std::move(w));
  }
  return r;
}

void plant_violations(GeneratedCohort& cohort, const PlantedViolations& pv, std::mt19937_64& rng) {
  const auto n = cohort.records.size();
  require(static_cast<std::size_t>(pv.total()) <= n, ErrorKind::InvalidArgument,
          "more planted violations than participants");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  shuffle_in_place(order, rng);
  std::size_t next = 0;
  auto take = [&](int count, ExclusionReason reason, auto mutate) {
    for (int k = 0; k < count; ++k) {
      auto& r = cohort.records[order[next++]];
      mutate(r);
      cohort.planted[r.id] = reason;
    }
  };
  take(pv.not_fasting, ExclusionReason::NotFasting, [](ParticipantRecord& r) { r.labs->fasting_flag = false; });
  take(pv.bmi_out_of_range, ExclusionReason::BmiOutOfRange, [](ParticipantRecord& r) {
    r.demographics.bmi = 70.0;
    r.demographics.weight_kg = 70.0 * *r.demographics.height_m * *r.demographics.height_m;
  });
  take(pv.homa_outlier, ExclusionReason::HomaOutlier, [&](ParticipantRecord& r) {
    r.labs->fasting_insulin = 16.0 * 405.0 / *r.labs->fasting_glucose;
    cohort.person_level_homa[r.id] = 16.0;
  });
  take(pv.insufficient_wearable_days, ExclusionReason::InsufficientWearableDays, [](ParticipantRecord& r) {
    if (r.days.size() > 10) r.days.erase(r.days.begin(), r.days.end() - 10);
  });
  take(pv.missing_required_fields, ExclusionReason::MissingRequiredFields,
       [](ParticipantRecord& r) { r.demographics.age.reset(); });
}

}  // namespace

CohortCalibration CohortCalibration::defaults() {
  CohortCalibration c;
  c.marginals = {
      {"age", normal(45.0, 12.5, 18.0, 90.0)},
      {"bmi", normal(28.0, 6.7, 15.0, 60.0)},
      {"rhr", normal(66.0, 8.2, 40.0, 110.0)},
      {"sleep_minutes", normal(459.0, 66.0, 180.0, 720.0)},
      {"steps", normal(6909.0, 3752.6, 300.0, 30000.0)},
      {"hrv_rmssd", normal(27.1, 16.5, 5.0, 150.0)},
      {"hba1c", normal(5.4, 0.5, 4.0, 10.0)},
      {"glucose", normal(90.0, 13.2, 60.0, 250.0)},
      {"hdl", normal(56.0, 15.4, 20.0, 120.0)},
      {"ldl", normal(105.0, 34.2, 30.0, 250.0)},
      {"triglycerides", Marginal{89.0, 61.8, 20.0, 1000.0, true}},
      // Routine metabolic panel, not profiled in the cohort table.
      {"albumin_globulin_ratio", normal(1.8, 0.3, 0.8, 3.0)},
      {"creatinine", normal(0.9, 0.2, 0.4, 2.0)},
      {"egfr", normal(95.0, 15.0, 30.0, 150.0)},
      {"bun", normal(14.0, 4.0, 4.0, 40.0)},
      {"sodium", normal(140.0, 2.5, 130.0, 150.0)},
      {"potassium", normal(4.3, 0.35, 3.2, 5.5)},
      {"chloride", normal(102.0, 2.5, 94.0, 110.0)},
      {"crp", Marginal{1.5, 2.0, 0.1, 30.0, true}},
  };
  c.homa_correlation = {{"glucose", 0.57}, {"bmi", 0.43}, {"hba1c", 0.45}, {"triglycerides", 0.40},
                        {"rhr", 0.27},     {"hdl", -0.30}, {"steps", -0.25}, {"hrv_rmssd", -0.14}};
  return c;
}

Marginal CohortCalibration::homa_marginal() const {
  require(class_proportions.size() == 3, ErrorKind::Config, "class_proportions needs three entries");
  const double total = class_proportions[0] + class_proportions[1] + class_proportions[2];
  const double z1 = normal_quantile(class_proportions[0] / total);
  const double z2 = normal_quantile((class_proportions[0] + class_proportions[1]) / total);
  const IrThresholds t;
  const double sigma = (std::log(t.ir_lower) - std::log(t.is_upper)) / (z2 - z1);
  const double mu = std::log(t.is_upper) - sigma * z1;
  Marginal m;
  m.log_normal = true;
  m.median = std::exp(mu);
  m.sd = std::sqrt(std::expm1(sigma * sigma)) * std::exp(mu + sigma * sigma / 2.0);
  m.lo = 0.05;
  m.hi = std::nextafter(homa_max, 0.0);
  return m;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_hermite_normal(int n) {
  require(n >= 2, ErrorKind::InvalidArgument, "quadrature needs at least two nodes");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Eigen::VectorXd w = es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w / w.sum()};
}

double implied_pearson(const Marginal& a, const Marginal& b, double rho, int nodes) {
  const auto [x, w] = gauss_hermite_normal(nodes);
  const Eigen::Index n = x.size();
  Eigen::VectorXd ta(n), tb(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ta(i) = a.from_latent(x(i));
    tb(i) = b.from_latent(x(i));
  }
  const double ma = w.dot(ta), mb = w.dot(tb);
  const double va = w.dot((ta.array() - ma).square().matrix());
  const double vb = w.dot((tb.array() - mb).square().matrix());
  const double c = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double inner = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) inner += w(j) * (b.from_latent(rho * x(i) + c * x(j)) - mb);
    cross += w(i) * (ta(i) - ma) * inner;
  }
  return cross / std::sqrt(va * vb);
}

double solve_latent_rho(const Marginal& a, const Marginal& b, double target) {
  if (target == 0.0) return 0.0;
  double lo = -0.999, hi = 0.999;
  const double r_lo = implied_pearson(a, b, lo), r_hi = implied_pearson(a, b, hi);
  require(target > r_lo && target < r_hi, ErrorKind::Domain,
          "target correlation " + std::to_string(target) + " is not attainable for these marginals");
  for (int it = 0; it < 50 && hi - lo > 1e-7; ++it) {
    const double mid = 0.5 * (lo + hi);
    (implied_pearson(a, b, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::MatrixXd nearest_correlation_psd(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() >= floor) return m;
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd r = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  const Eigen::VectorXd d = r.diagonal().cwiseSqrt().cwiseInverse();
  r = d.asDiagonal() * r * d.asDiagonal();
  r.diagonal().setOnes();
  return r;
}

nlohmann::json to_json(const CalibrationReport& r) {
  nlohmann::json j;
  j["variables"] = r.variables;
  nlohmann::json m = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.latent_correlation.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.latent_correlation.cols()));
    for (Eigen::Index k = 0; k < r.latent_correlation.cols(); ++k) row[static_cast<std::size_t>(k)] = r.latent_correlation(i, k);
    m.push_back(row);
  }
  j["latent_correlation"] = m;
  j["latent_rho"] = r.latent_rho;
  j["target_r"] = r.target_r;
  j["implied_r"] = r.implied_r;
  return j;
}

CalibratedCohort generate_synthetic_cohort(int n, const CohortCalibration& cal, std::uint64_t seed) {
  require(n >= 100, ErrorKind::InvalidArgument, "synthetic cohort needs n >= 100");
  for (const auto& name : {"age", "bmi", "rhr", "hrv_rmssd", "steps", "sleep_minutes", "glucose", "hba1c",
                           "hdl", "ldl", "triglycerides"}) {
    require(cal.marginals.count(name), ErrorKind::Config, std::string("calibration lacks marginal '") + name + "'");
  }
  const Marginal homa = cal.homa_marginal();

  // Latent order: HOMA-IR, targeted variables, untargeted variables.
  CalibratedCohort out;
  auto& rep = out.calibration;
  rep.variables.push_back("homa_ir");
  for (const auto& [name, r] : cal.homa_correlation) {
    require(cal.marginals.count(name), ErrorKind::Config, "correlation target '" + name + "' has no marginal");
    if (r != 0.0) rep.variables.push_back(name);
  }
  const std::size_t n_targeted = rep.variables.size() - 1;
  for (const auto& [name, _] : cal.marginals) {
    if (std::find(rep.variables.begin(), rep.variables.end(), name) == rep.variables.end()) rep.variables.push_back(name);
  }
  const auto dim = static_cast<Eigen::Index>(rep.variables.size());
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(dim, dim);
  for (std::size_t i = 1; i <= n_targeted; ++i) {
    const auto& name = rep.variables[i];
    const double target = cal.homa_correlation.at(name);
    const double rho = solve_latent_rho(homa, cal.marginals.at(name), target);
    rep.latent_rho[name] = rho;
    rep.target_r[name] = target;
    R(0, static_cast<Eigen::Index>(i)) = R(static_cast<Eigen::Index>(i), 0) = rho;
  }
  for (std::size_t i = 1; i <= n_targeted; ++i) {
    for (std::size_t k = i + 1; k <= n_targeted; ++k) {
      const double s = (rep.target_r[rep.variables[i]] * rep.target_r[rep.variables[k]]) > 0 ? 1.0 : -1.0;
      R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          R(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = cal.cross_correlation * s;
    }
  }
  R = nearest_correlation_psd(R);
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  require(llt.info() == Eigen::Success, ErrorKind::Domain, "latent correlation is not positive definite after repair");
  rep.latent_correlation = R;
  for (std::size_t i = 1; i <= n_targeted; ++i) {
    const auto& name = rep.variables[i];
    rep.implied_r[name] = implied_pearson(homa, cal.marginals.at(name), R(0, static_cast<Eigen::Index>(i)));
  }
  const Eigen::MatrixXd L = llt.matrixL();

  std::mt19937_64 rng(seed);
  const DailyPlan plan{Date{parse_date(cal.start_date)}, cal.study_days, cal.daily_jitter, cal.missing_day_prob, false};
  Eigen::VectorXd eps(dim);
  for (int p = 0; p < n; ++p) {
    for (Eigen::Index k = 0; k < dim; ++k) eps(k) = standard_normal(rng);
    const Eigen::VectorXd z = L * eps;
    const double h = homa.from_latent(z(0));
    std::map<std::string, double> values;
    for (Eigen::Index k = 1; k < dim; ++k) {
      const auto& name = rep.variables[static_cast<std::size_t>(k)];
      values[name] = cal.marginals.at(name).from_latent(z(k));
    }
    const auto id = participant_id(p, n);
    out.records.push_back(materialize(id, values, h, cal.marginals, plan, rng));
    out.person_level_homa[id] = h;
  }
  plant_violations(out, cal.violations, rng);
  return out;
}

FunctionalSpec FunctionalSpec::defaults() {
  FunctionalSpec s;
  s.coefficients = {{"glucose", 0.30}, {"bmi", 0.25},           {"rhr", 0.12},  {"steps", -0.10},
                    {"hrv_rmssd", -0.06}, {"triglycerides", 0.12}, {"hdl", -0.10}};
  return s;
}

double FunctionalSpec::g(const std::map<std::string, double>& values,
                         const std::map<std::string, Marginal>& marginals) const {
  double eta = 0.0;
  for (const auto& [name, beta] : coefficients) {
    const auto& m = marginals.at(name);
    eta += beta * (values.at(name) - m.median) / m.sd;
  }
  return scale * std::exp(eta);
}

FunctionalCohort generate_functional_cohort(int n, const FunctionalSpec& spec, std::uint64_t seed) {
  require(n >= 50, ErrorKind::InvalidArgument, "functional cohort needs n >= 50");
  require(spec.noise_sigma >= 0.0, ErrorKind::InvalidArgument, "noise sigma must be >= 0");
  const auto marginals = CohortCalibration::defaults().marginals;
  for (const auto& [name, _] : spec.coefficients) {
    require(marginals.count(name), ErrorKind::Config, "functional coefficient '" + name + "' has no marginal");
  }
  std::mt19937_64 rng(seed);
  const DailyPlan plan{Date{parse_date(spec.start_date)}, spec.study_days, spec.daily_jitter,
                       spec.missing_day_prob, spec.constant_wearables};
  FunctionalCohort out;
  std::vector<double> ys;
  for (int p = 0; p < n; ++p) {
    std::map<std::string, double> values;
    for (const auto& [name, m] : marginals) values[name] = m.from_latent(standard_normal(rng));
    const double g = spec.g(values, marginals);
    double y = g + spec.noise_sigma * standard_normal(rng);
    for (int tries = 0; (y < 0.1 || y >= 14.9) && tries < 100; ++tries) {
      y = g + spec.noise_sigma * standard_normal(rng);
    }
    y = std::clamp(y, 0.1, 14.8);
    const auto id = participant_id(p, n);
    out.records.push_back(materialize(id, values, y, marginals, plan, rng));
    out.person_level_homa[id] = y;
    ys.push_back(y);
  }
  const double var = population_std(ys) * population_std(ys);
  out.ideal_r2 = var > 0.0 ? 1.0 - spec.noise_sigma * spec.noise_sigma / var : 0.0;
  return out;
}

CohortFiles write_cohort_csv(const std::vector<ParticipantRecord>& records, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto files = CohortFiles::in_directory(dir);
  auto num = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); };

  std::set<std::string> comorbidities, extras, analytes;
  for (const auto& r : records) {
    for (const auto& [k, _] : r.demographics.comorbidities) comorbidities.insert(k);
    for (const auto& d : r.days) {
      for (const auto& [k, _] : d.extras) extras.insert(k);
    }
    if (r.labs) {
      for (const auto& [k, _] : r.labs->metabolic_panel) analytes.insert(k);
    }
  }

  std::ofstream p(files.participants), w(files.wearables), l(files.labs);
  require(p && w && l, ErrorKind::Io, "cannot write cohort files in " + dir.string());
  std::vector<std::string> header = {"id", "age", "gender", "ethnicity", "height_m", "weight_kg", "bmi",
                                     "hypertension", "fasting"};
  header.insert(header.end(), comorbidities.begin(), comorbidities.end());
  csv::write_row(p, header);
  for (const auto& r : records) {
    const auto& d = r.demographics;
    std::vector<std::string> row = {r.id, num(d.age), d.gender, d.ethnicity, num(d.height_m), num(d.weight_kg),
                                    num(d.bmi), d.hypertension ? "1" : "0",
                                    (r.labs && !r.labs->fasting_flag) ? "0" : "1"};
    for (const auto& c : comorbidities) {
      const auto it = d.comorbidities.find(c);
      row.push_back(it != d.comorbidities.end() && it->second ? "1" : "0");
    }
    csv::write_row(p, row);
  }

  header = {"id", "date", "rhr", "hrv_rmssd", "steps", "sleep_minutes"};
  header.insert(header.end(), extras.begin(), extras.end());
  csv::write_row(w, header);
  for (const auto& r : records) {
    for (const auto& d : r.days) {
      std::vector<std::string> row = {r.id, format_date(d.date), num(d.rhr), num(d.hrv_rmssd), num(d.steps),
                                      num(d.sleep_minutes)};
      for (const auto& e : extras) {
        const auto it = d.extras.find(e);
        row.push_back(it != d.extras.end() ? csv::format_number(it->second) : "");
      }
      csv::write_row(w, row);
    }
  }

  header = {"id", "draw_date", "insulin", "glucose", "hba1c", "hdl", "ldl", "triglycerides", "total_cholesterol"};
  header.insert(header.end(), analytes.begin(), analytes.end());
  csv::write_row(l, header);
  for (const auto& r : records) {
    if (!r.labs) continue;
    const auto& b = *r.labs;
    std::vector<std::string> row = {r.id, format_date(b.draw_date), num(b.fasting_insulin), num(b.fasting_glucose),
                                    num(b.hba1c), num(b.hdl), num(b.ldl), num(b.triglycerides),
                                    num(b.total_cholesterol)};
    for (const auto& a : analytes) {
      const auto it = b.metabolic_panel.find(a);
      row.push_back(it != b.metabolic_panel.end() ? csv::format_number(it->second) : "");
    }
    csv::write_row(l, row);
  }
  return files;
}

nlohmann::json to_json(const CohortCalibration& c) {
  nlohmann::json m = nlohmann::json::object();
  for (const auto& [name, mg] : c.marginals) {
    m[name] = {{"median", mg.median}, {"sd", mg.sd}, {"lo", mg.lo}, {"hi", mg.hi}, {"log_normal", mg.log_normal}};
  }
  return {{"marginals", m},
          {"homa_correlation", c.homa_correlation},
          {"cross_correlation", c.cross_correlation},
          {"class_proportions", c.class_proportions},
          {"homa_max", c.homa_max},
          {"study_days", c.study_days},
          {"daily_jitter", c.daily_jitter},
          {"missing_day_prob", c.missing_day_prob},
          {"start_date", c.start_date},
          {"violations", {{"not_fasting", c.violations.not_fasting},
                          {"bmi_out_of_range", c.violations.bmi_out_of_range},
                          {"homa_outlier", c.violations.homa_outlier},
                          {"insufficient_wearable_days", c.violations.insufficient_wearable_days},
                          {"missing_required_fields", c.violations.missing_required_fields}}}};
}

CohortCalibration calibration_from_json(const nlohmann::json& j, CohortCalibration c) {
  require(j.is_object(), ErrorKind::Config, "calibration must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "marginals") {
      for (const auto& [name, mj] : v.items()) {
        Marginal mg = c.marginals.count(name) ? c.marginals[name] : Marginal{};
        for (const auto& [mk, mv] : mj.items()) {
          if (mk == "median") mg.median = mv.get<double>();
          else if (mk == "sd") mg.sd = mv.get<double>();
          else if (mk == "lo") mg.lo = mv.get<double>();
          else if (mk == "hi") mg.hi = mv.get<double>();
          else if (mk == "log_normal") mg.log_normal = mv.get<bool>();
          else fail(ErrorKind::Config, "unknown marginal key '" + mk + "'");
        }
        require(mg.sd > 0.0 && mg.lo < mg.hi && (!mg.log_normal || mg.median > 0.0), ErrorKind::Config,
                "invalid marginal for '" + name + "'");
        c.marginals[name] = mg;
      }
    } else if (key == "homa_correlation") {
      c.homa_correlation = v.get<std::map<std::string, double>>();
      for (const auto& [name, r] : c.homa_correlation) {
        require(r > -1.0 && r < 1.0, ErrorKind::Config, "correlation for '" + name + "' must lie in (-1, 1)");
      }
    } else if (key == "cross_correlation") c.cross_correlation = v.get<double>();
    else if (key == "class_proportions") c.class_proportions = v.get<std::vector<double>>();
    else if (key == "homa_max") c.homa_max = v.get<double>();
    else if (key == "study_days") c.study_days = v.get<int>();
    else if (key == "daily_jitter") c.daily_jitter = v.get<double>();
    else if (key == "missing_day_prob") c.missing_day_prob = v.get<double>();
    else if (key == "start_date") c.start_date = v.get<std::string>();
    else if (key == "violations") {
      for (const auto& [vk, vv] : v.items()) {
        const int count = vv.get<int>();
        require(count >= 0, ErrorKind::Config, "violation counts must be >= 0");
        if (vk == "not_fasting") c.violations.not_fasting = count;
        else if (vk == "bmi_out_of_range") c.violations.bmi_out_of_range = count;
        else if (vk == "homa_outlier") c.violations.homa_outlier = count;
        else if (vk == "insufficient_wearable_days") c.violations.insufficient_wearable_days = count;
        else if (vk == "missing_required_fields") c.violations.missing_required_fields = count;
        else fail(ErrorKind::Config, "unknown violation '" + vk + "'");
      }
    } else fail(ErrorKind::Config, "unknown calibration key '" + key + "'");
  }
  require(c.study_days >= 14, ErrorKind::Config, "study_days must be >= 14");
  require(c.daily_jitter >= 0.0 && c.missing_day_prob >= 0.0 && c.missing_day_prob < 1.0, ErrorKind::Config,
          "jitter and missing-day probability out of range");
  parse_date(c.start_date);
  return c;
}

}  // namespace irscreen
