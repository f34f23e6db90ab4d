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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Each criterion also has to finish inside its time budget.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "irscreen/domain.hpp"
#include "irscreen/explain.hpp"
#include "irscreen/gbm.hpp"
#include "irscreen/metrics.hpp"
#include "irscreen/pipeline.hpp"
#include "irscreen/robustness.hpp"
#include "irscreen/stats.hpp"
#include "irscreen/synthcohort.hpp"
#include "irscreen/tools.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace irscreen;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// 1 ------------------------------------------------------------------------
Outcome homa_formula() {
  const double v = compute_homa_ir(10.0, 90.0).value;
  const double err = std::abs(v - 20.0 / 9.0);
  const double round_trip = compute_homa_ir(2.9 * 405.0 / 90.0, 90.0).value;
  const bool zero = compute_homa_ir(0.0, 90.0).value == 0.0;
  const bool bounds = classify_ir(HomaIr{1.49}) == IrClass::IS && classify_ir(HomaIr{1.5}) == IrClass::ImpairedIS &&
                      classify_ir(HomaIr{2.0}) == IrClass::ImpairedIS &&
                      classify_ir(HomaIr{std::nextafter(2.9, 0.0)}) == IrClass::ImpairedIS &&
                      classify_ir(HomaIr{2.9}) == IrClass::IR;
  return {err < 1e-12 && std::abs(round_trip - 2.9) < 1e-12 && zero && bounds,
          "|(10,90) - 20/9| = " + fmt("%.1e", err) + ", boundaries 1.5/2.9 " + (bounds ? "ok" : "wrong")};
}

// 2 ------------------------------------------------------------------------
Outcome tree_oracle() {
  std::mt19937_64 rng(20260101);
  int datasets = 0, mismatches = 0;
  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    const int n = uniform_int(rng, 2, 8), d = uniform_int(rng, 1, 2);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = uniform(rng, -2, 2);
      y(i) = uniform(rng, -3, 3);
    }
    oracle::TreeConfig c;
    c.n_estimators = uniform_int(rng, 1, 4);
    c.max_depth = uniform_int(rng, 1, 2);
    c.eta = uniform(rng, 0.1, 1.0);
    const double lambdas[] = {0.0, 0.5, 1.0, 2.0};
    c.lambda = lambdas[uniform_int(rng, 0, 3)];
    c.gamma = uniform_int(rng, 0, 1) ? 0.0 : 0.05;
    GbmParams p;
    p.n_estimators = c.n_estimators;
    p.max_depth = c.max_depth;
    p.learning_rate = c.eta;
    p.reg_lambda = c.lambda;
    p.gamma_split = c.gamma;
    const auto model = fit_tree_ensemble(X, y, p);
    const auto ref = oracle::brute_force_booster(X, y, c);
    ++datasets;
    bool same = std::abs(model.base_score - ref.base) < 1e-12 && model.trees.size() == ref.trees.size();
    for (std::size_t k = 0; same && k < ref.trees.size(); ++k) {
      const auto& a = model.trees[k].nodes;
      const auto& b = ref.trees[k];
      same = a.size() == b.size();
      for (std::size_t i = 0; same && i < b.size(); ++i) {
        same = a[i].feature == b[i].feature && a[i].left == b[i].left && a[i].right == b[i].right;
        const double dv = std::abs(a[i].value - b[i].value);
        const double dt = a[i].is_leaf() ? 0.0 : std::abs(a[i].threshold - b[i].threshold);
        worst = std::max({worst, dv, dt});
        same = same && dv <= 1e-10 && dt <= 1e-10;
      }
    }
    mismatches += same ? 0 : 1;
  }
  return {mismatches == 0, std::to_string(datasets) + " datasets, " + std::to_string(mismatches) +
                               " structural mismatches, max |diff| " + fmt("%.1e", worst)};
}

// 3 ------------------------------------------------------------------------
Outcome linear_oracle() {
  std::mt19937_64 rng(31337);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = uniform_int(rng, 30, 80), d = uniform_int(rng, 2, 6);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd beta(d), y(n);
    for (int j = 0; j < d; ++j) beta(j) = 2.0 * z(rng);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = z(rng) + 0.3 * j;
    }
    y = (X * beta).array() + 1.5 + 0.5 * Eigen::ArrayXd::NullaryExpr(n, [&] { return z(rng); });
    GbmParams p;
    p.booster = Booster::Linear;
    p.reg_lambda = uniform(rng, 0.5, 5.0);
    p.reg_alpha = 0.0;
    p.learning_rate = 1.0;
    p.n_estimators = 4000;
    const auto m = fit_linear_ensemble(X, y, p);
    const auto [w, b] = oracle::ridge(X, y, p.reg_lambda);
    worst = std::max(worst, (m.weights - w).cwiseAbs().maxCoeff());
    worst = std::max(worst, std::abs(m.base_score + m.bias - b));
  }
  return {worst <= 1e-4, "20 problems, max |w - w_ridge| " + fmt("%.2e", worst)};
}

// 4 ------------------------------------------------------------------------
Outcome gradient_check() {
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> z;
  double worst = 0.0;
  Eigen::Index params = 0;
  for (int t = 0; t < 10; ++t) {
    MlpSpec spec;
    spec.input_dim = uniform_int(rng, 2, 7);
    spec.latent_dim = uniform_int(rng, 1, spec.input_dim - 1);
    const int depth = uniform_int(rng, 1, 2);
    for (int h = 0; h < depth; ++h) spec.hidden.push_back(uniform_int(rng, 2, 8));
    spec.seed = rng();
    auto ae = make_autoencoder<double>(spec);
    for (auto& l : ae.layers) {
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.3 * z(rng);
    }
    const int rows = uniform_int(rng, 1, 6);
    Eigen::MatrixXd x(rows, spec.input_dim);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 1.5 * z(rng);
    const double probs[] = {0.0, 0.3, 0.75};
    const Eigen::MatrixXd mask = sample_mask<double>(rows, spec.input_dim, probs[t % 3], rng);
    const double lambda_sl = uniform(rng, 0.0, 1.0);
    const auto analytic = backward_gradients(ae, x, mask, lambda_sl);
    const auto numeric = oracle::numeric_gradients(ae, x, mask, lambda_sl);
    for (std::size_t l = 0; l < analytic.size(); ++l) {
      auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };
      for (Eigen::Index i = 0; i < analytic[l].weight.size(); ++i) {
        worst = std::max(worst, rel(analytic[l].weight.data()[i], numeric[l].weight.data()[i]));
      }
      for (Eigen::Index i = 0; i < analytic[l].bias.size(); ++i) {
        worst = std::max(worst, rel(analytic[l].bias(i), numeric[l].bias(i)));
      }
    }
    params += ae.parameter_count();
  }
  return {worst <= 1e-4, "10 configurations, " + std::to_string(params) + " parameters, max relative error " +
                             fmt("%.2e", worst)};
}

// 5 ------------------------------------------------------------------------
Outcome ranking_oracle() {
  std::mt19937_64 rng(5555);
  double worst_roc = 0.0, worst_pr = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = uniform_int(rng, 2, 60);
    const bool tied = t % 2 == 0;
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      s[static_cast<std::size_t>(i)] = tied ? uniform_int(rng, 0, 5) : uniform(rng, 0, 1);
      y[static_cast<std::size_t>(i)] = uniform_int(rng, 0, 1);
    }
    y[0] = 0;
    y[1] = 1;
    const auto c = ranking_curves(s, y);
    worst_roc = std::max(worst_roc, std::abs(c.auroc - oracle::pairwise_auroc(s, y)));
    worst_pr = std::max(worst_pr, std::abs(c.auprc - oracle::step_auprc(s, y)));
  }
  return {worst_roc <= 1e-12 && worst_pr <= 1e-12,
          "1000 sets, max |AUROC diff| " + fmt("%.1e", worst_roc) + ", max |AUPRC diff| " + fmt("%.1e", worst_pr)};
}

// 6 ------------------------------------------------------------------------
Outcome leakage_invariance() {
  const auto cohort = generate_functional_cohort(150, FunctionalSpec::defaults(), 66);
  const DesignMatrix base =
      build_design_matrix(cohort.records, feature_set_by_name("Wearables + Demographics + Glucose"), 30);
  std::mt19937_64 rng(6);
  int checked = 0, violations = 0, insensitive = 0;
  for (ModelKind kind : {ModelKind::TreeDirect, ModelKind::LinearDirect, ModelKind::AeThenLinear,
                         ModelKind::MaeThenLinear}) {
    ExperimentSpec spec;
    spec.feature_set = feature_set_by_name("Wearables + Demographics + Glucose");
    spec.model = kind;
    spec.ae_config.epochs = 40;
    const auto before = run_experiment(base, spec);
    for (int k = 0; k < before.folds.k; ++k) {
      DesignMatrix mutated = base;
      for (auto r : before.folds.test_rows(k)) {
        const auto row = static_cast<Eigen::Index>(r);
        for (Eigen::Index c = 0; c < mutated.X.cols(); ++c) mutated.X(row, c) = uniform(rng, -1e3, 1e3);
        mutated.y(row) = uniform(rng, 0.1, 14.0);
      }
      const auto after = run_experiment(mutated, spec);
      for (int f = 0; f < before.folds.k; ++f) {
        const bool same = to_json(before.fold_models[static_cast<std::size_t>(f)]).dump() ==
                          to_json(after.fold_models[static_cast<std::size_t>(f)]).dump();
        if (f == k) {
          ++checked;
          violations += same ? 0 : 1;
        } else if (same) {
          ++insensitive;  // the mutated rows trained fold f, so it should move
        }
      }
    }
  }
  return {violations == 0 && insensitive == 0,
          std::to_string(checked) + " held-out mutations over 4 model kinds, " + std::to_string(violations) +
              " changed a fitted model; control folds all moved: " + (insensitive == 0 ? "yes" : "no")};
}

// 7 ------------------------------------------------------------------------
Outcome synthetic_calibration() {
  const auto cal = CohortCalibration::defaults();
  const auto cohort = generate_synthetic_cohort(5000, cal, 7);
  std::map<std::string, std::vector<double>> v;
  std::vector<double> homa;
  for (const auto& r : cohort.records) {
    const auto h = homa_ir_of(r);
    if (!h) continue;
    homa.push_back(h->value);
    const auto& lab = *r.labs;
    v["glucose"].push_back(*lab.fasting_glucose);
    v["hba1c"].push_back(*lab.hba1c);
    v["hdl"].push_back(*lab.hdl);
    v["triglycerides"].push_back(*lab.triglycerides);
    v["bmi"].push_back(*resolve_bmi(r.demographics).bmi);
    for (const char* metric : {"rhr", "steps", "hrv_rmssd"}) {
      double sum = 0.0;
      int n = 0;
      for (const auto& d : r.days) {
        if (const auto x = wearable_metric(d, metric)) {
          sum += *x;
          ++n;
        }
      }
      v[metric].push_back(sum / n);
    }
  }
  bool ok = true;
  std::string detail;
  for (const auto& [name, target] : cal.homa_correlation) {
    const double r = *pearson(v.at(name), homa).r;
    const bool good = (r > 0) == (target > 0) && std::abs(r - target) <= 0.05;
    ok = ok && good;
    detail += name + " " + fmt("%.3f", r) + "/" + fmt("%.2f", target) + (good ? "" : "!") + " ";
  }
  return {ok && cal.homa_correlation.size() == 8, detail};
}

// 8 ------------------------------------------------------------------------
Outcome end_to_end_ordering() {
  const char* sets[] = {"Wearables + Demographics", "Wearables + Demographics + Glucose",
                        "Wearables + Demographics + Lipid Panel + Metabolic Panel"};
  int ordered = 0;
  long tp_wd = 0, tp_wdg = 0;
  std::string detail;
  for (int r = 0; r < 5; ++r) {
    const auto cohort = generate_functional_cohort(1000, FunctionalSpec::defaults(), default_seeds()[static_cast<std::size_t>(r)]);
    double r2[3];
    long tp[3];
    for (int s = 0; s < 3; ++s) {
      ExperimentSpec spec;
      spec.feature_set = feature_set_by_name(sets[s]);
      const auto res = run_experiment(cohort.records, spec, r);
      r2[s] = *res.report.pooled.regression.r2;
      tp[s] = static_cast<long>(res.report.pooled.counts.tp);
    }
    ordered += (r2[0] < r2[1] && r2[1] <= r2[2]) ? 1 : 0;
    tp_wd += tp[0];
    tp_wdg += tp[1];
    detail += fmt("[%.3f", r2[0]) + fmt(" < %.3f", r2[1]) + fmt(" <= %.3f]", r2[2]) + " ";
  }
  // One-sided sign test: probability of >= `ordered` successes out of 5 under p = 1/2.
  double p = 0.0;
  for (int k = ordered; k <= 5; ++k) p += std::tgamma(6.0) / (std::tgamma(k + 1.0) * std::tgamma(6.0 - k)) / 32.0;
  detail += "sign test p=" + fmt("%.4f", p) + ", IR identified " + std::to_string(tp_wd) + " -> " + std::to_string(tp_wdg);
  return {p < 0.05 && tp_wdg > tp_wd, detail};
}

// 9 ------------------------------------------------------------------------
Outcome robustness_properties() {
  FunctionalSpec constant = FunctionalSpec::defaults();
  constant.constant_wearables = true;
  const auto flat = generate_functional_cohort(300, constant, 9);
  ExperimentSpec spec;
  spec.feature_set = feature_set_by_name("Wearables + Demographics");
  const auto res = run_experiment(flat.records, spec);
  std::map<std::string, IrClass> truth;
  for (const auto& r : flat.records) truth[r.id] = classify_ir(*homa_ir_of(r));
  double max_cv = 0.0, full = 1.0;
  std::size_t with_cv = 0;
  for (int n : {7, 14, 30}) {
    const auto s = summarize_sweeps(sweep_out_of_fold(flat.records, res, n), truth);
    for (const auto& cv : s.cv) {
      if (cv) {
        max_cv = std::max(max_cv, *cv);
        ++with_cv;
      }
    }
    full = std::min(full, s.consistency.stability_fraction[0]);
  }
  const bool part_a = max_cv <= 1e-9 && full == 1.0 && with_cv > 0;

  int non_increasing = 0;
  std::string detail = "constant series: max CV " + fmt("%.1e", max_cv) + "%, 100%-band share " + fmt("%.3f", full) + "; median CV W+D -> W+D+Glucose:";
  for (int r = 0; r < 5; ++r) {
    const auto cohort = generate_functional_cohort(1000, FunctionalSpec::defaults(), default_seeds()[static_cast<std::size_t>(r)]);
    std::map<std::string, IrClass> t;
    for (const auto& rec : cohort.records) t[rec.id] = classify_ir(*homa_ir_of(rec));
    double median[2];
    int i = 0;
    for (const char* set : {"Wearables + Demographics", "Wearables + Demographics + Glucose"}) {
      ExperimentSpec s;
      s.feature_set = feature_set_by_name(set);
      const auto er = run_experiment(cohort.records, s, r);
      median[i++] = *summarize_sweeps(sweep_out_of_fold(cohort.records, er, 30), t).median_cv;
    }
    non_increasing += median[1] <= median[0] ? 1 : 0;
    detail += fmt(" %.2f", median[0]) + fmt("->%.2f", median[1]);
  }
  return {part_a && non_increasing == 5, detail};
}

// 10 -----------------------------------------------------------------------
Outcome shap_properties() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> z;
  double worst_local = 0.0, worst_exact = 0.0;
  int inputs = 0, exact_cases = 0;
  for (int m = 0; m < 40; ++m) {
    const int d = uniform_int(rng, 2, m < 30 ? 4 : 7);
    const int n = uniform_int(rng, 20, 80);
    Eigen::MatrixXd X(n, d);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = z(rng);
      y(i) = std::sin(X(i, 0)) + X(i, d - 1) * X(i, 0) + 0.2 * z(rng);
    }
    GbmParams p;
    p.booster = m % 5 == 4 ? Booster::Linear : Booster::Tree;
    p.n_estimators = uniform_int(rng, 1, 15);
    p.max_depth = uniform_int(rng, 1, 4);
    p.learning_rate = uniform(rng, 0.05, 0.5);
    const auto model = fit_gbm(X, y, p);
    for (int k = 0; k < 25; ++k) {
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = 1.5 * z(rng);
      const auto sv = shap_matrix(model, x.transpose(), X).front();
      const double pred = gbm_predict(model, x.transpose())(0);
      worst_local = std::max(worst_local, std::abs(sv.reconstructed() - pred));
      ++inputs;
      if (p.booster == Booster::Tree && d <= 4) {
        worst_exact = std::max(worst_exact, (sv.phi - oracle::coalition_shapley(model, x)).cwiseAbs().maxCoeff());
        ++exact_cases;
      }
    }
  }
  return {inputs >= 1000 && worst_local <= 1e-8 && worst_exact <= 1e-10,
          std::to_string(inputs) + " inputs, max |sum phi + phi0 - f(x)| " + fmt("%.1e", worst_local) + "; " +
              std::to_string(exact_cases) + " coalition checks, max |diff| " + fmt("%.1e", worst_exact)};
}

// 11 -----------------------------------------------------------------------
std::string strip_metadata(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  if (p.extension() != ".json") return ss.str();
  json j = json::parse(ss.str());
  j.erase("metadata");
  return j.dump(2);
}

Outcome grid_determinism() {
  const fs::path root = fs::temp_directory_path() / ("irscreen_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string cli = IRSCREEN_CLI_PATH;
  const json cfg = {
      {"data_dir", (root / "cohort").string()},
      {"workers", 2},
      {"hyperparameters", {{"autoencoder", {{"epochs", 60}}}}},
      {"grid",
       {{"feature_sets", {"Demographics", "Wearables + Demographics", "Wearables + Demographics + Glucose",
                          "Wearables + Demographics + Lipid Panel + Metabolic Panel"}},
        {"windows", {14, 30}},
        {"models", {"tree_direct", "linear_direct", "mae_then_linear"}}}}};
  std::ofstream(root / "config.json") << cfg.dump(2);
  auto run = [&](const std::string& args) {
    const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  if (run("-o \"" + root.string() + "\" synth --n 600 --seed 7") != 0) return {false, "synth failed"};
  for (const char* out : {"a", "b"}) {
    if (run("-c \"" + (root / "config.json").string() + "\" -o \"" + (root / out).string() + "\" grid") != 0) {
      return {false, std::string("grid run ") + out + " failed"};
    }
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::directory_iterator(root / "a" / "grid")) {
    ++files;
    const fs::path other = root / "b" / "grid" / e.path().filename();
    if (!fs::exists(other) || strip_metadata(e.path()) != strip_metadata(other)) ++differing;
  }
  std::size_t files_b = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "b" / "grid")) ++files_b;
  fs::remove_all(root);
  return {files > 0 && differing == 0 && files == files_b,
          "24 cells, " + std::to_string(files) + " output files compared, " + std::to_string(differing) +
              " differ outside metadata"};
}

// 12 -----------------------------------------------------------------------
Outcome statistics_oracles() {
  std::mt19937_64 rng(1212);
  double worst_bh = 0.0;
  bool monotone = true;
  for (int t = 0; t < 100; ++t) {
    const int m = uniform_int(rng, 1, 40);
    std::vector<double> p(static_cast<std::size_t>(m));
    for (auto& v : p) v = t % 3 == 0 ? uniform_int(rng, 1, 10) / 20.0 : std::pow(uniform(rng, 0, 1), 3);
    const auto q = benjamini_hochberg(p);
    const auto ref = oracle::brute_bh(p);
    for (std::size_t i = 0; i < p.size(); ++i) {
      worst_bh = std::max(worst_bh, std::abs(q[i] - ref[i]));
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[i] <= p[j] && q[i] > q[j] + 1e-15) monotone = false;
      }
      if (q[i] > 1.0) monotone = false;
    }
  }
  // The approximation is scored on continuous samples with n1, n2 in [9, 10];
  // smaller or heavily tied samples are reported for reference only.
  auto sample = [&](int n, double shift, int levels) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) {
      x = uniform(rng, 0, 1) + shift;
      if (levels > 0) x = std::floor(x * levels / 2.5);
    }
    return v;
  };
  auto worst_gap = [&](int n1, int n2, int levels, int reps, double* worst_exact) {
    double worst = 0.0;
    for (int t = 0; t < reps; ++t) {
      const double shift = uniform(rng, 0.0, 1.5);
      const auto a = sample(n1, 0.0, levels), b = sample(n2, shift, levels);
      if (wilcoxon_rank_sum(a, b).all_ties) continue;
      const double exact = oracle::wilcoxon_enumeration(a, b);
      worst = std::max(worst, std::abs(wilcoxon_rank_sum(a, b, WilcoxonMethod::Normal).p_value - exact));
      if (worst_exact != nullptr) {
        *worst_exact = std::max(*worst_exact, std::abs(wilcoxon_rank_sum(a, b, WilcoxonMethod::Exact).p_value - exact));
      }
    }
    return worst;
  };
  double worst_exact = 0.0, worst_approx = 0.0;
  for (auto [n1, n2] : {std::pair{9, 9}, std::pair{9, 10}, std::pair{10, 10}}) {
    worst_approx = std::max(worst_approx, worst_gap(n1, n2, 0, 40, &worst_exact));
  }
  for (auto [n1, n2] : {std::pair{3, 4}, std::pair{6, 6}, std::pair{10, 10}}) worst_gap(n1, n2, 5, 10, &worst_exact);
  const double small_n = worst_gap(5, 5, 0, 40, nullptr);
  const double tied = worst_gap(10, 10, 5, 20, nullptr);
  return {worst_bh <= 1e-12 && monotone && worst_approx <= 0.01 && worst_exact <= 1e-12,
          "BH 100 vectors max |diff| " + fmt("%.1e", worst_bh) + (monotone ? ", monotone" : ", NOT monotone") +
              "; Wilcoxon normal vs enumeration, untied n in [9,10]: " + fmt("%.4f", worst_approx) +
              "; exact path " + fmt("%.1e", worst_exact) + "; reference only: n=(5,5) " + fmt("%.4f", small_n) +
              ", 5-level ties " + fmt("%.4f", tied)};
}

// 13 -----------------------------------------------------------------------
Outcome tools_protocol() {
  const auto cohort = generate_functional_cohort(200, FunctionalSpec::defaults(), 13);
  ToolRegistry reg;
  std::map<std::string, std::vector<std::string>> columns;
  for (const auto& [tool, set] : ToolRegistry::prediction_feature_sets()) {
    ExperimentSpec spec;
    spec.feature_set = feature_set_by_name(set);
    const auto d = build_design_matrix(cohort.records, spec.feature_set, spec.window_days);
    reg.set_model(tool, fit_frozen_model(spec, d.columns, d.X, d.y, 0));
    columns[tool] = d.columns;
  }
  auto ask = [&](const json& req) { return json::parse(reg.dispatch_line(req.dump())); };
  int valid_ok = 0;
  bool values = true, pure = true;
  {
    const auto r = ask({{"tool", "homa_ir_calculator"}, {"args", {{"insulin", 10}, {"glucose", 90}}}});
    valid_ok += r.at("ok").get<bool>();
    values = values && std::abs(r["result"]["homa_ir"].get<double>() - 20.0 / 9.0) < 1e-12;
  }
  {
    const auto r = ask({{"tool", "comparison_arithmetic"}, {"args", {{"a", 2.0}, {"b", 2.5}}}});
    valid_ok += r.at("ok").get<bool>();
    values = values && std::abs(r["result"]["relative_difference"].get<double>() - 0.25) < 1e-12;
  }
  {
    const auto r = ask({{"tool", "percent_change"}, {"args", {{"old", 2.0}, {"new", 2.2}}}});
    valid_ok += r.at("ok").get<bool>();
    values = values && std::abs(r["result"]["percent_change"].get<double>() - 10.0) < 1e-9;
  }
  const auto design =
      build_design_matrix(cohort.records, feature_set_by_name("Wearables + Demographics + Lipid Panel + Metabolic Panel"), 30);
  std::map<std::string, double> row;
  for (std::size_t c = 0; c < design.columns.size(); ++c) row[design.columns[c]] = design.X(0, static_cast<Eigen::Index>(c));
  const auto glucose_design = build_design_matrix(cohort.records, feature_set_by_name("Wearables + Demographics + Glucose"), 30);
  for (std::size_t c = 0; c < glucose_design.columns.size(); ++c) row[glucose_design.columns[c]] = glucose_design.X(0, static_cast<Eigen::Index>(c));
  for (const auto& [tool, cols] : columns) {
    json features = json::object();
    for (const auto& c : cols) features[c] = row.at(c);
    const json req = {{"tool", tool}, {"args", {{"features", features}}}};
    auto a = ask(req), b = ask(req);
    valid_ok += a.at("ok").get<bool>();
    a.erase("elapsed_ms");
    b.erase("elapsed_ms");
    pure = pure && a == b;
  }

  // Structured rejections of targeted malformed requests.
  const std::vector<std::pair<std::string, std::string>> targeted = {
      {R"({"tool":"homa_ir_calculator","args":{"insulin":10}})", "missing_argument"},
      {R"({"tool":"homa_ir_calculator","args":{"insulin":"10","glucose":90}})", "invalid_type"},
      {R"({"tool":"homa_ir_calculator","args":{"insulin":true,"glucose":90}})", "invalid_type"},
      {R"({"tool":"homa_ir_calculator","args":{"insulin":-1,"glucose":90}})", "domain_error"},
      {R"({"tool":"comparison_arithmetic","args":{"a":0,"b":1}})", "domain_error"},
      {R"({"tool":"percent_change","args":{"old":1}})", "missing_argument"},
      {R"({"tool":"predict_demographics_only","args":{"features":{"age":40}}})", "column_mismatch"},
      {R"({"tool":"predict_demographics_only","args":{"features":{"age":40,"bmi":25,"steps_mean":3}}})", "column_mismatch"},
      {R"({"tool":"predict_demographics_only","args":{"features":[40,25]}})", "invalid_type"},
      {R"({"tool":"web_search","args":{}})", "unknown_tool"},
      {R"({"args":{}})", "invalid_request"},
      {R"({"tool":5})", "invalid_request"},
      {R"({"tool":"percent_change","args":[1,2]})", "invalid_request"},
      {R"([])", "invalid_request"},
      {R"({"tool":"percent_change","args":{"old":1,"new":2},"extra":1})", "invalid_request"},
      {R"({"tool": "homa_ir_calculator", "args": {"insulin": 1e999, "glucose": 90}})", "parse_error"},
      {R"({not json)", "parse_error"},
  };
  int targeted_ok = 0;
  for (const auto& [line, code] : targeted) {
    const auto r = json::parse(reg.dispatch_line(line));
    targeted_ok += (!r.at("ok").get<bool>() && r.at("error").at("code") == code) ? 1 : 0;
  }

  // Fuzz: random corruptions that can never form a valid request.
  std::mt19937_64 rng(1313);
  const std::string valid = R"({"tool":"homa_ir_calculator","args":{"insulin":10,"glucose":90}})";
  const std::vector<json> junk = {nullptr, true, 3, -1.5, "x", json::array(), json::object(), json::array({1, "a"}),
                                  json::object({{"k", json::array()}})};
  int structured = 0, crashes = 0;
  const int total = 1000;
  for (int i = 0; i < total; ++i) {
    std::string line;
    switch (i % 5) {
      case 0: {  // random bytes
        const int len = uniform_int(rng, 0, 80);
        for (int k = 0; k < len; ++k) line.push_back(static_cast<char>(uniform_int(rng, 0, 255)));
        if (json::accept(line)) line = "{" + line;  // keep it malformed
        break;
      }
      case 1:  // truncated valid request
        line = valid.substr(0, static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(valid.size()) - 1)));
        break;
      case 2: {  // wrong-typed tool or args
        json j = {{"tool", junk[static_cast<std::size_t>(uniform_int(rng, 0, 8))]},
                  {"args", junk[static_cast<std::size_t>(uniform_int(rng, 0, 8))]}};
        if (j["tool"].is_string()) j["tool"] = "no_such_tool_" + std::to_string(i);
        line = j.dump();
        break;
      }
      case 3: {  // known tool, junk argument values
        const auto& names = ToolRegistry::tool_names();
        const std::string tool = names[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(names.size()) - 1))];
        json args = json::object();
        for (const char* key : {"insulin", "glucose", "a", "b", "old", "new", "features"}) {
          json v = junk[static_cast<std::size_t>(uniform_int(rng, 0, 8))];
          if (v.is_number()) v = "num";
          args[key] = v;
        }
        line = json({{"tool", tool}, {"args", args}}).dump();
        break;
      }
      default: {  // prediction with a shuffled, partial feature map
        const auto& cols = columns.at("predict_wearables_demographics");
        json features = json::object();
        for (const auto& c : cols) {
          if (uniform_int(rng, 0, 3) != 0) features[c] = uniform(rng, -1e6, 1e6);
        }
        features["bogus_" + std::to_string(i)] = 1.0;
        line = json({{"tool", "predict_wearables_demographics"}, {"args", {{"features", features}}}}).dump();
        break;
      }
    }
    try {
      const auto r = json::parse(reg.dispatch_line(line));
      structured += (!r.at("ok").get<bool>() && r.at("error").at("code").is_string() &&
                     r.at("error").at("message").is_string() && r.contains("elapsed_ms"))
                        ? 1
                        : 0;
    } catch (...) {
      ++crashes;
    }
  }

  std::istringstream in(valid + "\n\n{broken\n" + valid + "\n");
  std::ostringstream out;
  const int failures = reg.serve(in, out);
  int lines = 0;
  for (char c : out.str()) lines += c == '\n';

  const bool pass = valid_ok == 7 && values && pure && targeted_ok == static_cast<int>(targeted.size()) &&
                    structured == total && crashes == 0 && failures == 1 && lines == 3;
  return {pass, std::to_string(valid_ok) + "/7 tools round-trip" + (values ? "" : " (wrong values)") +
                    (pure ? ", pure" : ", IMPURE") + "; targeted rejections " + std::to_string(targeted_ok) + "/" +
                    std::to_string(targeted.size()) + "; fuzz " + std::to_string(structured) + "/" +
                    std::to_string(total) + " structured, " + std::to_string(crashes) + " crashes"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "HOMA-IR formula and class boundaries", 1, homa_formula},
      {2, "tree booster matches brute-force booster", 30, tree_oracle},
      {3, "linear booster matches closed-form ridge", 10, linear_oracle},
      {4, "autoencoder gradients match finite differences", 60, gradient_check},
      {5, "AUROC/AUPRC match pairwise and step oracles", 30, ranking_oracle},
      {6, "held-out rows never touch fitted parameters", 60, leakage_invariance},
      {7, "synthetic cohort reproduces target correlations", 60, synthetic_calibration},
      {8, "feature-set ordering on a functional cohort", 300, end_to_end_ordering},
      {9, "robustness: constant series and glucose CV ordering", 180, robustness_properties},
      {10, "SHAP local accuracy and exact Shapley match", 60, shap_properties},
      {11, "grid reruns are byte-identical", 600, grid_determinism},
      {12, "BH and Wilcoxon against enumeration", 60, statistics_oracles},
      {13, "tool protocol round-trip, rejection and fuzz", 30, tools_protocol},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s criterion %2d: %s | %s | %.2fs (budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", EXCEEDED");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
