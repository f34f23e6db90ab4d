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

// irscreen command-line driver. Every command reads an optional JSON config,
// writes into the output directory and, on failure, prints one JSON line
// {"error": {"command", "kind", "message"}} to stderr and exits with 1.

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"
#include "irscreen/explain.hpp"
#include "irscreen/ingestion.hpp"
#include "irscreen/pipeline.hpp"
#include "irscreen/robustness.hpp"
#include "irscreen/run_config.hpp"
#include "irscreen/stats.hpp"
#include "irscreen/synthcohort.hpp"
#include "irscreen/tools.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace irscreen;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string config;
  std::string output;
  std::string data;
  int workers = 0;
};

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig::from_json(json::object()) : RunConfig::load(o.config);
  cfg.apply_env_override();
  if (!o.output.empty()) cfg.output_dir = o.output;
  if (!o.data.empty()) cfg.data_dir = o.data;
  if (cfg.data_dir.empty()) cfg.data_dir = cfg.output_dir / "cohort";
  if (o.workers > 0) cfg.workers = o.workers;
  return cfg;
}

fs::path ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  require(!ec, ErrorKind::Io, "cannot create directory " + p.string() + ": " + ec.message());
  return p;
}

// Timestamps live only under "metadata" so reruns differ nowhere else.
void write_json(const fs::path& path, json j, const std::string& command) {
  j["metadata"] = {{"command", command}, {"generated_at", utc_timestamp()}, {"version", kVersion}};
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <typename Fn>
void write_text(const fs::path& path, Fn&& body) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Io, "cannot write " + path.string());
  body(out);
}

json qc_json(const QcReport& r) {
  json excluded = json::array();
  for (const auto& [id, why] : r.excluded) excluded.push_back({{"id", id}, {"reason", std::string(to_string(why))}});
  return {{"input_n", r.input_n},
          {"retained_n", r.retained_n},
          {"excluded_by_reason",
           {{"not_fasting", r.not_fasting},
            {"bmi_out_of_range", r.bmi_out_of_range},
            {"homa_outlier", r.homa_outlier},
            {"insufficient_wearable_days", r.insufficient_wearable_days},
            {"missing_required_fields", r.missing_required_fields}}},
          {"bmi_conflicts", r.bmi_conflicts},
          {"excluded", excluded}};
}

struct Cohort {
  std::vector<ParticipantRecord> records;
  std::optional<QcReport> qc;
};

Cohort load_records(const RunConfig& cfg) {
  Cohort c;
  c.records = load_cohort(CohortFiles::in_directory(cfg.data_dir));
  if (cfg.apply_qc) {
    auto [kept, report] = apply_quality_control(std::move(c.records), cfg.qc);
    c.records = std::move(kept);
    c.qc = std::move(report);
  }
  return c;
}

std::vector<ExperimentSpec> experiments_or_default(const RunConfig& cfg) {
  if (!cfg.experiments.empty()) return cfg.experiments;
  ExperimentSpec s;
  s.feature_set = feature_set_by_name("Wearables + Demographics");
  return {s};
}

std::map<std::string, IrClass> true_classes(const std::vector<ParticipantRecord>& records,
                                            const IrThresholds& t) {
  std::map<std::string, IrClass> out;
  for (const auto& r : records) {
    if (const auto h = homa_ir_of(r)) out[r.id] = classify_ir(*h, t);
  }
  return out;
}

json experiment_report(const ExperimentResult& r, const std::vector<ParticipantRecord>& records) {
  json j = report_json(r);
  j["strata"] = to_json(stratified_evaluation(r, records));
  return j;
}

void write_experiment_files(const fs::path& dir, const std::string& stem, const ExperimentResult& r,
                            const std::vector<ParticipantRecord>& records, const std::string& command) {
  write_json(dir / (stem + "_report.json"), experiment_report(r, records), command);
  write_text(dir / (stem + "_predictions.csv"), [&](std::ostream& os) { write_predictions_csv(os, r.predictions); });
  if (r.report.pooled_curves) {
    write_text(dir / (stem + "_roc.csv"), [&](std::ostream& os) { write_roc_csv(os, *r.report.pooled_curves); });
    write_text(dir / (stem + "_pr.csv"), [&](std::ostream& os) { write_pr_csv(os, *r.report.pooled_curves); });
  }
}

std::string cell_stem(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "cell_%03zu", i);
  return buf;
}

// ---------------------------------------------------------------- commands

int cmd_synth(const RunConfig& cfg, std::optional<int> n, std::optional<std::uint64_t> seed,
              const std::string& kind, const std::string& out_dir) {
  SynthConfig s = cfg.synth;
  if (n) s.n = *n;
  if (seed) s.seed = *seed;
  if (!kind.empty()) {
    require(kind == "calibrated" || kind == "functional", ErrorKind::Config,
            "--kind must be 'calibrated' or 'functional'");
    s.functional = kind == "functional";
  }
  const fs::path dir = ensure_dir(out_dir.empty() ? cfg.output_dir / "cohort" : fs::path(out_dir));
  json meta = {{"n", s.n}, {"seed", s.seed}, {"kind", s.functional ? "functional" : "calibrated"}};
  GeneratedCohort cohort;
  if (s.functional) {
    auto fc = generate_functional_cohort(s.n, s.functional_spec, s.seed);
    meta["ideal_r2"] = fc.ideal_r2;
    cohort = std::move(fc);
  } else {
    auto cc = generate_synthetic_cohort(s.n, s.calibration, s.seed);
    meta["calibration"] = to_json(cc.calibration);
    meta["inputs"] = to_json(s.calibration);
    cohort = std::move(cc);
  }
  write_cohort_csv(cohort.records, dir);
  write_text(dir / "truth.csv", [&](std::ostream& os) {
    csv::write_row(os, {"id", "homa_ir", "planted_violation"});
    for (const auto& [id, h] : cohort.person_level_homa) {
      const auto it = cohort.planted.find(id);
      csv::write_row(os, {id, csv::format_number(h), it == cohort.planted.end() ? "" : std::string(to_string(it->second))});
    }
  });
  write_json(dir / "synth.json", meta, "synth");
  return 0;
}

int cmd_ingest(const RunConfig& cfg) {
  const auto records = load_cohort(CohortFiles::in_directory(cfg.data_dir));
  std::vector<double> days;
  std::size_t with_labs = 0, with_homa = 0;
  for (const auto& r : records) {
    days.push_back(static_cast<double>(r.days.size()));
    with_labs += r.labs ? 1 : 0;
    with_homa += homa_ir_of(r) ? 1 : 0;
  }
  json j = {{"participants", records.size()}, {"with_labs", with_labs}, {"with_homa_ir", with_homa}};
  if (!days.empty()) {
    j["wearable_days"] = {{"min", *std::min_element(days.begin(), days.end())},
                          {"median", median_of(days)},
                          {"max", *std::max_element(days.begin(), days.end())}};
  }
  write_json(ensure_dir(cfg.output_dir) / "ingest_summary.json", j, "ingest");
  return 0;
}

int cmd_qc(const RunConfig& cfg) {
  auto records = load_cohort(CohortFiles::in_directory(cfg.data_dir));
  auto [kept, report] = apply_quality_control(std::move(records), cfg.qc);
  const fs::path dir = ensure_dir(cfg.output_dir);
  write_json(dir / "qc_report.json", qc_json(report), "qc");
  write_text(dir / "retained_ids.csv", [&](std::ostream& os) {
    csv::write_row(os, {"id"});
    for (const auto& r : kept) csv::write_row(os, {r.id});
  });
  return 0;
}

int cmd_run(const RunConfig& cfg, int index) {
  const auto specs = experiments_or_default(cfg);
  require(index >= 0 && index < static_cast<int>(specs.size()), ErrorKind::Config,
          "--experiment index out of range");
  const auto& spec = specs[static_cast<std::size_t>(index)];
  const Cohort cohort = load_records(cfg);
  const auto result = run_experiment(cohort.records, spec);
  const fs::path dir = ensure_dir(cfg.output_dir / "run");
  write_experiment_files(dir, "experiment", result, cohort.records, "run");
  if (cohort.qc) write_json(dir / "qc_report.json", qc_json(*cohort.qc), "run");

  json folds = json::array();
  for (const auto& m : result.fold_models) folds.push_back(to_json(m));
  write_json(dir / "fold_models.json", {{"kind", "fold_models"}, {"label", spec.label()}, {"models", folds}}, "run");

  // Final model for deployment: every retained row, first seed.
  const DesignMatrix design = build_design_matrix(cohort.records, spec.feature_set, spec.window_days);
  const FrozenModel frozen = fit_frozen_model(spec, design.columns, design.X, design.y, spec.seeds.front());
  std::ofstream(dir / "model.json") << to_json(frozen).dump(2) << '\n';
  return 0;
}

int cmd_grid(const RunConfig& cfg) {
  const auto specs = experiments_or_default(cfg);
  const Cohort cohort = load_records(cfg);
  const auto cells = run_experiment_grid(cohort.records, specs, cfg.workers);
  const fs::path dir = ensure_dir(cfg.output_dir / "grid");
  json summary = json::array();
  std::size_t failed = 0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    json row = {{"cell", cell_stem(i)}, {"label", cell.spec.label()}};
    if (cell.result) {
      write_experiment_files(dir, cell_stem(i), *cell.result, cohort.records, "grid");
      const auto& pooled = cell.result->report.pooled;
      row["status"] = "ok";
      row["n"] = pooled.n;
      row["r2"] = pooled.regression.r2 ? json(*pooled.regression.r2) : json(nullptr);
      row["auroc"] = pooled.auroc ? json(*pooled.auroc) : json(nullptr);
      row["ir_identified"] = pooled.counts.tp;
    } else {
      ++failed;
      row["status"] = "error";
      row["error"] = cell.error;
    }
    summary.push_back(row);
  }
  json j = {{"cells", summary}};
  if (cohort.qc) j["qc"] = qc_json(*cohort.qc);
  write_json(dir / "grid_summary.json", j, "grid");
  if (failed > 0) fail(ErrorKind::InvalidArgument, std::to_string(failed) + " grid cell(s) failed; see grid_summary.json");
  return 0;
}

int cmd_robustness(const RunConfig& cfg) {
  const auto specs = experiments_or_default(cfg);
  const Cohort cohort = load_records(cfg);
  const fs::path dir = ensure_dir(cfg.output_dir / "robustness");
  json all = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto result = run_experiment(cohort.records, specs[i]);
    const auto truth = true_classes(cohort.records, specs[i].thresholds);
    std::vector<RobustnessSummary> summaries;
    for (int n : cfg.sweep_windows) {
      const auto sweeps = sweep_out_of_fold(cohort.records, result, n, SweepOptions{cfg.sweep_stride_days});
      write_text(dir / (cell_stem(i) + "_sweep_" + std::to_string(n) + "d.csv"),
                 [&](std::ostream& os) { write_sweep_csv(os, sweeps); });
      summaries.push_back(summarize_sweeps(sweeps, truth));
    }
    json b = buckets_json(specs[i].feature_set.name, summaries);
    b["label"] = specs[i].label();
    all.push_back(b);
  }
  write_json(dir / "robustness.json", {{"experiments", all}}, "robustness");
  return 0;
}

// SHAP of each participant under the fold model that held it out.
int cmd_explain(const RunConfig& cfg) {
  const auto specs = experiments_or_default(cfg);
  const Cohort cohort = load_records(cfg);
  const fs::path dir = ensure_dir(cfg.output_dir / "explain");
  json sankey = json::array();
  json probes = json::array();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const DesignMatrix design = build_design_matrix(cohort.records, spec.feature_set, spec.window_days);
    const auto result = run_experiment(design, spec);

    std::vector<std::string> features;
    std::map<std::string, std::size_t> feature_index;
    for (const auto& m : result.fold_models) {
      for (const auto& f : m.booster.feature_names) {
        if (feature_index.emplace(f, features.size()).second) features.push_back(f);
      }
    }
    std::vector<ShapVector> shap(static_cast<std::size_t>(design.rows()));
    for (int k = 0; k < result.folds.k; ++k) {
      const auto test = result.folds.test_rows(k);
      if (test.empty()) continue;
      const auto train = result.folds.train_rows(k);
      const auto& model = result.fold_models[static_cast<std::size_t>(k)];
      Eigen::MatrixXd raw_test(static_cast<Eigen::Index>(test.size()), design.X.cols());
      Eigen::MatrixXd raw_train(static_cast<Eigen::Index>(train.size()), design.X.cols());
      for (std::size_t r = 0; r < test.size(); ++r) raw_test.row(static_cast<Eigen::Index>(r)) = design.X.row(static_cast<Eigen::Index>(test[r]));
      for (std::size_t r = 0; r < train.size(); ++r) raw_train.row(static_cast<Eigen::Index>(r)) = design.X.row(static_cast<Eigen::Index>(train[r]));
      const auto local = shap_matrix(model.booster, model.transform(raw_test), model.transform(raw_train));
      for (std::size_t r = 0; r < test.size(); ++r) {
        ShapVector v;
        v.base = local[r].base;
        v.prediction = local[r].prediction;
        v.phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(features.size()));
        for (std::size_t f = 0; f < model.booster.feature_names.size(); ++f) {
          v.phi(static_cast<Eigen::Index>(feature_index.at(model.booster.feature_names[f]))) +=
              local[r].phi(static_cast<Eigen::Index>(f));
        }
        shap[test[r]] = std::move(v);
      }
    }
    const auto importance = importance_summary(features, shap);
    write_text(dir / (cell_stem(i) + "_shap.csv"),
               [&](std::ostream& os) { write_shap_csv(os, design.ids, features, shap); });
    write_text(dir / (cell_stem(i) + "_importance.csv"),
               [&](std::ostream& os) { write_importance_csv(os, importance); });
    sankey.push_back(sankey_triples(spec.label(), importance));

    if (!uses_autoencoder(spec.model)) continue;
    // Latent probes: an encoder fitted on the whole cohort, labels from
    // clinically defined groups.
    const FrozenModel full = fit_frozen_model(spec, design.columns, design.X, design.y, spec.seeds.front());
    const Eigen::MatrixXd z = full.transform(design.X);
    write_text(dir / (cell_stem(i) + "_embeddings.csv"), [&](std::ostream& os) {
      std::vector<std::string> header = {"id"};
      for (Eigen::Index c = 0; c < z.cols(); ++c) header.push_back("latent_" + std::to_string(c));
      csv::write_row(os, header);
      for (Eigen::Index r = 0; r < z.rows(); ++r) {
        std::vector<std::string> row = {design.ids[static_cast<std::size_t>(r)]};
        for (Eigen::Index c = 0; c < z.cols(); ++c) row.push_back(csv::format_number(z(r, c)));
        csv::write_row(os, row);
      }
    });
    std::map<std::string, const ParticipantRecord*> by_id;
    for (const auto& rec : cohort.records) by_id[rec.id] = &rec;
    std::vector<int> high_bmi, insulin_resistant, high_rhr;
    std::vector<double> rhr;
    for (const auto& id : design.ids) {
      const auto& rec = *by_id.at(id);
      high_bmi.push_back(resolve_bmi(rec.demographics).bmi.value_or(0.0) >= cfg.high_bmi ? 1 : 0);
      insulin_resistant.push_back(classify_ir(*homa_ir_of(rec), spec.thresholds) == IrClass::IR ? 1 : 0);
      double sum = 0.0;
      int n = 0;
      for (const auto& d : rec.days) {
        if (d.rhr) {
          sum += *d.rhr;
          ++n;
        }
      }
      rhr.push_back(n > 0 ? sum / n : 0.0);
    }
    const double rhr_median = median_of(rhr);
    for (double v : rhr) high_rhr.push_back(v >= rhr_median ? 1 : 0);
    json p = {{"label", spec.label()}};
    for (const auto& [name, labels] : {std::pair{"high_bmi", &high_bmi}, std::pair{"high_rhr", &high_rhr},
                                       std::pair{"insulin_resistant", &insulin_resistant}}) {
      p[name] = probe_latent_space(z, *labels, cfg.probe);
    }
    probes.push_back(p);
  }
  write_json(dir / "explain.json", {{"sankey", sankey}, {"probes", probes}}, "explain");
  return 0;
}

int cmd_tools(const RunConfig& cfg, bool stdin_mode, bool freeze, const std::string& models) {
  const fs::path model_dir = !models.empty() ? fs::path(models)
                             : !cfg.model_dir.empty() ? cfg.model_dir
                                                      : cfg.output_dir / "models";
  if (freeze) {
    const Cohort cohort = load_records(cfg);
    ensure_dir(model_dir);
    for (const auto& [tool, set] : ToolRegistry::prediction_feature_sets()) {
      ExperimentSpec spec = cfg.experiments.empty() ? ExperimentSpec{} : cfg.experiments.front();
      spec.feature_set = feature_set_by_name(set);
      spec.model = uses_autoencoder(spec.model) ? spec.model : ModelKind::TreeDirect;
      const DesignMatrix design = build_design_matrix(cohort.records, spec.feature_set, spec.window_days);
      const FrozenModel m = fit_frozen_model(spec, design.columns, design.X, design.y, spec.seeds.front());
      std::ofstream(model_dir / (tool + ".json")) << to_json(m).dump(2) << '\n';
    }
  }
  if (!stdin_mode) return 0;
  const ToolRegistry registry = ToolRegistry::from_model_dir(model_dir);
  registry.serve(std::cin, std::cout);
  return 0;
}

// Pooled table plus every experiment compared against the first, from the
// files a previous `grid` wrote.
int cmd_report(const RunConfig& cfg) {
  const fs::path dir = cfg.output_dir / "grid";
  require(fs::exists(dir / "grid_summary.json"), ErrorKind::Io, "no grid output under " + dir.string());
  std::vector<ExperimentResult> results;
  for (std::size_t i = 0;; ++i) {
    const fs::path rep = dir / (cell_stem(i) + "_report.json");
    const fs::path pred = dir / (cell_stem(i) + "_predictions.csv");
    if (!fs::exists(rep)) {
      if (fs::exists(dir / (cell_stem(i + 1) + "_report.json"))) continue;
      break;
    }
    json j;
    std::ifstream(rep) >> j;
    ExperimentResult r;
    r.spec = experiment_spec_from_json(j.at("spec"));
    const auto t = csv::read(pred);
    const auto c_id = t.require_column("id"), c_true = t.require_column("y_true"), c_pred = t.require_column("y_pred"),
               c_fold = t.require_column("fold");
    for (std::size_t row = 0; row < t.rows.size(); ++row) {
      PredictionRow p;
      p.id = t.rows[row][c_id];
      p.y_true = csv::number(t, row, c_true);
      p.y_pred = *csv::number(t, row, c_pred);
      p.fold = static_cast<int>(*csv::number(t, row, c_fold));
      if (p.y_true) p.class_true = classify_ir(HomaIr{*p.y_true}, r.spec.thresholds);
      p.class_pred = classify_ir(HomaIr{p.y_pred}, r.spec.thresholds);
      r.predictions.rows.push_back(std::move(p));
    }
    results.push_back(std::move(r));
  }
  require(!results.empty(), ErrorKind::Io, "grid output holds no experiment reports");

  auto restrict_to = [](const ExperimentResult& r, const std::set<std::string>& ids) {
    ExperimentResult out;
    out.spec = r.spec;
    for (const auto& p : r.predictions.rows) {
      if (ids.count(p.id)) out.predictions.rows.push_back(p);
    }
    const auto yt = out.predictions.y_true();
    const auto yp = out.predictions.y_pred();
    const auto f = out.predictions.folds();
    out.report = evaluate_predictions(yt, yp, f, r.spec.thresholds);
    return out;
  };

  const fs::path out_dir = ensure_dir(cfg.output_dir / "report");
  write_text(out_dir / "summary.csv", [&](std::ostream& os) {
    csv::write_row(os, {"label", "n", "r2", "mae", "mse", "sensitivity", "specificity", "adjusted_specificity",
                        "precision", "auroc", "auprc"});
    auto opt = [](const std::optional<double>& v) { return v ? csv::format_number(*v) : std::string(); };
    for (const auto& r : results) {
      std::set<std::string> ids;
      for (const auto& p : r.predictions.rows) ids.insert(p.id);
      const auto b = restrict_to(r, ids).report.pooled;
      csv::write_row(os, {r.spec.label(), std::to_string(b.n), opt(b.regression.r2), opt(b.regression.mae),
                          opt(b.regression.mse), opt(b.rates.sensitivity), opt(b.rates.specificity),
                          opt(b.rates.adjusted_specificity), opt(b.rates.precision), opt(b.auroc), opt(b.auprc)});
    }
  });

  json comparisons = json::array();
  std::vector<double> p_r2, p_mcnemar;
  for (std::size_t i = 1; i < results.size(); ++i) {
    std::set<std::string> a_ids, common;
    for (const auto& p : results[0].predictions.rows) a_ids.insert(p.id);
    for (const auto& p : results[i].predictions.rows) {
      if (a_ids.count(p.id)) common.insert(p.id);
    }
    const auto c = compare_experiments(restrict_to(results[0], common), restrict_to(results[i], common));
    json cj = to_json(c);
    cj["n_common"] = common.size();
    comparisons.push_back(cj);
    p_r2.push_back(c.fold_r2.p_value);
    p_mcnemar.push_back(c.ir_correctness.p_value);
  }
  if (!comparisons.empty()) {
    const auto adj_r2 = benjamini_hochberg(p_r2);
    const auto adj_mc = benjamini_hochberg(p_mcnemar);
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
      comparisons[i]["fold_r2_wilcoxon"]["p_adjusted"] = adj_r2[i];
      comparisons[i]["ir_mcnemar"]["p_adjusted"] = adj_mc[i];
    }
  }
  write_json(out_dir / "comparisons.json", {{"baseline", results[0].spec.label()}, {"comparisons", comparisons}},
             "report");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"irscreen: insulin-resistance screening from wearables, demographics and routine labs"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("-c,--config", opt.config, "RunConfig JSON file");
  app.add_option("-o,--output", opt.output, "output directory (overrides config and IRSCREEN_OUTPUT_DIR)");
  app.add_option("-d,--data", opt.data, "cohort directory with participants/wearables/labs CSV");
  app.add_option("-j,--workers", opt.workers, "grid worker threads");

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort");
  std::optional<int> synth_n;
  std::optional<std::uint64_t> synth_seed;
  std::string synth_kind, synth_out;
  synth->add_option("--n", synth_n, "participants");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--kind", synth_kind, "calibrated | functional");
  synth->add_option("--out", synth_out, "cohort directory (default <output>/cohort)");

  auto* ingest = app.add_subcommand("ingest", "load and join the cohort files");
  auto* qc = app.add_subcommand("qc", "apply quality-control gates");
  auto* run = app.add_subcommand("run", "cross-validate one experiment and freeze a final model");
  int run_index = 0;
  run->add_option("--experiment", run_index, "index into the configured experiment list");
  auto* grid = app.add_subcommand("grid", "cross-validate every configured experiment");
  auto* robust = app.add_subcommand("robustness", "rolling-window prediction sweeps");
  auto* explain = app.add_subcommand("explain", "SHAP attributions and latent probes");
  auto* tools = app.add_subcommand("tools", "deterministic tool protocol over stdin/stdout");
  bool tools_stdin = false, tools_freeze = false;
  std::string tools_models;
  tools->add_flag("--stdin", tools_stdin, "serve line-delimited JSON requests from stdin");
  tools->add_flag("--freeze", tools_freeze, "fit and write the four prediction models first");
  tools->add_option("--models", tools_models, "directory holding <tool>.json frozen models");
  auto* report = app.add_subcommand("report", "summary table and statistical comparisons of a grid run");

  std::string command = "irscreen";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"error", {{"command", command}, {"kind", "Usage"}, {"message", e.what()}}}}.dump() << '\n';
    return 1;
  }

  try {
    command = app.get_subcommands().front()->get_name();
    const RunConfig cfg = resolve_config(opt);
    if (synth->parsed()) return cmd_synth(cfg, synth_n, synth_seed, synth_kind, synth_out);
    if (ingest->parsed()) return cmd_ingest(cfg);
    if (qc->parsed()) return cmd_qc(cfg);
    if (run->parsed()) return cmd_run(cfg, run_index);
    if (grid->parsed()) return cmd_grid(cfg);
    if (robust->parsed()) return cmd_robustness(cfg);
    if (explain->parsed()) return cmd_explain(cfg);
    if (tools->parsed()) return cmd_tools(cfg, tools_stdin, tools_freeze, tools_models);
    if (report->parsed()) return cmd_report(cfg);
  } catch (const Error& e) {
    std::cerr << json{{"error", {{"command", command}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}}}}
                     .dump(-1, ' ', false, json::error_handler_t::replace)
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"command", command}, {"kind", "Internal"}, {"message", e.what()}}}}
                     .dump(-1, ' ', false, json::error_handler_t::replace)
              << '\n';
    return 1;
  }
  return 1;
}
