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

#include "irscreen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "irscreen/csv.hpp"
#include "irscreen/error.hpp"

namespace irscreen {

std::string_view to_string(ModelKind m) {
  switch (m) {
    case ModelKind::TreeDirect: return "tree_direct";
    case ModelKind::LinearDirect: return "linear_direct";
    case ModelKind::AeThenLinear: return "ae_then_linear";
    case ModelKind::MaeThenLinear: return "mae_then_linear";
  }
  return "?";
}

std::string_view to_string(CvScheme c) { return c == CvScheme::KFold5 ? "kfold5" : "loocv"; }

ModelKind parse_model_kind(std::string_view s) {
  for (auto m : {ModelKind::TreeDirect, ModelKind::LinearDirect, ModelKind::AeThenLinear,
                 ModelKind::MaeThenLinear}) {
    if (to_string(m) == s) return m;
  }
  fail(ErrorKind::Config, "unknown model '" + std::string(s) +
                              "' (expected tree_direct, linear_direct, ae_then_linear, mae_then_linear)");
}

CvScheme parse_cv_scheme(std::string_view s) {
  if (s == "kfold5") return CvScheme::KFold5;
  if (s == "loocv") return CvScheme::Loocv;
  fail(ErrorKind::Config, "unknown cv scheme '" + std::string(s) + "' (expected kfold5 or loocv)");
}

GbmParams default_tree_params() {
  GbmParams p;
  p.booster = Booster::Tree;
  p.n_estimators = 100;
  p.learning_rate = 0.1;
  p.reg_lambda = 1.0;
  p.reg_alpha = 0.0;
  p.max_depth = 3;
  return p;
}

GbmParams default_linear_params() {
  GbmParams p;
  p.booster = Booster::Linear;
  p.n_estimators = 100;
  p.learning_rate = 0.51;
  p.reg_lambda = 1.0;
  p.reg_alpha = 0.0;
  return p;
}

std::string ExperimentSpec::label() const {
  return feature_set.name + " | " + std::to_string(window_days) + "d | " + std::string(to_string(model)) +
         " | " + std::string(to_string(cv));
}

void ExperimentSpec::validate() const {
  AggregationWindow{window_days, {}}.validate();
  require(!seeds.empty(), ErrorKind::Config, "at least one seed is required");
  require(cv == CvScheme::KFold5 || !uses_autoencoder(model), ErrorKind::Config,
          "leave-one-out is only supported for direct models");
  require(latent_dim >= 1, ErrorKind::Config, "latent_dim must be >= 1");
  thresholds.validate();
  booster_params().validate();
  ae_config.validate();
}

const GbmParams& ExperimentSpec::booster_params() const {
  return model == ModelKind::TreeDirect ? tree_params : linear_params;
}

namespace {

nlohmann::json to_json(const Standardizer& s) {
  return {{"input_columns", s.input_columns},
          {"kept", s.kept},
          {"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"scale", std::vector<double>(s.scale.data(), s.scale.data() + s.scale.size())},
          {"dropped", s.dropped}};
}

Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.input_columns = j.at("input_columns").get<std::vector<std::string>>();
  s.kept = j.at("kept").get<std::vector<Eigen::Index>>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  s.dropped = j.at("dropped").get<std::vector<std::string>>();
  require(mean.size() == s.kept.size() && scale.size() == s.kept.size(), ErrorKind::Parse,
          "standardizer arrays disagree in length");
  for (auto k : s.kept) {
    require(k >= 0 && k < static_cast<Eigen::Index>(s.input_columns.size()), ErrorKind::Parse,
            "standardizer column index out of range");
  }
  s.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  s.scale = Eigen::Map<const Eigen::VectorXd>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return s;
}

nlohmann::json to_json(const FeatureSetSpec& f) {
  std::vector<std::string> panels;
  for (auto p : f.panels) panels.emplace_back(to_string(p));
  return {{"name", f.name},
          {"panels", panels},
          {"wearable_extras", f.wearable_extras},
          {"metabolic_analytes", f.metabolic_analytes}};
}

FeatureSetSpec feature_set_from_json(const nlohmann::json& j) {
  if (j.is_string()) return feature_set_by_name(j.get<std::string>());
  require(j.is_object(), ErrorKind::Config, "feature_set must be a name or an object");
  std::string name;
  std::vector<Panel> panels;
  std::vector<std::string> extras;
  std::optional<std::vector<std::string>> analytes;
  for (const auto& [key, v] : j.items()) {
    if (key == "name") name = v.get<std::string>();
    else if (key == "panels") {
      for (const auto& p : v) panels.push_back(parse_panel(p.get<std::string>()));
    } else if (key == "wearable_extras") extras = v.get<std::vector<std::string>>();
    else if (key == "metabolic_analytes") analytes = v.get<std::vector<std::string>>();
    else fail(ErrorKind::Config, "unknown feature_set key '" + key + "'");
  }
  if (panels.empty()) return feature_set_by_name(name);
  FeatureSetSpec f(name.empty() ? "custom" : name, std::move(panels));
  f.wearable_extras = std::move(extras);
  if (analytes) f.metabolic_analytes = std::move(*analytes);
  return f;
}

nlohmann::json to_json(const IrThresholds& t) { return {{"is_upper", t.is_upper}, {"ir_lower", t.ir_lower}}; }

IrThresholds thresholds_from_json(const nlohmann::json& j) {
  IrThresholds t;
  for (const auto& [key, v] : j.items()) {
    if (key == "is_upper") t.is_upper = v.get<double>();
    else if (key == "ir_lower") t.ir_lower = v.get<double>();
    else fail(ErrorKind::Config, "unknown thresholds key '" + key + "'");
  }
  t.validate();
  return t;
}

Eigen::MatrixXd select_rows(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Eigen::VectorXd select_entries(const Eigen::Ref<const Eigen::VectorXd>& y, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = y(static_cast<Eigen::Index>(rows[i]));
  return out;
}

}  // namespace

Eigen::MatrixXd FrozenModel::transform(const Eigen::Ref<const Eigen::MatrixXd>& raw) const {
  const Eigen::MatrixXd z = apply_standardizer(standardizer, raw);
  if (encoder) return encode(*encoder, z);
  return z;
}

Eigen::VectorXd FrozenModel::predict(const Eigen::Ref<const Eigen::MatrixXd>& raw) const {
  return gbm_predict(booster, transform(raw));
}

nlohmann::json to_json(const FrozenModel& m) {
  nlohmann::json j;
  j["format"] = "irscreen.model";
  j["version"] = 1;
  j["kind"] = "frozen";
  j["feature_set"] = to_json(m.feature_set);
  j["window_days"] = m.window_days;
  j["thresholds"] = to_json(m.thresholds);
  j["standardizer"] = to_json(m.standardizer);
  j["encoder"] = m.encoder ? to_json(*m.encoder) : nlohmann::json(nullptr);
  j["booster"] = to_json(m.booster);
  return j;
}

FrozenModel frozen_model_from_json(const nlohmann::json& j) {
  require(j.value("format", "") == "irscreen.model" && j.value("kind", "") == "frozen",
          ErrorKind::Parse, "not a serialized frozen model");
  require(j.value("version", 0) == 1, ErrorKind::Parse, "unsupported model version");
  FrozenModel m;
  m.feature_set = feature_set_from_json(j.at("feature_set"));
  m.window_days = j.at("window_days").get<int>();
  m.thresholds = thresholds_from_json(j.at("thresholds"));
  m.standardizer = standardizer_from_json(j.at("standardizer"));
  if (!j.at("encoder").is_null()) m.encoder = autoencoder_from_json(j.at("encoder"));
  m.booster = gbm_from_json(j.at("booster"));
  return m;
}

FrozenModel fit_frozen_model(const ExperimentSpec& spec, const std::vector<std::string>& columns,
                             const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::VectorXd>& y, std::uint64_t seed) {
  FrozenModel m;
  m.feature_set = spec.feature_set;
  m.window_days = spec.window_days;
  m.thresholds = spec.thresholds;
  m.standardizer = fit_standardizer(X, columns);
  require(!m.standardizer.kept.empty(), ErrorKind::EmptyDesign,
          "every feature column is constant on the training rows");
  Eigen::MatrixXd inputs = apply_standardizer(m.standardizer, X);
  std::vector<std::string> names = m.standardizer.output_columns();

  if (uses_autoencoder(spec.model)) {
    const auto mlp = MlpSpec::default_for(static_cast<int>(inputs.cols()), spec.latent_dim, seed);
    MaeTrainConfig cfg = spec.ae_config;
    cfg.seed = seed;
    if (spec.model == ModelKind::AeThenLinear) cfg.mask_prob = 0.0;
    auto trained = train_autoencoder<double>(inputs, mlp, cfg);
    inputs = encode(trained.model, inputs);
    m.encoder = std::move(trained.model);
    names.clear();
    for (Eigen::Index k = 0; k < inputs.cols(); ++k) names.push_back("latent_" + std::to_string(k));
  }

  GbmParams params = spec.booster_params();
  params.random_state = seed;
  if (spec.tune) params = tune_gbm(inputs, y, params, compact_grid(params.booster), 3, seed);
  m.booster = fit_gbm(inputs, y, params, names);
  return m;
}

std::vector<double> PredictionSet::y_true() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    require(r.y_true.has_value(), ErrorKind::InvalidArgument, "prediction for " + r.id + " has no truth");
    out.push_back(*r.y_true);
  }
  return out;
}

std::vector<double> PredictionSet::y_pred() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.y_pred);
  return out;
}

std::vector<int> PredictionSet::folds() const {
  std::vector<int> out;
  for (const auto& r : rows) out.push_back(r.fold);
  return out;
}

void write_predictions_csv(std::ostream& out, const PredictionSet& p) {
  csv::write_row(out, {"id", "y_true", "y_pred", "fold", "class_true", "class_pred"});
  for (const auto& r : p.rows) {
    csv::write_row(out, {r.id, r.y_true ? csv::format_number(*r.y_true) : "",
                         csv::format_number(r.y_pred), std::to_string(r.fold),
                         r.class_true ? std::string(to_string(*r.class_true)) : "",
                         std::string(to_string(r.class_pred))});
  }
}

ExperimentResult run_experiment(const DesignMatrix& design, const ExperimentSpec& spec, int repeat) {
  spec.validate();
  require(design.rows() > 0, ErrorKind::EmptyDesign, "design matrix has no rows");
  require(repeat >= 0, ErrorKind::InvalidArgument, "repeat index must be >= 0");
  const auto n = static_cast<std::size_t>(design.rows());
  const int k = spec.cv == CvScheme::Loocv ? static_cast<int>(n) : 5;
  const std::size_t ns = spec.seeds.size();

  ExperimentResult res;
  res.spec = spec;
  res.columns = design.columns;
  std::vector<int> strata;
  if (spec.stratified_folds) {
    for (Eigen::Index i = 0; i < design.y.size(); ++i) {
      strata.push_back(static_cast<int>(classify_ir(HomaIr{design.y(i)}, spec.thresholds)));
    }
  }
  res.folds = make_folds(n, k, spec.seeds[static_cast<std::size_t>(repeat) % ns],
                         spec.stratified_folds ? std::optional<std::span<const int>>(strata) : std::nullopt);

  res.predictions.rows.resize(n);
  for (int f = 0; f < k; ++f) {
    const auto train = res.folds.train_rows(f), test = res.folds.test_rows(f);
    const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(repeat + f) % ns];
    FrozenModel fm = fit_frozen_model(spec, design.columns, select_rows(design.X, train),
                                      select_entries(design.y, train), seed);
    const Eigen::VectorXd pred = fm.predict(select_rows(design.X, test));
    for (std::size_t i = 0; i < test.size(); ++i) {
      const std::size_t r = test[i];
      const double yt = design.y(static_cast<Eigen::Index>(r));
      auto& row = res.predictions.rows[r];
      row.id = design.ids[r];
      row.y_true = yt;
      row.y_pred = pred(static_cast<Eigen::Index>(i));
      row.fold = f;
      row.class_true = classify_ir(HomaIr{yt}, spec.thresholds);
      row.class_pred = classify_ir(HomaIr{row.y_pred}, spec.thresholds);
    }
    res.fold_models.push_back(std::move(fm));
  }
  const auto yt = res.predictions.y_true(), yp = res.predictions.y_pred();
  const auto fl = res.predictions.folds();
  res.report = evaluate_predictions(yt, yp, fl, spec.thresholds);
  return res;
}

ExperimentResult run_experiment(std::span<const ParticipantRecord> records, const ExperimentSpec& spec,
                                int repeat) {
  const DesignMatrix design = build_design_matrix(records, spec.feature_set, spec.window_days);
  ExperimentResult res = run_experiment(design, spec, repeat);
  const std::set<std::string> kept(design.ids.begin(), design.ids.end());
  for (const auto& r : records) {
    if (!kept.contains(r.id)) res.skipped_ids.push_back(r.id);
  }
  return res;
}

nlohmann::json report_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["label"] = r.spec.label();
  j["spec"] = to_json(r.spec);
  j["n"] = r.predictions.rows.size();
  j["columns"] = r.columns;
  j["skipped_ids"] = r.skipped_ids;
  j["fold_sizes"] = r.folds.fold_sizes();
  nlohmann::json dropped = nlohmann::json::array();
  for (const auto& m : r.fold_models) dropped.push_back(m.standardizer.dropped);
  j["dropped_columns_per_fold"] = dropped;
  j["metrics"] = to_json(r.report);
  return j;
}

std::vector<StratumBlock> stratified_evaluation(const ExperimentResult& r,
                                                std::span<const ParticipantRecord> records) {
  std::map<std::string, const ParticipantRecord*> by_id;
  for (const auto& rec : records) by_id[rec.id] = &rec;
  // axis -> stratum -> (y_true, y_pred)
  std::map<std::string, std::map<std::string, std::pair<std::vector<double>, std::vector<double>>>> groups;
  for (const auto& row : r.predictions.rows) {
    const auto it = by_id.find(row.id);
    if (it == by_id.end() || !row.y_true) continue;
    const ParticipantRecord& rec = *it->second;
    std::optional<double> steps;
    if (rec.labs) steps = median_daily_steps(rec.days, AggregationWindow{r.spec.window_days, rec.labs->draw_date});
    const Strata s = derive_strata(rec.demographics, steps);
    for (const auto& [axis, label] : {std::pair{std::string("bmi"), std::string(to_string(s.bmi))},
                                      std::pair{std::string("activity"), std::string(to_string(s.activity))}}) {
      auto& g = groups[axis][label];
      g.first.push_back(*row.y_true);
      g.second.push_back(row.y_pred);
    }
  }
  std::vector<StratumBlock> out;
  for (const auto& [axis, strata] : groups) {
    for (const auto& [label, g] : strata) {
      if (g.first.size() < 2) continue;
      const std::vector<int> fold(g.first.size(), 0);
      out.push_back({axis, label, evaluate_predictions(g.first, g.second, fold, r.spec.thresholds).pooled});
    }
  }
  return out;
}

nlohmann::json to_json(const std::vector<StratumBlock>& strata) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : strata) j.push_back({{"axis", s.axis}, {"stratum", s.stratum}, {"metrics", to_json(s.metrics)}});
  return j;
}

std::vector<GridCell> run_experiment_grid(std::span<const ParticipantRecord> records,
                                          const std::vector<ExperimentSpec>& specs, int workers) {
  std::vector<GridCell> cells(specs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      cells[i].spec = specs[i];
      try {
        cells[i].result = run_experiment(records, specs[i]);
      } catch (const std::exception& e) {
        cells[i].error = e.what();
      }
    }
  };
  const int n_threads = std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(specs.size(), 1)));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  }
  return cells;
}

PredictionSet predict_and_classify(const FrozenModel& model, std::span<const ParticipantRecord> records) {
  const auto& cols = model.input_columns();
  Eigen::MatrixXd X(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(cols.size()));
  PredictionSet out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto values = feature_values(rec, model.feature_set, model.window_days);
    std::vector<std::string> missing;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (!values || !values->contains(cols[c])) {
        missing.push_back(cols[c]);
        continue;
      }
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = values->at(cols[c]);
    }
    if (!missing.empty()) {
      std::string msg = "participant " + rec.id + " cannot be scored; the model requires columns [";
      for (std::size_t c = 0; c < cols.size(); ++c) msg += (c ? ", " : "") + cols[c];
      msg += "]";
      fail(ErrorKind::MissingFeature, msg);
    }
    PredictionRow row;
    row.id = rec.id;
    if (const auto h = homa_ir_of(rec)) {
      row.y_true = h->value;
      row.class_true = classify_ir(*h, model.thresholds);
    }
    out.rows.push_back(std::move(row));
  }
  const Eigen::VectorXd pred = model.predict(X);
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    out.rows[i].y_pred = pred(static_cast<Eigen::Index>(i));
    out.rows[i].class_pred = classify_ir(HomaIr{out.rows[i].y_pred}, model.thresholds);
  }
  return out;
}

std::vector<GbmParams> ParamGrid::expand(const GbmParams& base) const {
  auto or_base = [](const auto& v, auto b) { return v.empty() ? std::vector<decltype(b)>{b} : v; };
  const auto ne = or_base(n_estimators, base.n_estimators);
  const auto lr = or_base(learning_rate, base.learning_rate);
  const auto rl = or_base(reg_lambda, base.reg_lambda);
  const auto ra = or_base(reg_alpha, base.reg_alpha);
  const auto md = base.booster == Booster::Tree ? or_base(max_depth, base.max_depth) : std::vector<int>{base.max_depth};
  std::vector<GbmParams> out;
  for (int a : ne) for (double b : lr) for (double c : rl) for (double d : ra) for (int e : md) {
    GbmParams p = base;
    p.n_estimators = a;
    p.learning_rate = b;
    p.reg_lambda = c;
    p.reg_alpha = d;
    p.max_depth = e;
    out.push_back(p);
  }
  return out;
}

const ParamGrid& paper_linear_grid() {
  static const ParamGrid g{{5, 10, 15, 25, 50, 85, 100, 125, 150, 200},
                           {0.01, 0.05, 0.09, 0.1, 0.15, 0.19, 0.21, 0.25, 0.29, 0.31, 0.35, 0.39, 0.41, 0.45, 0.51},
                           {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                           {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                           {}};
  return g;
}

const ParamGrid& paper_tree_grid() {
  static const ParamGrid g{{50, 100, 200},
                           {0.01, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5},
                           {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                           {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0},
                           {1, 2, 3, 5, 7}};
  return g;
}

const ParamGrid& compact_grid(Booster b) {
  static const ParamGrid linear{{50, 100}, {0.1, 0.51}, {0.0, 1.0}, {0.0}, {}};
  static const ParamGrid tree{{50, 100}, {0.1, 0.3}, {1.0}, {0.0}, {2, 3}};
  return b == Booster::Tree ? tree : linear;
}

GbmParams tune_gbm(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y,
                   const GbmParams& base, const ParamGrid& grid, int inner_folds, std::uint64_t seed) {
  const auto candidates = grid.expand(base);
  const auto folds = make_folds(static_cast<std::size_t>(X.rows()), inner_folds, seed);
  GbmParams best = base;
  double best_mse = std::numeric_limits<double>::infinity();
  for (const auto& p : candidates) {
    double sse = 0.0;
    for (int f = 0; f < inner_folds; ++f) {
      const auto tr = folds.train_rows(f), te = folds.test_rows(f);
      const auto model = fit_gbm(select_rows(X, tr), select_entries(y, tr), p);
      const Eigen::VectorXd err = gbm_predict(model, select_rows(X, te)) - select_entries(y, te);
      sse += err.squaredNorm();
    }
    const double mse = sse / static_cast<double>(X.rows());
    if (mse < best_mse) {
      best_mse = mse;
      best = p;
    }
  }
  return best;
}

ExperimentComparison compare_experiments(const ExperimentResult& a, const ExperimentResult& b) {
  std::map<std::string, const PredictionRow*> rows_b;
  for (const auto& r : b.predictions.rows) rows_b[r.id] = &r;
  require(a.predictions.rows.size() == rows_b.size(), ErrorKind::InvalidArgument,
          "experiments cover different participants");
  ExperimentComparison c;
  c.first = a.spec.label();
  c.second = b.spec.label();
  long disc_b = 0, disc_c = 0;
  for (const auto& ra : a.predictions.rows) {
    const auto it = rows_b.find(ra.id);
    require(it != rows_b.end(), ErrorKind::InvalidArgument, "participant " + ra.id + " missing from second experiment");
    const auto& rb = *it->second;
    const bool truth_ir = ra.class_true == IrClass::IR;
    const bool pa = ra.class_pred == IrClass::IR, pb = rb.class_pred == IrClass::IR;
    const bool ok_a = pa == truth_ir, ok_b = pb == truth_ir;
    if (ok_a && !ok_b) ++disc_b;
    if (!ok_a && ok_b) ++disc_c;
    if (truth_ir && pa) ++c.first_ir_identified;
    if (truth_ir && pb) ++c.second_ir_identified;
  }
  c.ir_correctness = mcnemar(disc_b, disc_c);
  std::vector<double> r2a, r2b;
  for (const auto& f : a.report.folds) {
    if (f.regression.r2) r2a.push_back(*f.regression.r2);
  }
  for (const auto& f : b.report.folds) {
    if (f.regression.r2) r2b.push_back(*f.regression.r2);
  }
  if (!r2a.empty() && !r2b.empty()) c.fold_r2 = wilcoxon_rank_sum(r2a, r2b);
  return c;
}

nlohmann::json to_json(const ExperimentComparison& c) {
  return {{"first", c.first},
          {"second", c.second},
          {"fold_r2_wilcoxon", {{"rank_sum", c.fold_r2.rank_sum}, {"z", c.fold_r2.z},
                                {"p_value", c.fold_r2.p_value}, {"exact", c.fold_r2.exact},
                                {"all_ties", c.fold_r2.all_ties}}},
          {"ir_mcnemar", {{"b", c.ir_correctness.b}, {"c", c.ir_correctness.c}, {"chi2", c.ir_correctness.chi2},
                          {"p_value", c.ir_correctness.p_value}, {"degenerate", c.ir_correctness.degenerate}}},
          {"first_ir_identified", c.first_ir_identified},
          {"second_ir_identified", c.second_ir_identified}};
}

nlohmann::json to_json(const ExperimentSpec& s) {
  return {{"feature_set", to_json(s.feature_set)},
          {"window_days", s.window_days},
          {"model", to_string(s.model)},
          {"cv", to_string(s.cv)},
          {"seeds", s.seeds},
          {"thresholds", to_json(s.thresholds)},
          {"tree_params", to_json(s.tree_params)},
          {"linear_params", to_json(s.linear_params)},
          {"autoencoder", to_json(s.ae_config)},
          {"latent_dim", s.latent_dim},
          {"stratified_folds", s.stratified_folds},
          {"tune", s.tune}};
}

ExperimentSpec experiment_spec_from_json(const nlohmann::json& j, const ExperimentSpec& defaults) {
  require(j.is_object(), ErrorKind::Config, "experiment spec must be an object");
  ExperimentSpec s = defaults;
  bool has_features = false;
  for (const auto& [key, v] : j.items()) {
    if (key == "feature_set") {
      s.feature_set = feature_set_from_json(v);
      has_features = true;
    } else if (key == "window_days") s.window_days = v.get<int>();
    else if (key == "model") s.model = parse_model_kind(v.get<std::string>());
    else if (key == "cv") s.cv = parse_cv_scheme(v.get<std::string>());
    else if (key == "seeds") s.seeds = v.get<std::vector<std::uint64_t>>();
    else if (key == "thresholds") s.thresholds = thresholds_from_json(v);
    else if (key == "tree_params") s.tree_params = gbm_params_from_json(v, s.tree_params);
    else if (key == "linear_params") s.linear_params = gbm_params_from_json(v, s.linear_params);
    else if (key == "autoencoder") s.ae_config = mae_config_from_json(v, s.ae_config);
    else if (key == "latent_dim") s.latent_dim = v.get<int>();
    else if (key == "stratified_folds") s.stratified_folds = v.get<bool>();
    else if (key == "tune") s.tune = v.get<bool>();
    else fail(ErrorKind::Config, "unknown experiment key '" + key + "'");
  }
  require(has_features || !s.feature_set.panels.empty(), ErrorKind::Config,
          "experiment spec needs a feature_set");
  s.tree_params.booster = Booster::Tree;
  s.linear_params.booster = Booster::Linear;
  s.validate();
  return s;
}

}  // namespace irscreen
