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

#include "irscreen/tools.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "irscreen/error.hpp"

namespace irscreen {
namespace {

using nlohmann::json;

// Error raised while validating a request; the code goes to the client as is.
struct ToolError {
  std::string code;
  std::string message;
};

[[noreturn]] void reject(std::string code, std::string message) {
  throw ToolError{std::move(code), std::move(message)};
}

void expect_keys(const json& args, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : args.items()) {
    if (!allowed.count(key)) reject("unknown_argument", "unexpected argument '" + key + "'");
  }
}

double number_arg(const json& args, const std::string& key) {
  const auto it = args.find(key);
  if (it == args.end()) reject("missing_argument", "argument '" + key + "' is required");
  if (!it->is_number()) reject("invalid_type", "argument '" + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) reject("invalid_argument", "argument '" + key + "' must be finite");
  return v;
}

json homa_ir_calculator(const json& args) {
  expect_keys(args, {"insulin", "glucose"});
  const double insulin = number_arg(args, "insulin");
  const double glucose = number_arg(args, "glucose");
  if (insulin < 0 || glucose < 0) reject("domain_error", "insulin and glucose must be non-negative");
  const HomaIr h = compute_homa_ir(insulin, glucose);
  return {{"homa_ir", h.value}, {"class", std::string(to_string(classify_ir(h)))}};
}

json comparison_arithmetic(const json& args) {
  expect_keys(args, {"a", "b"});
  const double a = number_arg(args, "a");
  const double b = number_arg(args, "b");
  if (a == 0.0) reject("domain_error", "relative difference is undefined for a = 0");
  return {{"relative_difference", (b - a) / a}, {"difference", b - a}, {"ratio", b / a}};
}

json percent_change(const json& args) {
  expect_keys(args, {"old", "new"});
  const double before = number_arg(args, "old");
  const double after = number_arg(args, "new");
  if (before == 0.0) reject("domain_error", "percent change is undefined from 0");
  return {{"percent_change", 100.0 * (after - before) / before}};
}

json predict(const FrozenModel& model, const json& args) {
  expect_keys(args, {"features"});
  const auto it = args.find("features");
  if (it == args.end()) reject("missing_argument", "argument 'features' is required");
  if (!it->is_object()) reject("invalid_type", "argument 'features' must be an object");
  const auto& cols = model.input_columns();
  const std::set<std::string> wanted(cols.begin(), cols.end());
  std::string missing, extra;
  for (const auto& c : cols) {
    if (!it->contains(c)) missing += (missing.empty() ? "" : ",") + c;
  }
  for (const auto& [key, value] : it->items()) {
    if (!wanted.count(key)) extra += (extra.empty() ? "" : ",") + key;
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "features do not match model columns";
    if (!missing.empty()) msg += "; missing: " + missing;
    if (!extra.empty()) msg += "; unexpected: " + extra;
    reject("column_mismatch", msg);
  }
  Eigen::MatrixXd row(1, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    row(0, static_cast<Eigen::Index>(c)) = number_arg(*it, cols[c]);
  }
  const double y = model.predict(row)(0);
  if (!std::isfinite(y)) reject("non_finite", "model produced a non-finite prediction");
  const IrClass cls = classify_ir(HomaIr{y}, model.thresholds);
  return {{"homa_ir", y},
          {"class", std::string(to_string(cls))},
          {"insulin_resistant", is_insulin_resistant(cls)},
          {"feature_set", model.feature_set.name},
          {"window_days", model.window_days}};
}

std::string error_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain_error";
    case ErrorKind::ColumnMismatch: return "column_mismatch";
    case ErrorKind::MissingFeature: return "missing_argument";
    case ErrorKind::NonFinite: return "non_finite";
    default: return "internal_error";
  }
}

}  // namespace

const std::vector<std::string>& ToolRegistry::tool_names() {
  static const std::vector<std::string> names = {"homa_ir_calculator",
                                                 "predict_demographics_only",
                                                 "predict_wearables_demographics",
                                                 "predict_wearables_demographics_glucose",
                                                 "predict_wearables_demographics_lipid_metabolic",
                                                 "comparison_arithmetic",
                                                 "percent_change"};
  return names;
}

const std::map<std::string, std::string>& ToolRegistry::prediction_feature_sets() {
  static const std::map<std::string, std::string> m = {
      {"predict_demographics_only", "Demographics"},
      {"predict_wearables_demographics", "Wearables + Demographics"},
      {"predict_wearables_demographics_glucose", "Wearables + Demographics + Glucose"},
      {"predict_wearables_demographics_lipid_metabolic",
       "Wearables + Demographics + Lipid Panel + Metabolic Panel"},
  };
  return m;
}

void ToolRegistry::set_model(const std::string& tool, FrozenModel model) {
  require(prediction_feature_sets().count(tool) > 0, ErrorKind::InvalidArgument,
          "'" + tool + "' is not a prediction tool");
  models_.insert_or_assign(tool, std::move(model));
}

ToolRegistry ToolRegistry::from_model_dir(const std::filesystem::path& dir) {
  ToolRegistry reg;
  for (const auto& [tool, set] : prediction_feature_sets()) {
    const auto path = dir / (tool + ".json");
    if (!std::filesystem::exists(path)) continue;
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    reg.set_model(tool, frozen_model_from_json(j));
  }
  return reg;
}

json ToolRegistry::run_tool(const std::string& tool, const json& args) const {
  if (tool == "homa_ir_calculator") return homa_ir_calculator(args);
  if (tool == "comparison_arithmetic") return comparison_arithmetic(args);
  if (tool == "percent_change") return percent_change(args);
  if (prediction_feature_sets().count(tool)) {
    const auto it = models_.find(tool);
    if (it == models_.end()) reject("model_unavailable", "no frozen model loaded for '" + tool + "'");
    return predict(it->second, args);
  }
  reject("unknown_tool", "unknown tool '" + tool + "'");
}

json ToolRegistry::dispatch(const json& request) const {
  const auto start = std::chrono::steady_clock::now();
  json response;
  response["tool"] = nullptr;
  try {
    if (!request.is_object()) reject("invalid_request", "request must be a JSON object");
    for (const auto& [key, value] : request.items()) {
      if (key != "tool" && key != "args") reject("invalid_request", "unexpected field '" + key + "'");
    }
    const auto t = request.find("tool");
    if (t == request.end()) reject("invalid_request", "field 'tool' is required");
    if (!t->is_string()) reject("invalid_request", "field 'tool' must be a string");
    const std::string tool = t->get<std::string>();
    response["tool"] = tool;
    const auto a = request.find("args");
    if (a != request.end() && !a->is_object()) reject("invalid_request", "field 'args' must be an object");
    const json args = a == request.end() ? json::object() : *a;
    response["result"] = run_tool(tool, args);
    response["ok"] = true;
  } catch (const ToolError& e) {
    response["ok"] = false;
    response["error"] = {{"code", e.code}, {"message", e.message}};
  } catch (const Error& e) {
    response["ok"] = false;
    response["error"] = {{"code", error_code(e.kind())}, {"message", e.what()}};
  } catch (const std::exception& e) {
    response["ok"] = false;
    response["error"] = {{"code", "internal_error"}, {"message", e.what()}};
  }
  response["elapsed_ms"] =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return response;
}

std::string ToolRegistry::dispatch_line(std::string_view line) const {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    json response = {{"ok", false},
                     {"tool", nullptr},
                     {"error", {{"code", "parse_error"}, {"message", e.what()}}},
                     {"elapsed_ms", 0.0}};
    return response.dump(-1, ' ', false, json::error_handler_t::replace);
  }
  return dispatch(request).dump(-1, ' ', false, json::error_handler_t::replace);
}

int ToolRegistry::serve(std::istream& in, std::ostream& out) const {
  int failures = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string response = dispatch_line(line);
    if (response.find("\"ok\":false") != std::string::npos) ++failures;
    out << response << '\n' << std::flush;
  }
  return failures;
}

}  // namespace irscreen
