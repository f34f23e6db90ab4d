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

// Deterministic tool layer spoken over line-delimited JSON.
//
//   request:  {"tool": "<name>", "args": {...}}
//   response: {"ok": true,  "tool": "<name>", "result": {...}, "elapsed_ms": t}
//             {"ok": false, "tool": "<name>"|null, "error": {"code", "message"}, "elapsed_ms": t}

#include <filesystem>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "irscreen/pipeline.hpp"

namespace irscreen {

class ToolRegistry {
 public:
  static const std::vector<std::string>& tool_names();
  /// Prediction tools and the feature set each expects.
  static const std::map<std::string, std::string>& prediction_feature_sets();

  void set_model(const std::string& tool, FrozenModel model);
  bool has_model(const std::string& tool) const { return models_.count(tool) > 0; }

  /// Loads "<tool>.json" for every prediction tool present in `dir`.
  static ToolRegistry from_model_dir(const std::filesystem::path& dir);

  /// Never throws; failures become structured error responses.
  nlohmann::json dispatch(const nlohmann::json& request) const;
  std::string dispatch_line(std::string_view line) const;
  /// Serial request/response loop until end of input. Returns the count of
  /// requests answered with ok=false.
  int serve(std::istream& in, std::ostream& out) const;

 private:
  nlohmann::json run_tool(const std::string& tool, const nlohmann::json& args) const;

  std::map<std::string, FrozenModel> models_;
};

}  // namespace irscreen
