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


// Small hand-built records shared by the unit tests.

#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "irscreen/domain.hpp"

namespace fixture {

inline irscreen::Date day(int offset) {
  return irscreen::parse_date("2024-01-01") + std::chrono::days(offset);
}

/// One participant with `n_days` daily rows ending the day before the draw.
inline irscreen::ParticipantRecord record(const std::string& id, double bmi, double insulin, double glucose,
                                          int n_days = 30, double steps = 6000.0, double rhr = 60.0) {
  irscreen::ParticipantRecord r;
  r.id = id;
  r.demographics.age = 45.0;
  r.demographics.bmi = bmi;
  r.demographics.gender = "female";
  r.demographics.ethnicity = "other";
  for (int i = 0; i < n_days; ++i) {
    irscreen::WearableDaily d;
    d.date = day(i);
    d.rhr = rhr;
    d.hrv_rmssd = 40.0;
    d.steps = steps;
    d.sleep_minutes = 420.0;
    r.days.push_back(d);
  }
  irscreen::BloodPanel b;
  b.fasting_insulin = insulin;
  b.fasting_glucose = glucose;
  b.hba1c = 5.4;
  b.hdl = 50.0;
  b.ldl = 100.0;
  b.triglycerides = 120.0;
  b.total_cholesterol = 190.0;
  b.draw_date = day(n_days);
  r.labs = b;
  return r;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("irscreen_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace fixture
