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
#include <random>

#include "fixtures.hpp"
#include "irscreen/error.hpp"
#include "irscreen/ingestion.hpp"

using namespace irscreen;

TEST_CASE("HOMA-IR formula") {
  CHECK(compute_homa_ir(0.0, 90.0).value == 0.0);
  CHECK(compute_homa_ir(10.0, 90.0).value == doctest::Approx(2.2222222222).epsilon(1e-10));
  // insulin solved from the target value round-trips
  const double insulin = 2.9 * 405.0 / 90.0;
  CHECK(insulin == doctest::Approx(13.05));
  CHECK(compute_homa_ir(insulin, 90.0).value == doctest::Approx(2.9).epsilon(1e-14));
  CHECK_THROWS_AS(compute_homa_ir(-1.0, 90.0), Error);
  CHECK_THROWS_AS(compute_homa_ir(1.0, -90.0), Error);
}

TEST_CASE("IR classes and thresholds") {
  CHECK(classify_ir(HomaIr{1.49}) == IrClass::IS);
  CHECK(classify_ir(HomaIr{1.5}) == IrClass::ImpairedIS);
  CHECK(classify_ir(HomaIr{2.0}) == IrClass::ImpairedIS);
  CHECK(classify_ir(HomaIr{2.9}) == IrClass::IR);
  CHECK_THROWS_AS((IrThresholds{3.0, 2.0}.validate()), Error);
  CHECK_THROWS_AS((IrThresholds{0.0, 2.0}.validate()), Error);
  CHECK(classify_ir(HomaIr{2.5}, IrThresholds{1.0, 2.0}) == IrClass::IR);
}

TEST_CASE("classification matches the threshold definition on random inputs") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ins(0.0, 40.0), glu(60.0, 200.0);
  for (int i = 0; i < 5000; ++i) {
    const HomaIr h = compute_homa_ir(ins(rng), glu(rng));
    REQUIRE(h.value >= 0.0);
    const IrClass c = classify_ir(h);
    CHECK((c == IrClass::IS) == (h.value < 1.5));
    CHECK((c == IrClass::IR) == (h.value >= 2.9));
  }
}

TEST_CASE("BMI and activity strata") {
  Demographics d;
  d.bmi = 32.6;
  auto s = derive_strata(d, 5596.0);
  CHECK(s.bmi == BmiClass::Obese);
  CHECK(s.activity == ActivityClass::Low);
  d.bmi = 24.9;
  s = derive_strata(d, 4999.0);
  CHECK(s.bmi == BmiClass::Normal);
  CHECK(s.activity == ActivityClass::Sedentary);
  d.bmi = 30.0;
  s = derive_strata(d, 12500.0);
  CHECK(s.bmi == BmiClass::Obese);
  CHECK(s.activity == ActivityClass::Highly);
  CHECK(derive_strata(Demographics{}, std::nullopt).activity == ActivityClass::Unknown);
}

TEST_CASE("BMI from height and weight takes precedence") {
  Demographics d;
  d.height_m = 2.0;
  d.weight_kg = 100.0;
  d.bmi = 30.0;
  const auto r = resolve_bmi(d);
  CHECK(*r.bmi == doctest::Approx(25.0));
  CHECK(r.conflict);
}

namespace {

void write(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kParticipants =
    "id,age,gender,ethnicity,height_m,weight_kg,bmi,hypertension,fasting\n"
    "p1,40,female,other,1.7,70,,0,1\n"
    "p2,55,male,other,,,31.0,1,1\n";
const char* kWearables =
    "id,date,rhr,hrv_rmssd,steps,sleep_minutes\n"
    "p1,2024-01-01,60,40,7000,400\n"
    "p1,2024-01-02,61,41,8000,410\n"
    "p2,2024-01-01,70,30,4000,380\n";
const char* kLabs =
    "id,draw_date,insulin,glucose,hba1c,hdl,ldl,triglycerides,total_cholesterol\n"
    "p1,2024-01-10,10,90,5.4,50,100,120,190\n"
    "p2,2024-01-10,20,110,6.0,40,130,200,220\n";

}  // namespace

TEST_CASE("cohort files load and join") {
  fixture::TempDir dir("ingest");
  write(dir.path / "participants.csv", kParticipants);
  write(dir.path / "wearables.csv", kWearables);
  write(dir.path / "labs.csv", kLabs);
  const auto records = load_cohort(CohortFiles::in_directory(dir.path));
  REQUIRE(records.size() == 2);
  CHECK(records[0].id == "p1");
  CHECK(records[0].days.size() == 2);
  CHECK(homa_ir_of(records[1])->value == doctest::Approx(20.0 * 110.0 / 405.0));

  SUBCASE("duplicate participant-date is a parse error") {
    write(dir.path / "wearables.csv", std::string(kWearables) + "p1,2024-01-02,62,40,9000,400\n");
    try {
      load_cohort(CohortFiles::in_directory(dir.path));
      FAIL("expected a parse error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
    }
  }
  SUBCASE("labs for an unknown participant is a join error") {
    write(dir.path / "labs.csv", std::string(kLabs) + "p9,2024-01-10,10,90,5.4,50,100,120,190\n");
    try {
      load_cohort(CohortFiles::in_directory(dir.path));
      FAIL("expected a join error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Join);
    }
  }
  SUBCASE("negative concentrations are rejected") {
    write(dir.path / "labs.csv",
          "id,draw_date,insulin,glucose,hba1c,hdl,ldl,triglycerides,total_cholesterol\n"
          "p1,2024-01-10,-10,90,5.4,50,100,120,190\n");
    CHECK_THROWS_AS(load_cohort(CohortFiles::in_directory(dir.path)), Error);
  }
  SUBCASE("missing file is an io error") {
    std::filesystem::remove(dir.path / "labs.csv");
    try {
      load_cohort(CohortFiles::in_directory(dir.path));
      FAIL("expected an io error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Io);
    }
  }
}

TEST_CASE("quality control gates") {
  std::vector<ParticipantRecord> rs;
  rs.push_back(fixture::record("ok", 25.0, 2.0 * 405.0 / 90.0, 90.0, 14));
  rs.push_back(fixture::record("bmi_high", 70.0, 10.0, 90.0));
  rs.push_back(fixture::record("bmi_low", 11.0, 10.0, 90.0));
  rs.push_back(fixture::record("homa15", 25.0, 15.0 * 405.0 / 90.0, 90.0));
  rs.push_back(fixture::record("few_days", 25.0, 10.0, 90.0, 13));
  auto not_fasting = fixture::record("not_fasting", 25.0, 10.0, 90.0);
  not_fasting.labs->fasting_flag = false;
  rs.push_back(not_fasting);
  auto no_insulin = fixture::record("no_insulin", 25.0, 10.0, 90.0);
  no_insulin.labs->fasting_insulin.reset();
  rs.push_back(no_insulin);

  const auto [kept, report] = apply_quality_control(rs);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].id == "ok");
  CHECK(report.input_n == 7);
  CHECK(report.retained_n == 1);
  CHECK(report.bmi_out_of_range == 2);
  CHECK(report.homa_outlier == 1);
  CHECK(report.insufficient_wearable_days == 1);
  CHECK(report.not_fasting == 1);
  CHECK(report.missing_required_fields == 1);
  CHECK(report.retained_n + report.excluded.size() >= report.input_n);
  for (const auto& [id, reason] : report.excluded) {
    if (id == "bmi_high") CHECK(reason == ExclusionReason::BmiOutOfRange);
    if (id == "homa15") CHECK(reason == ExclusionReason::HomaOutlier);
  }
  // QC is idempotent
  const auto again = apply_quality_control(kept).second;
  CHECK(again.retained_n == 1);
}
