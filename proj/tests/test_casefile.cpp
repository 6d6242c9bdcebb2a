#include <gtest/gtest.h>

#include <json.hpp>

#include "chartreview/casefile.hpp"
#include "chartreview/error.hpp"
#include "support.hpp"

using namespace chartreview;
using nlohmann::json;
using testsupport::TempDir;

namespace {

const Dataset& bundled() {
  static Dataset d = load_dataset(testsupport::data_dir());
  return d;
}

json minimal_case(const std::string& id) {
  return {{"case_id", id},
          {"disciplines", {"Medicine"}},
          {"clinical_note", "note"},
          {"allergies", json::array()},
          {"medications", {{{"name", "Aspirin"}, {"dose", "100 mg"}, {"route", "PO"}, {"frequency", "OM"}}}}};
}

}  // namespace

TEST(Cases, BundledCount) {
  EXPECT_EQ(bundled().cases.size(), 23u);
  const auto* c1 = find_case(bundled().cases, "1");
  ASSERT_NE(c1, nullptr);
  EXPECT_EQ(c1->medications.size(), 13u);
  EXPECT_EQ(c1->disciplines.front(), "Cardiology");
}

TEST(Cases, OrderedByCaseId) {
  const auto& cs = bundled().cases;
  EXPECT_EQ(cs.front().case_id, "1");
  EXPECT_EQ(cs[1].case_id, "2");
  EXPECT_EQ(cs.back().case_id, "23");
}

TEST(Cases, MedicationWithoutNameIsASchemaError) {
  TempDir dir;
  auto c = minimal_case("7");
  c["medications"][0].erase("name");
  testsupport::write(dir / "c.json", c.dump());
  try {
    load_cases(dir / "c.json");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.pointer(), "/medications/0/name");
  }
}

TEST(Cases, DuplicateCaseId) {
  TempDir dir;
  testsupport::write(dir / "a.json", json::array({minimal_case("1"), minimal_case("1")}).dump());
  EXPECT_THROW(load_cases(dir.path()), Error);
}

TEST(GroundTruth, BundledCounts) {
  EXPECT_EQ(bundled().drps.size(), 61u);
  EXPECT_TRUE(drps_for_case(bundled().drps, "4").empty());
  EXPECT_TRUE(drps_for_case(bundled().drps, "15").empty());
  EXPECT_EQ(drps_for_case(bundled().drps, "1").size(), 4u);
}

TEST(GroundTruth, DanglingCaseId) {
  TempDir dir;
  json d = {{"drp_id", "X-1"}, {"case_id", "99"}, {"category", "Allergy"}, {"severity", "Minor"},
            {"description", "x"}, {"involved_drugs", {"Aspirin"}}};
  testsupport::write(dir / "gt.json", json::array({d}).dump());
  try {
    load_ground_truth(dir / "gt.json", bundled().cases);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownCase);
  }
}

TEST(GroundTruth, ControlCaseMustHaveNoDrps) {
  TempDir dir;
  json d = {{"drp_id", "X-1"}, {"case_id", "4"}, {"category", "Allergy"}, {"severity", "Minor"},
            {"description", "x"}, {"involved_drugs", {"Aspirin"}}};
  testsupport::write(dir / "gt.json", json::array({d}).dump());
  EXPECT_THROW(load_ground_truth(dir / "gt.json", bundled().cases), SchemaError);
}

TEST(GroundTruth, UnknownCategory) {
  TempDir dir;
  json d = {{"drp_id", "X-1"}, {"case_id", "1"}, {"category", "Wrongness"}, {"severity", "Minor"},
            {"description", "x"}, {"involved_drugs", {"Aspirin"}}};
  testsupport::write(dir / "gt.json", json::array({d}).dump());
  try {
    load_ground_truth(dir / "gt.json", bundled().cases);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.pointer(), "/0/category");
  }
}

TEST(Stats, BundledSeverities) {
  auto s = dataset_stats(bundled().cases, bundled().drps);
  EXPECT_EQ(s.n_cases, 23u);
  EXPECT_EQ(s.n_drps, 61u);
  EXPECT_EQ(s.n_control, 2u);
  EXPECT_EQ(s.severity_histogram.at(Severity::Serious), 18u);
  EXPECT_EQ(s.severity_histogram.at(Severity::Moderate), 31u);
  EXPECT_EQ(s.severity_histogram.at(Severity::Minor), 11u);
  EXPECT_EQ(s.severity_histogram.at(Severity::NoHarm), 1u);
  EXPECT_NEAR(s.severity_percent(Severity::Serious), 29.5, 0.05);
  EXPECT_NEAR(s.severity_percent(Severity::Moderate), 50.8, 0.05);
  // Minor plus no-harm is 19.7%; the published summary rounds it to 19.2%.
  EXPECT_NEAR(s.severity_percent(Severity::Minor) + s.severity_percent(Severity::NoHarm), 19.7, 0.05);
  EXPECT_DOUBLE_EQ(s.medications_per_case.median, 12.0);
  EXPECT_DOUBLE_EQ(s.medications_per_case.q1, 10.0);
  EXPECT_DOUBLE_EQ(s.medications_per_case.q3, 14.5);
}

TEST(Stats, SingleModerateDrp) {
  auto c = case_from_json(minimal_case("1"));
  GroundTruthDrp d;
  d.drp_id = "1-1";
  d.case_id = "1";
  d.severity = Severity::Moderate;
  auto s = dataset_stats({c}, {d});
  EXPECT_EQ(s.severity_histogram.at(Severity::Moderate), 1u);
  EXPECT_EQ(s.severity_histogram.count(Severity::Serious) ? s.severity_histogram.at(Severity::Serious) : 0u, 0u);
  EXPECT_DOUBLE_EQ(s.severity_percent(Severity::Minor), 0.0);
}

TEST(Stats, EmptyDataset) {
  try {
    dataset_stats({}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

TEST(Stats, QuartileInterpolation) {
  auto q = quartiles({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(q.q1, 1.75);
  EXPECT_DOUBLE_EQ(q.median, 2.5);
  EXPECT_DOUBLE_EQ(q.q3, 3.25);
}

TEST(Enums, LenientParsing) {
  EXPECT_EQ(parse_category("drug-drug interaction"), DrpCategory::DrugDrugInteraction);
  EXPECT_EQ(parse_category("OMISSION_OF_THERAPY"), DrpCategory::OmissionOfTherapy);
  EXPECT_EQ(parse_category("bogus"), std::nullopt);
  EXPECT_EQ(parse_severity("no harm"), Severity::NoHarm);
  for (auto c : kAllCategories) EXPECT_EQ(parse_category(category_name(c)), c);
}

TEST(Cases, JsonRoundTrip) {
  const auto& c = *find_case(bundled().cases, "1");
  auto back = case_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
}
