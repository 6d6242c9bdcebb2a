#include <gtest/gtest.h>

#include <sstream>

#include "chartreview/error.hpp"
#include "chartreview/json_schema.hpp"
#include "chartreview/report.hpp"
#include "chartreview/text.hpp"
#include "support.hpp"

using namespace chartreview;
using nlohmann::json;

namespace {

struct Fixture {
  Corpus corpus = load_corpus(testsupport::data_dir() / "corpus");
  Dataset dataset = load_dataset(testsupport::data_dir());
  json schema = json::parse(read_file(testsupport::source_dir() / "docs" / "report.schema.json"));
};

const Fixture& fx() {
  static Fixture f;
  return f;
}

DrpFinding finding(std::vector<std::string> drugs, DrpCategory cat, std::string action) {
  DrpFinding f;
  f.drug_names = std::move(drugs);
  f.category = cat;
  f.action_text = std::move(action);
  return f;
}

// Two configurations over cases 1 and 4, three replicates each.
std::vector<EvalItem> two_configs() {
  std::vector<EvalItem> items;
  for (const char* label : {"v1", "v2"}) {
    for (int rep = 1; rep <= 3; ++rep) {
      for (const char* cid : {"1", "4"}) {
        EvalItem it;
        it.id = std::string(label) + "-" + cid + "-r" + std::to_string(rep);
        it.case_id = cid;
        it.mode = "RagLlmAutonomous";
        it.label = label;
        it.replicate = rep;
        if (std::string(cid) == "1") {
          it.findings.push_back(finding({"Aspirin"}, DrpCategory::Allergy, "stop aspirin"));
          if (std::string(label) == "v2" || rep == 2) {
            it.findings.push_back(finding({"Enoxaparin"}, DrpCategory::InappropriateDosageRegimen, "reduce dose"));
          }
        }
        items.push_back(it);
      }
    }
  }
  return items;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Evaluate, GroupsByConfiguration) {
  auto r = evaluate_items(two_configs(), fx().dataset, fx().corpus.index);
  ASSERT_EQ(r.modes.size(), 2u);
  EXPECT_EQ(r.items, 12u);
  EXPECT_EQ(r.modes[0].label, "v2");  // higher accuracy first
  EXPECT_DOUBLE_EQ(r.modes[0].summary.accuracy.mean, 50.0);
  EXPECT_DOUBLE_EQ(r.modes[0].summary.accuracy.sd, 0.0);
  EXPECT_NEAR(r.modes[1].summary.accuracy.mean, 100.0 / 3, 1e-9);
  EXPECT_NEAR(r.modes[1].summary.accuracy.sd, 14.433756729740644, 1e-9);
}

TEST(Evaluate, NoItems) {
  try {
    evaluate_items({}, fx().dataset, fx().corpus.index);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoRuns);
  }
}

TEST(Evaluate, BadOverrideBecomesWarning) {
  auto items = two_configs();
  items[0].overrides.push_back({"f7", "C1-1", true, "a", ""});
  auto r = evaluate_items(items, fx().dataset, fx().corpus.index);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find(items[0].id), std::string::npos);
}

TEST(Evaluate, ControlOnlyGroupIsSkipped) {
  EvalItem it;
  it.id = "x";
  it.case_id = "4";
  it.mode = "RagLlmAutonomous";
  it.label = "v1";
  auto r = evaluate_items({it}, fx().dataset, fx().corpus.index);
  EXPECT_TRUE(r.modes.empty());
  EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Csv, WideLayout) {
  auto r = evaluate_items(two_configs(), fx().dataset, fx().corpus.index);
  auto l = lines(report_csv(r.modes));
  ASSERT_EQ(l.size(), 5u);
  EXPECT_EQ(l[0], "metric,v2_mean,v2_sd,v1_mean,v1_sd");
  EXPECT_EQ(l[2], "Recall,0.500,0.000,0.333,0.144");
  EXPECT_EQ(l[4], "Accuracy (%),50.000,0.000,33.333,14.434");
  EXPECT_EQ(l[1].rfind("Precision,", 0), 0u);
  EXPECT_EQ(l[3].rfind("F1,", 0), 0u);
}

TEST(Csv, DuplicateLabelsQualifiedByMode) {
  ModeEvaluation a, b;
  a.label = b.label = "v1";
  a.mode = "RagLlmAutonomous";
  b.mode = "CoPilot";
  EXPECT_EQ(column_names({a, b}), (std::vector<std::string>{"RagLlmAutonomous-v1", "CoPilot-v1"}));
}

TEST(Json, MatchesSchemaAndHeatmapShape) {
  auto r = evaluate_items(two_configs(), fx().dataset, fx().corpus.index);
  auto j = report_json(r.modes);
  EXPECT_NO_THROW(require_schema(j, fx().schema));
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["heatmap"]["category"]["columns"].size(), 8u);
  EXPECT_EQ(j["heatmap"]["severity"]["columns"].size(), 4u);
  EXPECT_EQ(j["heatmap"]["category"]["values"].size(), 2u);
  EXPECT_EQ(j["heatmap"]["category"]["values"][0].size(), 8u);
  // Case 1 has no interaction DRP: that cell is empty.
  auto cols = j["heatmap"]["category"]["columns"];
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] == "DrugDrugInteraction") EXPECT_TRUE(j["heatmap"]["category"]["values"][0][c].is_null());
    if (cols[c] == "Allergy") EXPECT_DOUBLE_EQ(j["heatmap"]["category"]["values"][0][c].get<double>(), 100.0);
  }
  EXPECT_EQ(j["modes"][0]["per_run"].size(), 3u);
}

TEST(Schema, RejectsBrokenReport) {
  auto r = evaluate_items(two_configs(), fx().dataset, fx().corpus.index);
  auto j = report_json(r.modes);
  j["heatmap"]["severity"]["columns"].push_back("Extra");
  EXPECT_FALSE(validate_schema(j, fx().schema).empty());
  auto k = report_json(r.modes);
  k["modes"][0]["metrics"]["precision"]["mean"] = 1.5;
  EXPECT_THROW(require_schema(k, fx().schema), SchemaError);
  auto m = report_json(r.modes);
  m["surprise"] = 1;
  EXPECT_FALSE(validate_schema(m, fx().schema).empty());
}

TEST(Schema, Subset) {
  json schema = {{"type", "object"},
                 {"required", {"a"}},
                 {"properties", {{"a", {{"$ref", "#/$defs/n"}}}, {"b", {{"enum", {"x", "y"}}}}}},
                 {"$defs", {{"n", {{"type", {"integer", "null"}}, {"minimum", 1}}}}}};
  EXPECT_TRUE(validate_schema({{"a", 2}}, schema).empty());
  EXPECT_TRUE(validate_schema({{"a", nullptr}}, schema).empty());
  EXPECT_FALSE(validate_schema({{"a", 0}}, schema).empty());
  EXPECT_FALSE(validate_schema(json::object(), schema).empty());
  auto issues = validate_schema({{"a", 1}, {"b", "z"}}, schema);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].pointer, "/b");
}
