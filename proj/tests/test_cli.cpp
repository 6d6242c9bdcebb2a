#include <gtest/gtest.h>

#include <json.hpp>

#include "chartreview/text.hpp"
#include "support.hpp"

using namespace chartreview;
using nlohmann::json;
using testsupport::run_cli;
using testsupport::TempDir;

namespace {

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Cli, Stats) {
  TempDir dir;
  auto r = run_cli({"--data", testsupport::data_dir().string(), "stats"}, dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "cases=23 drps=61")) << r.out;
  EXPECT_TRUE(contains(r.out, "Serious=18 (29.5%)")) << r.out;
  EXPECT_TRUE(contains(r.out, "Moderate=31 (50.8%)")) << r.out;
  EXPECT_TRUE(contains(r.out, "median=12")) << r.out;
}

TEST(Cli, Ingest) {
  TempDir dir;
  auto r = run_cli({"--data", testsupport::data_dir().string(), "ingest"}, dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "cases=23 drps=61")) << r.out;
  EXPECT_TRUE(contains(r.out, "unresolved_medications=0")) << r.out;
}

TEST(Cli, ReviewControlTriplicate) {
  TempDir dir;
  auto r = run_cli({"--data", testsupport::data_dir().string(), "review", "--case", "4", "--backend", "mock",
                    "--version", "v1", "--triplicate", "--run-id", "ctl"},
                   dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  for (const char* id : {"ctl-r1", "ctl-r2", "ctl-r3"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "runs" / (std::string(id) + ".jsonl"))) << id;
  }
  EXPECT_TRUE(contains(r.out, "findings=0"));
  EXPECT_TRUE(std::filesystem::exists(dir / "indexes" / "v1.json"));
}

TEST(Cli, EvalWithoutRuns) {
  TempDir dir;
  std::filesystem::create_directories(dir / "empty");
  auto r = run_cli({"--data", testsupport::data_dir().string(), "eval", "--runs", (dir / "empty").string()},
                   dir.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(contains(r.err, "ERROR NO_RUNS")) << r.err;
}

TEST(Cli, UnknownCase) {
  TempDir dir;
  auto r = run_cli({"--data", testsupport::data_dir().string(), "review", "--case", "99"}, dir.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_TRUE(contains(r.err, "ERROR UNKNOWN_CASE")) << r.err;
}

TEST(Cli, ReviewEvalReportOnSyntheticSet) {
  TempDir dir;
  auto set = testsupport::write_synthetic_set(dir / "data");
  std::vector<std::string> base = {"--data", set.root.string()};
  for (const char* c : {"S1", "S2"}) {
    auto args = base;
    for (const char* a : {"review", "--backend", "mock", "--triplicate", "--case"}) args.emplace_back(a);
    args.emplace_back(c);
    args.insert(args.end(), {"--script", set.script.string(), "--run-id", std::string("syn-") + c});
    auto r = run_cli(args, dir.path());
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  auto eval = base;
  eval.emplace_back("eval");
  auto e = run_cli(eval, dir.path());
  ASSERT_EQ(e.exit_code, 0) << e.err;
  EXPECT_TRUE(contains(e.out, "v1 mode=RagLlmAutonomous runs=3")) << e.out;
  EXPECT_TRUE(contains(e.out, "accuracy=100")) << e.out;

  auto rep = base;
  rep.insert(rep.end(), {"report", "--out", (dir / "out").string(), "--schema",
                         (testsupport::source_dir() / "docs" / "report.schema.json").string()});
  auto r = run_cli(rep, dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  auto csv = read_file(dir / "out" / "metrics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "metric,v1_mean,v1_sd");
  EXPECT_TRUE(contains(csv, "Accuracy (%),100.000,0.000"));
  auto j = json::parse(read_file(dir / "out" / "metrics.json"));
  EXPECT_EQ(j["modes"].size(), 1u);
}

TEST(Cli, ReplayReproducesMock) {
  TempDir dir;
  auto set = testsupport::write_synthetic_set(dir / "data");
  std::vector<std::string> base = {"--data", set.root.string()};
  auto a = base;
  a.insert(a.end(), {"review", "--case", "S1", "--script", set.script.string(), "--run-id", "orig", "--triplicate"});
  ASSERT_EQ(run_cli(a, dir.path()).exit_code, 0);
  auto b = base;
  b.insert(b.end(), {"--runs-dir", (dir / "replayed").string(), "review", "--case", "S1", "--backend", "replay",
                     "--replay", (dir / "runs").string(), "--run-id", "again", "--triplicate"});
  auto r = run_cli(b, dir.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(contains(r.out, "again-r3 status=complete calls=16 findings=2")) << r.out;
}

TEST(Cli, BadFlag) {
  TempDir dir;
  auto r = run_cli({"review", "--case", "1", "--version", "v7"}, dir.path());
  EXPECT_NE(r.exit_code, 0);
}
