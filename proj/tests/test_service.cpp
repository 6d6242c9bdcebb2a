#include <gtest/gtest.h>

#include <json.hpp>

#include "chartreview/service.hpp"
#include "support.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

using namespace chartreview;
using nlohmann::json;
using testsupport::TempDir;

namespace {

struct Api {
  TempDir dir;
  testsupport::SyntheticSet set = testsupport::write_synthetic_set(dir / "data");
  Workspace ws{make_config()};
  Service svc{ws};

  AppConfig make_config() {
    AppConfig cfg;
    cfg.data_dir = dir / "data";
    cfg.runs_dir = dir / "runs";
    cfg.sessions_dir = dir / "sessions";
    cfg.index_dir = dir / "indexes";
    cfg.reports_dir = dir / "reports";
    cfg.mock_script = dir / "data" / "mock.json";
    return cfg;
  }

  ApiResponse get(const std::string& path, const std::map<std::string, std::string>& q = {}) {
    return svc.handle("GET", "/api/v1" + path, "", q);
  }
  ApiResponse post(const std::string& path, const json& body) {
    return svc.handle("POST", "/api/v1" + path, body.dump());
  }
  std::string review(const std::string& case_id, const std::string& run_id) {
    auto r = post("/runs", {{"case_id", case_id}, {"backend", "mock"}, {"run_id", run_id}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body["run_ids"][0].get<std::string>();
  }
};

json assessment_for_s1() {
  return {{"note",
           {{"situation", "s"}, {"background", "b"}, {"assessment", "a"}, {"recommendation", "r"}}},
          {"findings",
           {{{"drug_names", {"Zentrolol", "Milbrafen"}},
             {"category", "DrugDrugInteraction"},
             {"action_text", "reduce zentrolol"},
             {"rationale", "interaction"}}}}};
}

}  // namespace

TEST(Service, BundledCases) {
  TempDir dir;
  AppConfig cfg;
  cfg.data_dir = testsupport::data_dir();
  cfg.runs_dir = dir / "runs";
  cfg.sessions_dir = dir / "sessions";
  Workspace ws(cfg);
  Service svc(ws);
  auto r = svc.handle("GET", "/api/v1/cases");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["cases"].size(), 23u);
  EXPECT_EQ(r.body["schema_version"], "1");
  auto c = svc.handle("GET", "/api/v1/cases/1");
  EXPECT_EQ(c.body["case"]["medications"].size(), 13u);
  auto missing = svc.handle("GET", "/api/v1/cases/99");
  EXPECT_EQ(missing.status, 404);
  EXPECT_EQ(missing.body["error"]["code"], "UNKNOWN_CASE");
}

TEST(Service, RunLifecycle) {
  Api api;
  auto id = api.review("S1", "api-s1");
  EXPECT_EQ(id, "api-s1");
  auto run = api.get("/runs/api-s1");
  ASSERT_EQ(run.status, 200);
  EXPECT_EQ(run.body["run"]["status"], "complete");
  EXPECT_EQ(run.body["run"]["score"]["counts"]["tp"], 2);
  EXPECT_EQ(run.body["run"]["score"]["counts"]["fn"], 0);

  auto adj = api.post("/runs/api-s1/adjudicate",
                      {{"finding_id", "f0"}, {"drp_id", "S1-1"}, {"match", false}, {"author", "pharm"}});
  ASSERT_EQ(adj.status, 200) << adj.body.dump();
  EXPECT_EQ(adj.body["score"]["counts"]["tp"], 1);
  EXPECT_EQ(api.get("/runs/api-s1").body["run"]["score"]["counts"]["tp"], 1);

  EXPECT_EQ(api.post("/runs/api-s1/adjudicate", {{"finding_id", "f0"}, {"drp_id", "S1-1"}}).status, 422);
  EXPECT_EQ(api.post("/runs/api-s1/adjudicate", {{"finding_id", "f9"}, {"drp_id", "S1-1"}, {"author", "a"}}).status,
            404);
  EXPECT_EQ(api.post("/runs", {{"case_id", "S1"}, {"backend", "mock"}, {"run_id", "api-s1"}}).status, 409);
}

TEST(Service, Triplicate) {
  Api api;
  auto r = api.post("/runs", {{"case_id", "S2"}, {"triplicate", true}, {"run_id", "t"}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["run_ids"], json({"t-r1", "t-r2", "t-r3"}));
}

TEST(Service, BadBodies) {
  Api api;
  EXPECT_EQ(api.svc.handle("POST", "/api/v1/runs", "{not json").status, 422);
  EXPECT_EQ(api.post("/runs", {{"case_id", "S1"}, {"version", "v9"}}).status, 422);
  EXPECT_EQ(api.post("/runs", {{"case_id", "S1"}, {"colour", "red"}}).status, 422);
  EXPECT_EQ(api.post("/sessions", {{"case_id", "S1"}}).status, 422);
  EXPECT_EQ(api.get("/runs/nope").status, 404);
  EXPECT_EQ(api.get("/sessions/session-9999").status, 404);
  EXPECT_EQ(api.get("/nowhere").status, 404);
  auto h = api.get("/health");
  EXPECT_EQ(h.body["status"], "ok");
}

TEST(Service, BlindedSessionLeaksNothing) {
  Api api;
  api.review("S1", "hidden-run");
  auto created = api.post("/sessions", {{"case_id", "S1"}, {"reviewer_id", "rev-1"}, {"suggestions_run_id", "hidden-run"}});
  ASSERT_EQ(created.status, 201) << created.body.dump();
  std::string sid = created.body["session"]["session_id"];
  std::vector<ApiResponse> seen = {created, api.get("/sessions/" + sid)};
  auto blocked = api.get("/sessions/" + sid + "/suggestions");
  EXPECT_EQ(blocked.status, 403);
  EXPECT_EQ(blocked.body["error"]["code"], "BLINDED");
  seen.push_back(blocked);
  for (const auto& r : seen) {
    auto text = r.body.dump();
    EXPECT_EQ(text.find("hidden-run"), std::string::npos) << text;
    EXPECT_EQ(text.find("reduce zentrolol dose"), std::string::npos) << text;
    EXPECT_EQ(text.find("milbrafen inhibits clearance"), std::string::npos) << text;
  }

  EXPECT_EQ(api.post("/sessions/" + sid + "/score", json::object()).status, 409);
  auto submitted = api.post("/sessions/" + sid + "/assessment", assessment_for_s1());
  ASSERT_EQ(submitted.status, 200) << submitted.body.dump();
  EXPECT_EQ(submitted.body["session"]["suggestions_run_id"], "hidden-run");
  EXPECT_EQ(api.post("/sessions/" + sid + "/assessment", assessment_for_s1()).status, 409);

  auto score = api.post("/sessions/" + sid + "/score", json::object());
  ASSERT_EQ(score.status, 200);
  auto counts = score.body["score"]["counts"];
  EXPECT_EQ(counts["tp"].get<int>() + counts["fn"].get<int>(), 2);
  EXPECT_EQ(counts["tp"], 1);

  auto after = api.get("/sessions/" + sid + "/suggestions");
  ASSERT_EQ(after.status, 200);
  EXPECT_EQ(after.body["suggestions"]["findings"].size(), 2u);
  auto final_state = api.get("/sessions/" + sid).body["session"];
  EXPECT_EQ(final_state["mode"], "HumanOnly");
  EXPECT_FALSE(final_state["score"].is_null());
}

TEST(Service, UnblindedRevealMakesCoPilot) {
  Api api;
  api.review("S2", "open-run");
  auto created = api.post("/sessions", {{"case_id", "S2"},
                                        {"reviewer_id", "rev-2"},
                                        {"blinded", false},
                                        {"suggestions_run_id", "open-run"}});
  std::string sid = created.body["session"]["session_id"];
  EXPECT_EQ(api.get("/sessions/" + sid + "/suggestions").status, 200);
  json body = {{"note", {{"situation", ""}, {"background", ""}, {"assessment", ""}, {"recommendation", ""}}},
               {"findings", {{{"drug_names", {"Zentrolol"}}, {"category", "AdverseDrugReaction"},
                              {"action_text", "hold zentrolol"}}}}};
  auto s = api.post("/sessions/" + sid + "/assessment", body);
  ASSERT_EQ(s.status, 200);
  EXPECT_EQ(s.body["session"]["mode"], "CoPilot");
  auto adj = api.post("/sessions/" + sid + "/adjudicate",
                      {{"finding_id", "f0"}, {"drp_id", "S2-1"}, {"match", false}, {"author", "lead"}});
  ASSERT_EQ(adj.status, 200) << adj.body.dump();
  EXPECT_EQ(adj.body["score"]["counts"]["tp"], 0);
}

TEST(Service, MetricsReport) {
  Api api;
  EXPECT_EQ(api.get("/reports/metrics").status, 404);  // no runs yet
  api.post("/runs", {{"case_id", "S1"}, {"triplicate", true}, {"run_id", "m1"}});
  api.post("/runs", {{"case_id", "S2"}, {"triplicate", true}, {"run_id", "m2"}});
  auto r = api.get("/reports/metrics");
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["modes"].size(), 1u);
  EXPECT_DOUBLE_EQ(r.body["modes"][0]["metrics"]["accuracy"]["mean"].get<double>(), 100.0);
  EXPECT_EQ(r.body["heatmap"]["category"]["columns"].size(), 8u);
  EXPECT_EQ(api.get("/reports/metrics", {{"mode", "human"}}).status, 404);
  EXPECT_EQ(api.get("/reports/metrics", {{"match_mode", "fuzzy"}}).status, 422);
}

TEST(Service, OverHttp) {
  Api api;
  int port = api.svc.serve_background("127.0.0.1");
  ASSERT_GT(port, 0);
  httplib::Client cli("127.0.0.1", port);
  auto health = cli.Get("/api/v1/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(health->get_header_value("Access-Control-Allow-Origin"), "*");
  auto created = cli.Post("/api/v1/runs", json({{"case_id", "S2"}, {"run_id", "http"}}).dump(), "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto missing = cli.Get("/api/v1/runs/none");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["code"], "UNKNOWN_ID");
  auto pre = cli.Options("/api/v1/runs");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  api.svc.stop();
}

TEST(Service, StatusMapping) {
  EXPECT_EQ(http_status(ErrorCode::Blinded), 403);
  EXPECT_EQ(http_status(ErrorCode::AlreadySubmitted), 409);
  EXPECT_EQ(http_status(ErrorCode::BackendUnavailable), 502);
  EXPECT_EQ(http_status(ErrorCode::SchemaError), 422);
  EXPECT_EQ(http_status(ErrorCode::NoRuns), 404);
  EXPECT_EQ(http_status(ErrorCode::CorruptStore), 500);
}
