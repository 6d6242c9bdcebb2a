#include "chartreview/service.hpp"

#include <regex>
#include <thread>

#include "chartreview/error.hpp"
#include "chartreview/report.hpp"
#include "chartreview/text.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

namespace chartreview {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownId:
    case ErrorCode::UnknownCase:
    case ErrorCode::UnknownDrug:
    case ErrorCode::NoRuns: return 404;
    case ErrorCode::Blinded: return 403;
    case ErrorCode::AlreadySubmitted:
    case ErrorCode::NotSubmitted:
    case ErrorCode::DuplicateId:
    case ErrorCode::LockHeld: return 409;
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::WrongArity: return 422;
    case ErrorCode::BackendUnavailable:
    case ErrorCode::ReplayDivergence: return 502;
    default: return 500;
  }
}

struct Service::Server {
  httplib::Server http;
  std::thread thread;
};

Service::Service(Workspace& ws) : ws_(ws) {}

Service::~Service() { stop(); }

namespace {

ApiResponse ok(json body, int status = 200) {
  body["schema_version"] = kSchemaVersion;
  return {status, std::move(body)};
}

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
  return {status, {{"schema_version", kSchemaVersion}, {"error", {{"code", code}, {"message", message}}}}};
}

json parse_body(const std::string& body) {
  if (trim(body).empty()) return json::object();
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("body is not JSON: ") + e.what());
  }
}

json run_json(const StoredRun& s, const MatchReport* report) {
  const auto& r = s.run;
  json transcripts = json::array();
  for (const auto& t : r.transcripts) transcripts.push_back(to_json(t));
  json findings = json::array();
  for (const auto& f : r.findings) findings.push_back(to_json(f));
  json ov = json::array();
  for (const auto& o : s.overrides) ov.push_back(to_json(o));
  return {{"run_id", r.run_id},
          {"case_id", r.case_id},
          {"fingerprint", r.fingerprint},
          {"config_label", r.config_label},
          {"mode", r.mode},
          {"replicate", r.replicate},
          {"status", run_status_name(r.status)},
          {"error", r.error},
          {"started_at", r.started_at},
          {"finished_at", r.finished_at},
          {"transcripts", transcripts},
          {"note", to_json(r.note)},
          {"findings", findings},
          {"warnings", r.warnings},
          {"overrides", ov},
          {"score", report ? to_json(*report) : json(nullptr)}};
}

std::vector<DrpFinding> findings_from(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array");
  std::vector<DrpFinding> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(finding_from_json(j[i], ptr + "/" + std::to_string(i)));
  return out;
}

}  // namespace

ApiResponse Service::handle(const std::string& method, const std::string& raw_path, const std::string& body,
                            const std::map<std::string, std::string>& query) {
  static const std::string prefix = "/api/v1";
  std::string path = raw_path;
  if (path.rfind(prefix, 0) == 0) path = path.substr(prefix.size());
  while (path.size() > 1 && path.back() == '/') path.pop_back();
  auto parts = split(path, '/');
  if (!parts.empty() && parts.front().empty()) parts.erase(parts.begin());
  auto is = [&](std::initializer_list<const char*> shape) {
    if (parts.size() != shape.size()) return false;
    std::size_t i = 0;
    for (const char* s : shape) {
      if (std::string_view(s) != "*" && parts[i] != s) return false;
      ++i;
    }
    return true;
  };

  try {
    if (method == "GET" && is({"health"})) return ok({{"status", "ok"}});

    if (method == "GET" && is({"cases"})) {
      json cases = json::array();
      for (const auto& c : ws_.dataset().cases) {
        cases.push_back({{"case_id", c.case_id},
                         {"disciplines", c.disciplines},
                         {"n_medications", c.medications.size()},
                         {"is_control", c.is_control}});
      }
      return ok({{"cases", cases}});
    }
    if (method == "GET" && is({"cases", "*"})) {
      const auto* c = find_case(ws_.dataset().cases, parts[1]);
      if (!c) fail(ErrorCode::UnknownCase, "unknown case '" + parts[1] + "'");
      return ok({{"case", to_json(*c)}});
    }

    if (method == "POST" && is({"runs"})) {
      auto req = review_request_from_json(parse_body(body));
      auto runs = ws_.review(req);
      json ids = json::array(), statuses = json::array();
      for (const auto& r : runs) {
        ids.push_back(r.run_id);
        statuses.push_back({{"run_id", r.run_id}, {"status", run_status_name(r.status)}, {"error", r.error}});
      }
      return ok({{"run_ids", ids}, {"runs", statuses}}, 201);
    }
    if (method == "GET" && is({"runs", "*"})) {
      auto s = ws_.runs().load(parts[1]);
      std::optional<MatchReport> report;
      if (s.run.status == RunStatus::Complete || s.run.status == RunStatus::ParseFailed) {
        EvalItem item{s.run.run_id, s.run.case_id, s.run.mode, s.run.config_label, s.run.replicate, s.run.findings,
                      s.overrides};
        report = score_item(item, ws_.dataset(), ws_.corpus().index, ws_.match_options());
      }
      return ok({{"run", run_json(s, report ? &*report : nullptr)}});
    }
    if (method == "POST" && is({"runs", "*", "adjudicate"})) {
      auto o = override_from_json(parse_body(body));
      auto s = ws_.runs().load(parts[1]);
      EvalItem item{s.run.run_id, s.run.case_id, s.run.mode, s.run.config_label, s.run.replicate, s.run.findings,
                    s.overrides};
      item.overrides.push_back(o);
      auto report = score_item(item, ws_.dataset(), ws_.corpus().index, ws_.match_options());
      ws_.runs().append_adjudication(parts[1], o);
      return ok({{"score", to_json(report)}});
    }

    if (method == "POST" && is({"sessions"})) {
      auto j = parse_body(body);
      if (!j.is_object()) throw SchemaError("", "expected an object");
      SessionRequest req;
      auto str = [&](const char* k) -> std::string {
        if (!j.contains(k)) throw SchemaError(std::string("/") + k, "required");
        if (j[k].is_number_integer()) return std::to_string(j[k].get<long long>());
        if (!j[k].is_string()) throw SchemaError(std::string("/") + k, "expected string");
        return j[k].get<std::string>();
      };
      req.case_id = str("case_id");
      req.reviewer_id = str("reviewer_id");
      if (j.contains("blinded")) {
        if (!j["blinded"].is_boolean()) throw SchemaError("/blinded", "expected boolean");
        req.blinded = j["blinded"].get<bool>();
      }
      if (j.contains("suggestions_run_id") && !j["suggestions_run_id"].is_null()) {
        req.suggestions_run_id = str("suggestions_run_id");
        if (!ws_.runs().contains(*req.suggestions_run_id)) {
          fail(ErrorCode::UnknownId, "unknown run '" + *req.suggestions_run_id + "'");
        }
      }
      if (j.contains("time_limit")) {
        if (!j["time_limit"].is_number()) throw SchemaError("/time_limit", "expected number");
        req.time_limit_s = j["time_limit"].get<double>();
      }
      if (!find_case(ws_.dataset().cases, req.case_id)) fail(ErrorCode::UnknownCase, "unknown case '" + req.case_id + "'");
      return ok({{"session", to_json(ws_.sessions().create(req))}}, 201);
    }
    if (method == "GET" && is({"sessions", "*"})) {
      return ok({{"session", to_json(ws_.sessions().get(parts[1]))}});
    }
    if (method == "GET" && is({"sessions", "*", "suggestions"})) {
      auto current = ws_.sessions().get(parts[1]);
      if (current.blinded && !current.submitted()) {
        fail(ErrorCode::Blinded, "suggestions are hidden until the assessment is submitted");
      }
      if (!current.suggestions_run_id) fail(ErrorCode::UnknownId, "session has no suggestions attached");
      auto run = ws_.runs().load(*current.suggestions_run_id);
      ws_.sessions().reveal(parts[1]);
      json findings = json::array();
      for (const auto& f : run.run.findings) findings.push_back(to_json(f));
      return ok({{"suggestions",
                  {{"run_id", run.run.run_id}, {"note", to_json(run.run.note)}, {"findings", findings}}}});
    }
    if (method == "POST" && is({"sessions", "*", "assessment"})) {
      auto j = parse_body(body);
      if (!j.is_object()) throw SchemaError("", "expected an object");
      if (!j.contains("note")) throw SchemaError("/note", "required");
      auto note = note_from_json(j["note"], "/note");
      auto findings = findings_from(j.value("findings", json::array()), "/findings");
      return ok({{"session", to_json(ws_.sessions().submit(parts[1], note, findings))}});
    }
    if (method == "POST" && (is({"sessions", "*", "score"}) || is({"sessions", "*", "adjudicate"}))) {
      auto s = ws_.sessions().get(parts[1]);
      if (!s.submitted()) fail(ErrorCode::NotSubmitted, "session '" + parts[1] + "' has no assessment yet");
      EvalItem item{s.session_id, s.case_id, std::string(mode_label_name(s.mode())), "", 1, s.findings, s.overrides};
      if (parts[2] == "adjudicate") {
        auto o = override_from_json(parse_body(body));
        item.overrides.push_back(o);
        score_item(item, ws_.dataset(), ws_.corpus().index, ws_.match_options());
        ws_.sessions().adjudicate(parts[1], o);
      }
      auto report = score_item(item, ws_.dataset(), ws_.corpus().index, ws_.match_options());
      ws_.sessions().record_score(parts[1], report);
      return ok({{"score", to_json(report)}});
    }

    if (method == "GET" && is({"reports", "metrics"})) {
      std::vector<std::string> warnings;
      auto items = eval_items(ws_.runs().load_all(), warnings);
      std::vector<CoPilotSession> sessions;
      for (const auto& id : ws_.sessions().list()) sessions.push_back(ws_.sessions().get(id));
      auto more = eval_items(sessions);
      items.insert(items.end(), more.begin(), more.end());
      if (auto it = query.find("mode"); it != query.end() && !it->second.empty()) {
        auto m = parse_mode_label(it->second);
        if (!m) throw SchemaError("/mode", "unknown mode '" + it->second + "'");
        std::erase_if(items, [&](const EvalItem& e) { return e.mode != mode_label_name(*m); });
      }
      auto opts = ws_.match_options();
      if (auto it = query.find("match_mode"); it != query.end()) {
        auto mm = parse_match_mode(it->second);
        if (!mm) throw SchemaError("/match_mode", "expected strict or loose");
        opts.mode = *mm;
      }
      auto result = evaluate_items(items, ws_.dataset(), ws_.corpus().index, opts);
      auto j = report_json(result.modes);
      j["warnings"] = result.warnings;
      return ok(j);
    }
    return error_response(404, "NOT_FOUND", "no route for " + method + " " + raw_path);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "INTERNAL", e.what());
  }
}

namespace {

void install(httplib::Server& http, Service& svc, const std::string& origin) {
  auto bridge = [&svc, origin](const httplib::Request& req, httplib::Response& res) {
    std::map<std::string, std::string> query;
    for (const auto& [k, v] : req.params) query[k] = v;
    auto r = svc.handle(req.method, req.path, req.body, query);
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  http.Get(R"(/api/v1/.*)", bridge);
  http.Post(R"(/api/v1/.*)", bridge);
  http.Options(R"(/api/v1/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
}

}  // namespace

bool Service::serve(const std::string& host, int port) {
  server_ = std::make_unique<Server>();
  install(server_->http, *this, ws_.config().cors_origin);
  return server_->http.listen(host, port);
}

int Service::serve_background(const std::string& host) {
  server_ = std::make_unique<Server>();
  install(server_->http, *this, ws_.config().cors_origin);
  int port = server_->http.bind_to_any_port(host);
  if (port <= 0) fail(ErrorCode::Io, "cannot bind " + host);
  server_->thread = std::thread([this] { server_->http.listen_after_bind(); });
  server_->http.wait_until_ready();
  return port;
}

void Service::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
}

}  // namespace chartreview
