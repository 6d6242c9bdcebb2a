#include "chartreview/llm_backend.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "chartreview/embedding.hpp"
#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

// after Eigen: resolv.h defines _res
#include <httplib.h>

namespace chartreview {

namespace fs = std::filesystem;
using nlohmann::json;

std::string prompt_hash(const std::string& prompt) { return content_hash(prompt); }

ScriptedMock::ScriptedMock(std::vector<ScriptRule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {
  for (const auto& r : rules_) {
    try {
      compiled_.emplace_back(r.pattern, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      fail(ErrorCode::InvalidArgument, "bad mock pattern '" + r.pattern + "': " + e.what());
    }
  }
}

ScriptedMock ScriptedMock::from_file(const fs::path& path) {
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::ParseError, path.string() + ": invalid JSON");
  const json* rules = &doc;
  std::string fallback = "No issues identified.";
  if (doc.is_object()) {
    if (!doc.contains("rules")) fail(ErrorCode::ParseError, path.string() + ": missing 'rules'");
    rules = &doc["rules"];
    fallback = doc.value("default", fallback);
  }
  if (!rules->is_array()) fail(ErrorCode::ParseError, path.string() + ": 'rules' must be an array");
  std::vector<ScriptRule> out;
  for (const auto& r : *rules) {
    if (!r.is_object() || !r.contains("pattern") || !r.contains("response")) {
      fail(ErrorCode::ParseError, path.string() + ": each rule needs 'pattern' and 'response'");
    }
    out.push_back({r["pattern"].get<std::string>(), r["response"].get<std::string>()});
  }
  return ScriptedMock(std::move(out), fallback);
}

std::string ScriptedMock::complete(const LlmRequest& request) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
  }
  for (std::size_t i = 0; i < compiled_.size(); ++i) {
    if (std::regex_search(request.prompt, compiled_[i])) return rules_[i].response;
  }
  return fallback_;
}

std::string ScriptedMock::describe() const {
  std::string all = fallback_;
  for (const auto& r : rules_) all += '\0' + r.pattern + '\0' + r.response;
  return "mock:" + content_hash(all);
}

std::size_t ScriptedMock::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

void ReplayLog::add(ReplayRecord r) {
  auto& run = runs_[r.run_id];
  if (run.empty()) order_.push_back(r.run_id);
  if (run.count(r.call_index)) {
    fail(ErrorCode::DuplicateId, "replay run " + r.run_id + " repeats call_index " + std::to_string(r.call_index));
  }
  run.emplace(r.call_index, std::move(r));
}

ReplayLog ReplayLog::from_files(const std::vector<fs::path>& paths) {
  ReplayLog log;
  for (const auto& p : paths) {
    std::ifstream in(p);
    if (!in) fail(ErrorCode::Io, "cannot open " + p.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (trim(line).empty()) continue;
      auto j = json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        if (in.peek() == EOF) break;  // torn tail
        fail(ErrorCode::CorruptStore, p.string() + ":" + std::to_string(lineno) + ": unparseable record");
      }
      if (j.contains("type") && j["type"] != "call") continue;
      if (!j.contains("run_id") || !j.contains("call_index") || !j.contains("prompt_hash") || !j.contains("response")) {
        fail(ErrorCode::ParseError, p.string() + ":" + std::to_string(lineno) + ": incomplete transcript record");
      }
      ReplayRecord r;
      r.run_id = j["run_id"].get<std::string>();
      r.call_index = j["call_index"].get<std::size_t>();
      r.prompt_hash = j["prompt_hash"].get<std::string>();
      r.response = j["response"].get<std::string>();
      r.case_id = j.value("case_id", "");
      log.add(std::move(r));
    }
  }
  return log;
}

ReplayLog ReplayLog::from_path(const fs::path& path) {
  if (fs::is_regular_file(path)) return from_files({path});
  if (!fs::is_directory(path)) fail(ErrorCode::Io, "no replay file or directory at " + path.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return from_files(files);
}

std::vector<std::string> ReplayLog::run_ids_for_case(const std::string& case_id) const {
  std::vector<std::string> out;
  for (const auto& id : order_) {
    const auto& run = runs_.at(id);
    if (!run.empty() && run.begin()->second.case_id == case_id) out.push_back(id);
  }
  return out;
}

const std::map<std::size_t, ReplayRecord>* ReplayLog::run(const std::string& run_id) const {
  auto it = runs_.find(run_id);
  return it == runs_.end() ? nullptr : &it->second;
}

ReplayBackend::ReplayBackend(std::shared_ptr<const ReplayLog> log, std::string source_run_id)
    : log_(std::move(log)), source_(std::move(source_run_id)) {
  if (!log_ || !log_->run(source_)) fail(ErrorCode::UnknownId, "replay log has no run '" + source_ + "'");
}

std::string ReplayBackend::complete(const LlmRequest& request) {
  const auto* run = log_->run(source_);
  auto it = run->find(request.call_index);
  if (it == run->end()) {
    fail(ErrorCode::ReplayDivergence,
         "run " + source_ + " has no recorded call " + std::to_string(request.call_index));
  }
  auto h = prompt_hash(request.prompt);
  if (it->second.prompt_hash != h) {
    fail(ErrorCode::ReplayDivergence, "run " + source_ + " call " + std::to_string(request.call_index) +
                                          ": prompt hash " + h + " != recorded " + it->second.prompt_hash);
  }
  return it->second.response;
}

RemoteHttpBackend::RemoteHttpBackend(RemoteLlmConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.endpoint.empty()) fail(ErrorCode::InvalidArgument, "remote LLM backend needs an endpoint");
  if (cfg_.max_attempts < 1) cfg_.max_attempts = 1;
}

std::string RemoteHttpBackend::complete(const LlmRequest& request) {
  auto target = split_url(cfg_.endpoint);
  json body = {{"model", cfg_.model},
               {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
               {"temperature", request.params.temperature},
               {"max_tokens", std::max<std::size_t>(1, request.params.max_output_chars / 4)}};
  if (request.params.seed) body["seed"] = *request.params.seed;
  auto payload = body.dump();

  std::string last_error;
  auto delay = cfg_.backoff;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    httplib::Client cli(target.scheme_host_port);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    httplib::Headers headers;
    if (!cfg_.token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.token);
    auto res = cli.Post(target.path, headers, payload, "application/json");
    if (res && res->status == 200) {
      auto doc = json::parse(res->body, nullptr, false);
      if (!doc.is_discarded() && doc.contains("text") && doc["text"].is_string()) {
        auto text = doc["text"].get<std::string>();
        if (text.size() > request.params.max_output_chars) text.resize(request.params.max_output_chars);
        return text;
      }
      last_error = "response lacks a 'text' field";
    } else {
      last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    }
    if (attempt < cfg_.max_attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  fail(ErrorCode::BackendUnavailable, "LLM endpoint " + cfg_.endpoint + " failed after " +
                                          std::to_string(cfg_.max_attempts) + " attempts: " + last_error);
}

}  // namespace chartreview
