#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

namespace chartreview {

struct LlmParams {
  double temperature = 0.2;
  std::size_t max_output_chars = 8000;
  std::optional<std::int64_t> seed;
};

struct LlmRequest {
  std::string run_id;
  std::string case_id;
  std::size_t call_index = 0;
  std::string prompt;
  LlmParams params;
};

std::string prompt_hash(const std::string& prompt);

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;

  // Returns the completion or throws Error (BackendUnavailable,
  // ReplayDivergence).
  virtual std::string complete(const LlmRequest& request) = 0;
  virtual std::string kind() const = 0;
  // Stable description for run fingerprints.
  virtual std::string describe() const = 0;
};

struct ScriptRule {
  std::string pattern;
  std::string response;
};

// First rule whose regex matches the prompt wins; otherwise the default.
class ScriptedMock final : public LlmBackend {
 public:
  explicit ScriptedMock(std::vector<ScriptRule> rules, std::string fallback = "No issues identified.");
  ScriptedMock(ScriptedMock&& o) noexcept
      : rules_(std::move(o.rules_)), compiled_(std::move(o.compiled_)), fallback_(std::move(o.fallback_)),
        calls_(o.calls_) {}

  // JSON: {"rules": [{"pattern", "response"}], "default": "..."} or a bare rule array.
  static ScriptedMock from_file(const std::filesystem::path& path);

  std::string complete(const LlmRequest& request) override;
  std::string kind() const override { return "mock"; }
  std::string describe() const override;

  std::size_t calls() const;

 private:
  std::vector<ScriptRule> rules_;
  std::vector<std::regex> compiled_;
  std::string fallback_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct ReplayRecord {
  std::string run_id;
  std::size_t call_index = 0;
  std::string prompt_hash;
  std::string response;
  std::string case_id;
};

// Transcript lines {run_id, call_index, prompt_hash, response[, case_id]}.
// Lines carrying another "type" than "call" are skipped, so run-store files
// replay directly.
class ReplayLog {
 public:
  static ReplayLog from_files(const std::vector<std::filesystem::path>& paths);
  static ReplayLog from_path(const std::filesystem::path& path);  // file or directory

  void add(ReplayRecord r);
  // Source run ids in first-seen order.
  const std::vector<std::string>& run_ids() const { return order_; }
  std::vector<std::string> run_ids_for_case(const std::string& case_id) const;
  const std::map<std::size_t, ReplayRecord>* run(const std::string& run_id) const;

 private:
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::size_t, ReplayRecord>> runs_;
};

class ReplayBackend final : public LlmBackend {
 public:
  ReplayBackend(std::shared_ptr<const ReplayLog> log, std::string source_run_id);

  std::string complete(const LlmRequest& request) override;
  std::string kind() const override { return "replay"; }
  std::string describe() const override { return "replay"; }

  const std::string& source_run_id() const { return source_; }

 private:
  std::shared_ptr<const ReplayLog> log_;
  std::string source_;
};

struct RemoteLlmConfig {
  std::string endpoint;
  std::string model;
  std::string token;  // read from the environment by the caller
  int max_attempts = 3;
  std::chrono::milliseconds backoff{500};
  std::chrono::seconds timeout{120};
};

// POST {model, messages: [{role, content}], temperature, max_tokens} -> {text}.
class RemoteHttpBackend final : public LlmBackend {
 public:
  explicit RemoteHttpBackend(RemoteLlmConfig cfg);

  std::string complete(const LlmRequest& request) override;
  std::string kind() const override { return "remote"; }
  std::string describe() const override { return "remote:" + cfg_.model; }

 private:
  RemoteLlmConfig cfg_;
};

}  // namespace chartreview
