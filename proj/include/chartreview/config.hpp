#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

#include "chartreview/casefile.hpp"
#include "chartreview/corpus.hpp"
#include "chartreview/embedding.hpp"
#include "chartreview/llm_backend.hpp"
#include "chartreview/pipeline.hpp"
#include "chartreview/retrieval.hpp"
#include "chartreview/run_store.hpp"
#include "chartreview/scoring.hpp"
#include "chartreview/session.hpp"

namespace chartreview {

struct EmbeddingSettings {
  std::string kind = "hash";  // hash | remote
  int dim = 256;
  std::string endpoint;
  std::string model;
  std::string token_env = "CHARTREVIEW_EMBED_TOKEN";
};

struct LlmSettings {
  std::string endpoint;
  std::string model;
  std::string token_env = "CHARTREVIEW_LLM_TOKEN";
};

struct AppConfig {
  std::filesystem::path data_dir = "data";
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path sessions_dir = "sessions";
  std::filesystem::path reports_dir = "reports";
  std::filesystem::path index_dir = "indexes";
  std::size_t parallelism = 1;
  std::map<std::string, RetrievalConfig> retrieval{{"v1", RetrievalConfig::v1()}, {"v2", RetrievalConfig::v2()}};
  MatchMode match_mode = MatchMode::Strict;
  EmbeddingSettings embedding;
  LlmSettings llm;
  LlmParams params;
  std::optional<std::filesystem::path> mock_script;
  std::optional<std::filesystem::path> replay_file;
  std::optional<std::filesystem::path> prompt_template;
  std::string cors_origin = "*";
  double time_limit_s = 3600;
  std::string host = "127.0.0.1";
  int port = 8080;

  // InvalidArgument for a version other than v1/v2.
  const RetrievalConfig& retrieval_for(const std::string& version) const;
};

// JSON object; relative paths resolve against the file's directory.
// SchemaError on unknown keys or wrong types.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base = {});

// Final-summary rule emitting an SBAR note and an empty finding block.
std::vector<ScriptRule> default_mock_rules();

struct ReviewRequest {
  std::string case_id;
  std::string version = "v1";
  std::string backend = "mock";  // mock | replay | remote
  bool triplicate = false;
  std::string run_id;
  std::string mode = "RagLlmAutonomous";
  std::string label;
  std::optional<std::filesystem::path> script;
  std::optional<std::filesystem::path> replay;
  std::optional<std::string> replay_run;  // source run id for a single replay
  std::optional<LlmParams> params;
};

ReviewRequest review_request_from_json(const nlohmann::json& j);

// Lazily loaded corpus, dataset, indexes and stores shared by the CLI and the
// HTTP service. Accessors are thread-safe.
class Workspace {
 public:
  explicit Workspace(AppConfig cfg);

  const AppConfig& config() const { return cfg_; }
  const Corpus& corpus();
  const Dataset& dataset();
  EmbeddingBackend& embedder();
  // Loads index_dir/<version>.json when it matches the corpus, else builds and saves it.
  const KnowledgeIndex& index(const std::string& version);
  const PromptTemplate& prompt();
  RunStore& runs();
  SessionStore& sessions();

  std::shared_ptr<LlmBackend> backend(const ReviewRequest& req, int replicate);

  // Runs and stores one review or a triplicate; returns the stored runs.
  std::vector<ReviewRun> review(const ReviewRequest& req);

  MatchOptions match_options() const;

 private:
  AppConfig cfg_;
  std::recursive_mutex mu_;
  std::unique_ptr<Corpus> corpus_;
  std::unique_ptr<Dataset> dataset_;
  std::unique_ptr<EmbeddingBackend> embedder_;
  std::map<std::string, std::unique_ptr<KnowledgeIndex>> indexes_;
  std::unique_ptr<PromptTemplate> prompt_;
  std::unique_ptr<RunStore> runs_;
  std::unique_ptr<SessionStore> sessions_;
  std::shared_ptr<const ReplayLog> replay_;
  std::filesystem::path replay_path_;
};

}  // namespace chartreview
