#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartreview/casefile.hpp"
#include "chartreview/corpus.hpp"
#include "chartreview/embedding.hpp"
#include "chartreview/llm_backend.hpp"
#include "chartreview/retrieval.hpp"
#include "chartreview/review_task.hpp"

namespace chartreview {

inline constexpr const char* kPromptVersion = "chart-review-prompt/1";

struct DrpFinding {
  std::vector<std::string> drug_names;
  DrpCategory category = DrpCategory::AdverseDrugReaction;
  std::string action_text;
  std::string rationale;
  std::vector<std::string> evidence_chunk_ids;
};

struct SbarNote {
  std::string situation;
  std::string background;
  std::string assessment;
  std::string recommendation;
};

nlohmann::json to_json(const DrpFinding& f);
nlohmann::json to_json(const SbarNote& n);
DrpFinding finding_from_json(const nlohmann::json& j, const std::string& pointer = "");
SbarNote note_from_json(const nlohmann::json& j, const std::string& pointer = "");

// Preamble with a {{specialty}} slot.
class PromptTemplate {
 public:
  PromptTemplate();  // built-in text
  explicit PromptTemplate(std::string text);
  static PromptTemplate from_file(const std::filesystem::path& path);

  // TemplateSlotMissing when a slot has no value or an unknown slot remains.
  std::string fill(const std::map<std::string, std::string>& slots) const;
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct TaskOutput {
  std::optional<std::size_t> med_index;
  std::string drug_name;
  ReviewTask task;
  std::string response;
};

// Per-drug or case-level task prompt. med_index is required for drug tasks.
std::string render_task_prompt(const CaseVignette& c, std::optional<std::size_t> med_index, ReviewTask task,
                               const ContextBundle& context, const PromptTemplate& tmpl = PromptTemplate());

// Final summarisation prompt over every task output.
std::string render_summary_prompt(const CaseVignette& c, const std::vector<TaskOutput>& outputs,
                                  const PromptTemplate& tmpl = PromptTemplate());

struct ParsedResponse {
  SbarNote note;
  std::vector<DrpFinding> findings;
  std::vector<std::string> warnings;
};

// Reads the ```drp block of line records
//   DRP | drugs=a;b | category=<Category> | action=... | rationale=... [| evidence=id;id]
// ParseFailure when no such block exists.
ParsedResponse parse_findings(const std::string& response);

struct TaskTranscript {
  std::size_t call_index = 0;
  std::optional<std::size_t> med_index;
  std::string drug_name;
  std::optional<std::string> drug_id;
  std::string task;  // task name or FINAL_SUMMARY
  std::string prompt;
  std::string prompt_hash;
  std::vector<std::string> context_chunk_ids;
  std::string response;
};

enum class RunStatus { Complete, Failed, ParseFailed, Incomplete };
std::string_view run_status_name(RunStatus s);
std::optional<RunStatus> parse_run_status(std::string_view s);

struct ReviewRun {
  std::string run_id;
  std::string case_id;
  std::string fingerprint;
  std::string config_label;
  std::string mode = "RagLlmAutonomous";
  int replicate = 1;
  std::vector<TaskTranscript> transcripts;
  SbarNote note;
  std::vector<DrpFinding> findings;
  std::vector<std::string> warnings;
  RunStatus status = RunStatus::Complete;
  std::string error;
  std::string started_at;
  std::string finished_at;
};

struct PipelineContext {
  const Corpus* corpus = nullptr;
  const KnowledgeIndex* index = nullptr;
  EmbeddingBackend* embedder = nullptr;
  const PromptTemplate* prompt = nullptr;  // null: built-in
};

struct RunOptions {
  std::string run_id;
  std::string config_label;
  std::string mode = "RagLlmAutonomous";
  int replicate = 1;
  std::size_t parallelism = 1;
  bool use_retrieval = true;  // false: LLM-only baseline, empty context
  LlmParams params;
};

std::string run_fingerprint(const PipelineContext& ctx, const LlmBackend& backend, const RunOptions& opts);

inline std::size_t expected_calls(std::size_t medications) { return 4 * medications + 3 + 1; }

// Failures of the backend mark the run Failed and keep completed transcripts.
ReviewRun run_review(const CaseVignette& c, const PipelineContext& ctx, LlmBackend& backend, const RunOptions& opts);

struct Triplicate {
  std::vector<ReviewRun> runs;
  bool complete = true;
};

using BackendFactory = std::function<std::shared_ptr<LlmBackend>(int replicate)>;

// Runs ids "<run_id>-r1".."-r3".
Triplicate run_triplicate(const CaseVignette& c, const PipelineContext& ctx, const BackendFactory& backends,
                          const RunOptions& opts);

nlohmann::json to_json(const TaskTranscript& t);
TaskTranscript transcript_from_json(const nlohmann::json& j);

}  // namespace chartreview
