#include "chartreview/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;

namespace {

struct Job {
  std::size_t call_index;
  std::optional<std::size_t> med_index;
  ReviewTask task;
};

struct JobResult {
  TaskTranscript transcript;
  std::optional<Error> backend_error;
};

std::optional<ReviewTask> evidence_task(DrpCategory c) {
  switch (c) {
    case DrpCategory::InappropriateDosageRegimen: return ReviewTask::Dosing;
    case DrpCategory::DrugDrugInteraction: return ReviewTask::Interactions;
    case DrpCategory::AdverseDrugReaction:
    case DrpCategory::Allergy: return ReviewTask::AdrAllergyContra;
    case DrpCategory::NoIndication:
    case DrpCategory::InappropriateChoiceOfTherapy: return ReviewTask::Indication;
    case DrpCategory::OmissionOfTherapy: return ReviewTask::Omission;
    case DrpCategory::DuplicationOfTherapy: return ReviewTask::Duplication;
  }
  return std::nullopt;
}

std::string retrieval_query(const CaseVignette& c, std::optional<std::size_t> med_index, ReviewTask task,
                            const Monograph* m) {
  std::string q(task_question(task));
  if (med_index) {
    q += "\nMedication: " + c.medications[*med_index].line();
    if (m) q += "\n" + m->canonical_name;
  } else {
    q += "\n" + c.clinical_note;
  }
  return q;
}

JobResult run_job(const CaseVignette& c, const PipelineContext& ctx, LlmBackend& backend, const RunOptions& opts,
                  const Job& job) {
  const auto& tmpl = ctx.prompt ? *ctx.prompt : PromptTemplate();
  JobResult r;
  auto& t = r.transcript;
  t.call_index = job.call_index;
  t.med_index = job.med_index;
  t.task = std::string(task_name(job.task));
  const Monograph* mono = nullptr;
  if (job.med_index) {
    t.drug_name = c.medications[*job.med_index].name;
    t.drug_id = ctx.corpus->index.resolve_mention(t.drug_name);
    if (t.drug_id) mono = ctx.corpus->find(*t.drug_id);
  }
  ContextBundle bundle;
  if (opts.use_retrieval) {
    bundle = retrieve_for_task(*ctx.corpus, *ctx.index, *ctx.embedder, t.drug_id, job.task,
                               retrieval_query(c, job.med_index, job.task, mono));
  }
  t.context_chunk_ids = bundle.chunk_ids();
  t.prompt = render_task_prompt(c, job.med_index, job.task, bundle, tmpl);
  t.prompt_hash = prompt_hash(t.prompt);
  try {
    t.response = backend.complete({opts.run_id, c.case_id, job.call_index, t.prompt, opts.params});
  } catch (const Error& e) {
    r.backend_error = e;
  }
  return r;
}

void attribute_evidence(ReviewRun& run, const Corpus& corpus) {
  std::set<std::string> supplied;
  for (const auto& t : run.transcripts) supplied.insert(t.context_chunk_ids.begin(), t.context_chunk_ids.end());
  for (auto& f : run.findings) {
    std::vector<std::string> kept;
    for (const auto& id : f.evidence_chunk_ids) {
      if (supplied.count(id)) {
        kept.push_back(id);
      } else {
        run.warnings.push_back("evidence id '" + id + "' was not supplied in this run, dropped");
      }
    }
    if (kept.empty()) {
      auto task = evidence_task(f.category);
      std::set<std::string> ids;
      for (const auto& n : f.drug_names) {
        if (auto id = corpus.index.resolve_mention(n)) ids.insert(*id);
      }
      for (const auto& t : run.transcripts) {
        if (!task || t.task != task_name(*task)) continue;
        if (is_drug_task(*task) && (!t.drug_id || !ids.count(*t.drug_id))) continue;
        for (const auto& id : t.context_chunk_ids) {
          if (std::find(kept.begin(), kept.end(), id) == kept.end()) kept.push_back(id);
        }
      }
    }
    f.evidence_chunk_ids = std::move(kept);
  }
}

}  // namespace

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Complete: return "complete";
    case RunStatus::Failed: return "failed";
    case RunStatus::ParseFailed: return "parse_failed";
    case RunStatus::Incomplete: return "incomplete";
  }
  return "";
}

std::optional<RunStatus> parse_run_status(std::string_view s) {
  for (auto v : {RunStatus::Complete, RunStatus::Failed, RunStatus::ParseFailed, RunStatus::Incomplete}) {
    if (run_status_name(v) == s) return v;
  }
  return std::nullopt;
}

std::string run_fingerprint(const PipelineContext& ctx, const LlmBackend& backend, const RunOptions& opts) {
  const auto& params = opts.params;
  const auto& cfg = ctx.index->config();
  json j = {{"prompt_version", kPromptVersion},
            {"template", content_hash(ctx.prompt ? ctx.prompt->text() : PromptTemplate().text())},
            {"strategy", strategy_name(cfg.strategy)},
            {"chunk_size", cfg.chunk_size},
            {"overlap", cfg.overlap},
            {"sizes", cfg.sizes},
            {"hier_overlap", cfg.hier_overlap},
            {"k", cfg.k},
            {"merge_ratio", cfg.merge_ratio},
            {"max_context_chars", cfg.max_context_chars},
            {"corpus", ctx.index->corpus_hash()},
            {"embedder", ctx.index->embedder_name()},
            {"backend", backend.describe()},
            {"temperature", params.temperature},
            {"max_output_chars", params.max_output_chars},
            {"retrieval", opts.use_retrieval}};
  j["seed"] = params.seed ? json(*params.seed) : json(nullptr);
  return content_hash(j.dump());
}

ReviewRun run_review(const CaseVignette& c, const PipelineContext& ctx, LlmBackend& backend, const RunOptions& opts) {
  if (!ctx.corpus || !ctx.index || !ctx.embedder) fail(ErrorCode::InvalidArgument, "pipeline context incomplete");
  if (c.disciplines.empty() || trim(c.disciplines.front()).empty()) {
    fail(ErrorCode::TemplateSlotMissing, "case " + c.case_id + " has no discipline for the specialty slot");
  }
  ReviewRun run;
  run.run_id = opts.run_id.empty() ? "run-" + c.case_id : opts.run_id;
  run.case_id = c.case_id;
  run.config_label = opts.config_label.empty() ? ctx.index->config().label() : opts.config_label;
  run.mode = opts.mode;
  run.replicate = opts.replicate;
  run.fingerprint = run_fingerprint(ctx, backend, opts);
  run.started_at = utc_timestamp();
  RunOptions call_opts = opts;
  call_opts.run_id = run.run_id;

  const std::size_t m = c.medications.size();
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < kDrugTasks.size(); ++t) jobs.push_back({i * 4 + t, i, kDrugTasks[t]});
  }
  for (std::size_t t = 0; t < kCaseTasks.size(); ++t) jobs.push_back({4 * m + t, std::nullopt, kCaseTasks[t]});

  std::vector<JobResult> results(jobs.size());
  const std::size_t width = std::max<std::size_t>(1, opts.parallelism);
  for (std::size_t start = 0; start < jobs.size(); start += width) {
    std::size_t stop = std::min(jobs.size(), start + width);
    if (width == 1) {
      results[start] = run_job(c, ctx, backend, call_opts, jobs[start]);
      continue;
    }
    std::vector<std::future<JobResult>> wave;
    for (std::size_t j = start; j < stop; ++j) {
      wave.push_back(std::async(std::launch::async, [&, j] { return run_job(c, ctx, backend, call_opts, jobs[j]); }));
    }
    for (std::size_t j = start; j < stop; ++j) results[j] = wave[j - start].get();
  }

  std::vector<TaskOutput> outputs;
  for (auto& r : results) {
    if (r.backend_error) {
      if (run.status != RunStatus::Failed) {
        run.status = RunStatus::Failed;
        run.error = std::string(code_name(r.backend_error->code())) + ": " + r.backend_error->what();
      }
      continue;
    }
    outputs.push_back({r.transcript.med_index, r.transcript.drug_name, *parse_task_name(r.transcript.task),
                       r.transcript.response});
    run.transcripts.push_back(std::move(r.transcript));
  }
  if (run.status == RunStatus::Failed) {
    run.finished_at = utc_timestamp();
    return run;
  }

  TaskTranscript final_t;
  final_t.call_index = 4 * m + kCaseTasks.size();
  final_t.task = "FINAL_SUMMARY";
  final_t.prompt = render_summary_prompt(c, outputs, ctx.prompt ? *ctx.prompt : PromptTemplate());
  final_t.prompt_hash = prompt_hash(final_t.prompt);
  try {
    final_t.response = backend.complete({run.run_id, c.case_id, final_t.call_index, final_t.prompt, opts.params});
  } catch (const Error& e) {
    run.status = RunStatus::Failed;
    run.error = std::string(code_name(e.code())) + ": " + e.what();
    run.finished_at = utc_timestamp();
    return run;
  }
  run.transcripts.push_back(final_t);

  try {
    auto parsed = parse_findings(final_t.response);
    run.note = std::move(parsed.note);
    run.findings = std::move(parsed.findings);
    run.warnings = std::move(parsed.warnings);
    attribute_evidence(run, *ctx.corpus);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ParseFailure) throw;
    run.status = RunStatus::ParseFailed;
    run.warnings.push_back(e.what());
  }
  run.finished_at = utc_timestamp();
  return run;
}

Triplicate run_triplicate(const CaseVignette& c, const PipelineContext& ctx, const BackendFactory& backends,
                          const RunOptions& opts) {
  Triplicate out;
  auto base = opts.run_id.empty() ? "run-" + c.case_id : opts.run_id;
  for (int r = 1; r <= 3; ++r) {
    RunOptions o = opts;
    o.run_id = base + "-r" + std::to_string(r);
    o.replicate = r;
    ReviewRun run;
    try {
      auto backend = backends(r);
      if (!backend) fail(ErrorCode::BackendUnavailable, "no backend for replicate " + std::to_string(r));
      run = run_review(c, ctx, *backend, o);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable && e.code() != ErrorCode::ReplayDivergence &&
          e.code() != ErrorCode::UnknownId) {
        throw;
      }
      run.run_id = o.run_id;
      run.case_id = c.case_id;
      run.config_label = o.config_label;
      run.mode = o.mode;
      run.replicate = r;
      run.status = RunStatus::Failed;
      run.error = std::string(code_name(e.code())) + ": " + e.what();
    }
    if (run.status == RunStatus::Failed) out.complete = false;
    out.runs.push_back(std::move(run));
  }
  return out;
}

json to_json(const TaskTranscript& t) {
  json j = {{"call_index", t.call_index}, {"drug_name", t.drug_name},   {"task", t.task},
            {"prompt", t.prompt},         {"prompt_hash", t.prompt_hash}, {"context_chunk_ids", t.context_chunk_ids},
            {"response", t.response}};
  j["med_index"] = t.med_index ? json(*t.med_index) : json(nullptr);
  j["drug_id"] = t.drug_id ? json(*t.drug_id) : json(nullptr);
  return j;
}

TaskTranscript transcript_from_json(const json& j) {
  TaskTranscript t;
  t.call_index = j.at("call_index").get<std::size_t>();
  t.drug_name = j.value("drug_name", "");
  t.task = j.at("task").get<std::string>();
  t.prompt = j.value("prompt", "");
  t.prompt_hash = j.at("prompt_hash").get<std::string>();
  t.context_chunk_ids = j.value("context_chunk_ids", std::vector<std::string>{});
  t.response = j.at("response").get<std::string>();
  if (j.contains("med_index") && !j["med_index"].is_null()) t.med_index = j["med_index"].get<std::size_t>();
  if (j.contains("drug_id") && !j["drug_id"].is_null()) t.drug_id = j["drug_id"].get<std::string>();
  return t;
}

}  // namespace chartreview
