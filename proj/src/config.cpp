#include "chartreview/config.hpp"

#include <cstdlib>
#include <set>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;
namespace fs = std::filesystem;

const RetrievalConfig& AppConfig::retrieval_for(const std::string& version) const {
  auto it = retrieval.find(ascii_lower(version));
  if (it == retrieval.end()) fail(ErrorCode::InvalidArgument, "unknown retrieval version '" + version + "'");
  return it->second;
}

namespace {

void check_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    if (!ok.count(k)) throw SchemaError(ptr + "/" + k, "unknown key");
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& ptr) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(ptr + "/" + key, "wrong type");
  }
}

fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void apply_retrieval(RetrievalConfig& r, const json& j, const std::string& ptr) {
  check_keys(j, ptr, {"chunk_size", "overlap", "sizes", "hier_overlap", "k", "merge_ratio", "max_context_chars"});
  if (j.contains("chunk_size")) r.chunk_size = get<std::size_t>(j, "chunk_size", ptr);
  if (j.contains("overlap")) r.overlap = get<std::size_t>(j, "overlap", ptr);
  if (j.contains("sizes")) r.sizes = get<std::vector<std::size_t>>(j, "sizes", ptr);
  if (j.contains("hier_overlap")) r.hier_overlap = get<std::size_t>(j, "hier_overlap", ptr);
  if (j.contains("k")) r.k = get<std::size_t>(j, "k", ptr);
  if (j.contains("merge_ratio")) r.merge_ratio = get<double>(j, "merge_ratio", ptr);
  if (j.contains("max_context_chars")) r.max_context_chars = get<std::size_t>(j, "max_context_chars", ptr);
  try {
    r.validate();
  } catch (const Error& e) {
    throw SchemaError(ptr, e.what());
  }
}

LlmParams params_from_json(const json& j, const std::string& ptr, LlmParams p = {}) {
  check_keys(j, ptr, {"temperature", "max_output_chars", "seed"});
  if (j.contains("temperature")) p.temperature = get<double>(j, "temperature", ptr);
  if (j.contains("max_output_chars")) p.max_output_chars = get<std::size_t>(j, "max_output_chars", ptr);
  if (j.contains("seed")) {
    if (j["seed"].is_null()) {
      p.seed.reset();
    } else {
      p.seed = get<std::int64_t>(j, "seed", ptr);
    }
  }
  return p;
}

}  // namespace

AppConfig config_from_json(const json& j, const fs::path& base) {
  check_keys(j, "", {"data_dir", "runs_dir", "sessions_dir", "reports_dir", "index_dir", "parallelism", "retrieval",
                     "match_mode", "embedding", "llm", "params", "mock_script", "replay_file", "prompt_template",
                     "cors_origin", "time_limit", "host", "port"});
  AppConfig c;
  auto path_key = [&](const char* key, fs::path& out) {
    if (j.contains(key)) out = resolve_path(base, get<std::string>(j, key, ""));
  };
  path_key("data_dir", c.data_dir);
  path_key("runs_dir", c.runs_dir);
  path_key("sessions_dir", c.sessions_dir);
  path_key("reports_dir", c.reports_dir);
  path_key("index_dir", c.index_dir);
  for (auto [key, slot] : {std::pair{"mock_script", &c.mock_script}, std::pair{"replay_file", &c.replay_file},
                           std::pair{"prompt_template", &c.prompt_template}}) {
    if (j.contains(key)) *slot = resolve_path(base, get<std::string>(j, key, ""));
  }
  if (j.contains("parallelism")) {
    c.parallelism = get<std::size_t>(j, "parallelism", "");
    if (c.parallelism == 0) throw SchemaError("/parallelism", "must be at least 1");
  }
  if (j.contains("retrieval")) {
    check_keys(j["retrieval"], "/retrieval", {"v1", "v2"});
    for (const auto& [version, body] : j["retrieval"].items()) {
      apply_retrieval(c.retrieval[version], body, "/retrieval/" + version);
    }
  }
  if (j.contains("match_mode")) {
    auto m = parse_match_mode(get<std::string>(j, "match_mode", ""));
    if (!m) throw SchemaError("/match_mode", "expected strict or loose");
    c.match_mode = *m;
  }
  if (j.contains("embedding")) {
    const auto& e = j["embedding"];
    check_keys(e, "/embedding", {"kind", "dim", "endpoint", "model", "token_env"});
    if (e.contains("kind")) c.embedding.kind = get<std::string>(e, "kind", "/embedding");
    if (c.embedding.kind != "hash" && c.embedding.kind != "remote") {
      throw SchemaError("/embedding/kind", "expected hash or remote");
    }
    if (e.contains("dim")) c.embedding.dim = get<int>(e, "dim", "/embedding");
    if (c.embedding.dim < 1) throw SchemaError("/embedding/dim", "must be positive");
    if (e.contains("endpoint")) c.embedding.endpoint = get<std::string>(e, "endpoint", "/embedding");
    if (e.contains("model")) c.embedding.model = get<std::string>(e, "model", "/embedding");
    if (e.contains("token_env")) c.embedding.token_env = get<std::string>(e, "token_env", "/embedding");
  }
  if (j.contains("llm")) {
    const auto& l = j["llm"];
    check_keys(l, "/llm", {"endpoint", "model", "token_env"});
    if (l.contains("endpoint")) c.llm.endpoint = get<std::string>(l, "endpoint", "/llm");
    if (l.contains("model")) c.llm.model = get<std::string>(l, "model", "/llm");
    if (l.contains("token_env")) c.llm.token_env = get<std::string>(l, "token_env", "/llm");
  }
  if (j.contains("params")) c.params = params_from_json(j["params"], "/params");
  if (j.contains("cors_origin")) c.cors_origin = get<std::string>(j, "cors_origin", "");
  if (j.contains("time_limit")) {
    c.time_limit_s = get<double>(j, "time_limit", "");
    if (c.time_limit_s <= 0) throw SchemaError("/time_limit", "must be positive");
  }
  if (j.contains("host")) c.host = get<std::string>(j, "host", "");
  if (j.contains("port")) c.port = get<int>(j, "port", "");
  return c;
}

AppConfig load_config(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

std::vector<ScriptRule> default_mock_rules() {
  return {{"Review task: FINAL_SUMMARY",
           "SITUATION: Medication chart review completed.\n"
           "BACKGROUND: Each prescribed medication was reviewed against the reference context.\n"
           "ASSESSMENT: No drug related problems identified.\n"
           "RECOMMENDATION: Continue current therapy.\n"
           "```drp\n```\n"}};
}

ReviewRequest review_request_from_json(const json& j) {
  check_keys(j, "", {"case_id", "version", "backend", "triplicate", "run_id", "mode", "label", "params"});
  ReviewRequest r;
  if (!j.contains("case_id")) throw SchemaError("/case_id", "case_id is required");
  const auto& cid = j["case_id"];
  if (cid.is_string()) {
    r.case_id = cid.get<std::string>();
  } else if (cid.is_number_integer()) {
    r.case_id = std::to_string(cid.get<long long>());
  } else {
    throw SchemaError("/case_id", "expected string");
  }
  if (j.contains("version")) r.version = ascii_lower(get<std::string>(j, "version", ""));
  if (r.version != "v1" && r.version != "v2") throw SchemaError("/version", "expected v1 or v2");
  if (j.contains("backend")) r.backend = get<std::string>(j, "backend", "");
  if (r.backend != "mock" && r.backend != "replay" && r.backend != "remote") {
    throw SchemaError("/backend", "expected mock, replay or remote");
  }
  if (j.contains("triplicate")) r.triplicate = get<bool>(j, "triplicate", "");
  if (j.contains("run_id")) r.run_id = get<std::string>(j, "run_id", "");
  if (j.contains("mode")) {
    auto m = parse_mode_label(get<std::string>(j, "mode", ""));
    if (!m || *m == ModeLabel::CoPilot || *m == ModeLabel::HumanOnly) {
      throw SchemaError("/mode", "expected autonomous or llm");
    }
    r.mode = std::string(mode_label_name(*m));
  }
  if (j.contains("label")) r.label = get<std::string>(j, "label", "");
  if (j.contains("params")) r.params = params_from_json(j["params"], "/params");
  return r;
}

Workspace::Workspace(AppConfig cfg) : cfg_(std::move(cfg)) {}

const Corpus& Workspace::corpus() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!corpus_) corpus_ = std::make_unique<Corpus>(load_corpus(cfg_.data_dir / "corpus"));
  return *corpus_;
}

const Dataset& Workspace::dataset() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!dataset_) dataset_ = std::make_unique<Dataset>(load_dataset(cfg_.data_dir));
  return *dataset_;
}

EmbeddingBackend& Workspace::embedder() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!embedder_) {
    if (cfg_.embedding.kind == "remote") {
      RemoteEmbedderConfig rc;
      rc.endpoint = cfg_.embedding.endpoint;
      rc.model = cfg_.embedding.model;
      rc.dim = cfg_.embedding.dim;
      if (const char* t = std::getenv(cfg_.embedding.token_env.c_str())) rc.token = t;
      embedder_ = std::make_unique<RemoteEmbedder>(rc);
    } else {
      embedder_ = std::make_unique<HashingEmbedder>(cfg_.embedding.dim);
    }
  }
  return *embedder_;
}

namespace {

bool same_config(const RetrievalConfig& a, const RetrievalConfig& b) {
  return a.strategy == b.strategy && a.chunk_size == b.chunk_size && a.overlap == b.overlap && a.sizes == b.sizes &&
         a.hier_overlap == b.hier_overlap && a.k == b.k && a.merge_ratio == b.merge_ratio &&
         a.max_context_chars == b.max_context_chars;
}

}  // namespace

const KnowledgeIndex& Workspace::index(const std::string& version) {
  std::lock_guard<std::recursive_mutex> g(mu_);
  auto key = ascii_lower(version);
  auto& slot = indexes_[key];
  if (slot) return *slot;
  const auto& want = cfg_.retrieval_for(key);
  auto path = cfg_.index_dir / (key + ".json");
  if (fs::exists(path)) {
    try {
      auto loaded = KnowledgeIndex::load(path, corpus(), embedder());
      if (same_config(loaded.config(), want)) {
        slot = std::make_unique<KnowledgeIndex>(std::move(loaded));
        return *slot;
      }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::IndexMismatch && e.code() != ErrorCode::DimensionMismatch &&
          e.code() != ErrorCode::ParseError) {
        throw;
      }
    }
  }
  slot = std::make_unique<KnowledgeIndex>(KnowledgeIndex::build(corpus(), want, embedder()));
  std::error_code ec;
  fs::create_directories(cfg_.index_dir, ec);
  if (!ec) slot->save(path);
  return *slot;
}

const PromptTemplate& Workspace::prompt() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!prompt_) {
    prompt_ = cfg_.prompt_template ? std::make_unique<PromptTemplate>(PromptTemplate::from_file(*cfg_.prompt_template))
                                   : std::make_unique<PromptTemplate>();
  }
  return *prompt_;
}

RunStore& Workspace::runs() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!runs_) runs_ = std::make_unique<RunStore>(cfg_.runs_dir);
  return *runs_;
}

SessionStore& Workspace::sessions() {
  std::lock_guard<std::recursive_mutex> g(mu_);
  if (!sessions_) sessions_ = std::make_unique<SessionStore>(cfg_.sessions_dir, cfg_.time_limit_s);
  return *sessions_;
}

MatchOptions Workspace::match_options() const {
  MatchOptions o;
  o.mode = cfg_.match_mode;
  return o;
}

std::shared_ptr<LlmBackend> Workspace::backend(const ReviewRequest& req, int replicate) {
  if (req.backend == "mock") {
    auto script = req.script ? req.script : cfg_.mock_script;
    if (script) return std::make_shared<ScriptedMock>(ScriptedMock::from_file(*script));
    return std::make_shared<ScriptedMock>(default_mock_rules());
  }
  if (req.backend == "replay") {
    auto path = req.replay ? req.replay : cfg_.replay_file;
    if (!path) fail(ErrorCode::InvalidArgument, "replay backend needs a transcript file");
    std::shared_ptr<const ReplayLog> log;
    {
      std::lock_guard<std::recursive_mutex> g(mu_);
      if (!replay_ || replay_path_ != *path) {
        replay_ = std::make_shared<ReplayLog>(ReplayLog::from_path(*path));
        replay_path_ = *path;
      }
      log = replay_;
    }
    std::string source;
    if (req.replay_run && !req.triplicate) {
      source = *req.replay_run;
    } else {
      auto ids = log->run_ids_for_case(req.case_id);
      if (ids.size() < static_cast<std::size_t>(replicate)) {
        fail(ErrorCode::ReplayDivergence,
             "no recorded run " + std::to_string(replicate) + " for case " + req.case_id + " in " + path->string());
      }
      source = ids[replicate - 1];
    }
    return std::make_shared<ReplayBackend>(log, source);
  }
  if (req.backend == "remote") {
    if (cfg_.llm.endpoint.empty()) fail(ErrorCode::InvalidArgument, "no llm endpoint configured");
    RemoteLlmConfig rc;
    rc.endpoint = cfg_.llm.endpoint;
    rc.model = cfg_.llm.model;
    if (const char* t = std::getenv(cfg_.llm.token_env.c_str())) rc.token = t;
    return std::make_shared<RemoteHttpBackend>(rc);
  }
  fail(ErrorCode::InvalidArgument, "unknown backend '" + req.backend + "'");
}

std::vector<ReviewRun> Workspace::review(const ReviewRequest& req) {
  const auto* c = find_case(dataset().cases, req.case_id);
  if (!c) fail(ErrorCode::UnknownCase, "unknown case '" + req.case_id + "'");
  const auto& kindex = index(req.version);
  PipelineContext ctx{&corpus(), &kindex, &embedder(), &prompt()};

  RunOptions opts;
  opts.mode = req.mode;
  opts.use_retrieval = req.mode != mode_label_name(ModeLabel::LlmOnly);
  opts.config_label = !req.label.empty() ? req.label : (opts.use_retrieval ? ascii_lower(req.version) : "llm");
  opts.parallelism = cfg_.parallelism;
  opts.params = req.params.value_or(cfg_.params);
  opts.run_id = req.run_id;
  if (opts.run_id.empty()) {
    auto stamp = utc_timestamp();
    std::string compact;
    for (char ch : stamp) {
      if (std::isdigit(static_cast<unsigned char>(ch))) compact.push_back(ch);
    }
    opts.run_id = "case" + req.case_id + "-" + opts.config_label + "-" + compact;
  }

  std::vector<ReviewRun> runs;
  if (req.triplicate) {
    auto tri = run_triplicate(*c, ctx, [&](int r) { return backend(req, r); }, opts);
    runs = std::move(tri.runs);
  } else {
    auto b = backend(req, 1);
    runs.push_back(run_review(*c, ctx, *b, opts));
  }
  for (const auto& r : runs) this->runs().save(r);
  return runs;
}

}  // namespace chartreview
