#include "chartreview/cli.hpp"

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "chartreview/config.hpp"
#include "chartreview/error.hpp"
#include "chartreview/json_schema.hpp"
#include "chartreview/report.hpp"
#include "chartreview/service.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

struct EvalArgs {
  std::vector<std::string> runs;
  std::vector<std::string> sessions;
  std::string mode;
  std::string match_mode;
};

EvalResult run_eval(Workspace& ws, const EvalArgs& a, std::vector<std::string>& warnings) {
  std::vector<EvalItem> items;
  std::vector<fs::path> run_dirs(a.runs.begin(), a.runs.end());
  if (run_dirs.empty() && a.sessions.empty()) run_dirs.push_back(ws.config().runs_dir);
  for (const auto& d : run_dirs) {
    if (!fs::is_directory(d)) fail(ErrorCode::NoRuns, "no run directory at " + d.string());
    auto stored = RunStore(d).load_all();
    for (const auto& s : stored) {
      for (const auto& w : s.warnings) warnings.push_back(w);
    }
    auto more = eval_items(stored, warnings);
    items.insert(items.end(), more.begin(), more.end());
  }
  for (const auto& d : a.sessions) {
    if (!fs::is_directory(d)) continue;
    SessionStore store(d);
    std::vector<CoPilotSession> sessions;
    for (const auto& id : store.list()) sessions.push_back(store.get(id));
    auto more = eval_items(sessions);
    items.insert(items.end(), more.begin(), more.end());
  }
  if (!a.mode.empty()) {
    auto m = parse_mode_label(a.mode);
    if (!m) fail(ErrorCode::InvalidArgument, "unknown mode '" + a.mode + "'");
    std::erase_if(items, [&](const EvalItem& e) { return e.mode != mode_label_name(*m); });
  }
  if (items.empty()) fail(ErrorCode::NoRuns, "no scoreable runs found");
  auto opts = ws.match_options();
  if (!a.match_mode.empty()) {
    auto mm = parse_match_mode(a.match_mode);
    if (!mm) fail(ErrorCode::InvalidArgument, "expected strict or loose, got '" + a.match_mode + "'");
    opts.mode = *mm;
  }
  auto result = evaluate_items(items, ws.dataset(), ws.corpus().index, opts);
  warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
  return result;
}

void add_eval_options(CLI::App* cmd, EvalArgs& a) {
  cmd->add_option("--runs", a.runs, "Run directories (default: configured runs dir)");
  cmd->add_option("--sessions", a.sessions, "Session directories");
  cmd->add_option("--mode", a.mode, "Keep one mode: llm, autonomous, copilot, human");
  cmd->add_option("--match-mode", a.match_mode, "strict or loose");
}

}  // namespace

int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Medication chart review engine", "chartreview"};
  app.require_subcommand(1);

  std::string config_path, data_dir, runs_dir, sessions_dir, index_dir, reports_dir;
  std::size_t parallelism = 0;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--data", data_dir, "Dataset directory (corpus/, cases/, groundtruth/)");
  app.add_option("--runs-dir", runs_dir, "Run store directory");
  app.add_option("--sessions-dir", sessions_dir, "Session store directory");
  app.add_option("--index-dir", index_dir, "Index cache directory");
  app.add_option("--reports-dir", reports_dir, "Report output directory");
  app.add_option("--parallelism", parallelism, "Concurrent backend calls per run");

  auto* ingest = app.add_subcommand("ingest", "Validate corpus, cases and ground truth");

  std::string version = "v1";
  std::string index_out;
  auto* index_cmd = app.add_subcommand("index", "Build and persist a retrieval index");
  index_cmd->add_option("--version", version, "v1 (flat) or v2 (hierarchical)");
  index_cmd->add_option("--out", index_out, "Output file (default: <index-dir>/<version>.json)");

  ReviewRequest rr;
  std::string script, replay, mode = "autonomous";
  auto* review = app.add_subcommand("review", "Run the review pipeline on one case");
  review->add_option("--case", rr.case_id, "Case id")->required();
  review->add_option("--backend", rr.backend, "mock, replay or remote")
      ->check(CLI::IsMember({"mock", "replay", "remote"}));
  review->add_option("--version", rr.version, "v1 or v2")->check(CLI::IsMember({"v1", "v2"}));
  review->add_flag("--triplicate", rr.triplicate, "Run three replicates");
  review->add_option("--script", script, "Mock script (JSON)");
  review->add_option("--replay", replay, "Transcript file or directory for the replay backend");
  review->add_option("--run-id", rr.run_id, "Run id (triplicates append -r1..-r3)");
  review->add_option("--mode", mode, "autonomous or llm");
  review->add_option("--label", rr.label, "Configuration label used in reports");

  EvalArgs eval_args;
  bool eval_json = false;
  auto* eval = app.add_subcommand("eval", "Score stored runs against ground truth");
  add_eval_options(eval, eval_args);
  eval->add_flag("--json", eval_json, "Print the JSON report");

  EvalArgs report_args;
  std::string report_out, schema_path;
  auto* report = app.add_subcommand("report", "Write metrics.csv and metrics.json");
  add_eval_options(report, report_args);
  report->add_option("--out", report_out, "Output directory (default: reports dir)");
  report->add_option("--schema", schema_path, "Validate the JSON against this schema");

  std::string host;
  int port = 0;
  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  auto* stats = app.add_subcommand("stats", "Dataset statistics");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "ERROR INVALID_ARGUMENT: " << e.what() << "\n";
    return 1;
  }

  try {
    AppConfig cfg = config_path.empty() ? AppConfig{} : load_config(config_path);
    if (!data_dir.empty()) cfg.data_dir = data_dir;
    if (!runs_dir.empty()) cfg.runs_dir = runs_dir;
    if (!sessions_dir.empty()) cfg.sessions_dir = sessions_dir;
    if (!index_dir.empty()) cfg.index_dir = index_dir;
    if (!reports_dir.empty()) cfg.reports_dir = reports_dir;
    if (parallelism > 0) cfg.parallelism = parallelism;
    Workspace ws(cfg);

    if (*ingest) {
      const auto& corpus = ws.corpus();
      const auto& data = ws.dataset();
      auto missing = unresolved_drugs(data.drps, corpus.index);
      std::size_t unresolved_meds = 0;
      for (const auto& c : data.cases) {
        for (const auto& m : c.medications) {
          if (!corpus.index.resolve_mention(m.name)) {
            err << "warning: case " << c.case_id << ": medication '" << m.name << "' has no monograph\n";
            unresolved_meds++;
          }
        }
      }
      if (!missing.empty()) fail(ErrorCode::UnknownDrug, "ground truth names unknown drugs: " + join(missing, ", "));
      out << "monographs=" << corpus.monographs.size() << " guidelines=" << corpus.guidelines.size()
          << " cases=" << data.cases.size() << " drps=" << data.drps.size() << "\n";
      out << "corpus_hash=" << corpus.hash << " unresolved_medications=" << unresolved_meds << "\n";
      return 0;
    }

    if (*index_cmd) {
      const auto& want = cfg.retrieval_for(version);
      auto built = KnowledgeIndex::build(ws.corpus(), want, ws.embedder());
      fs::path path = index_out.empty() ? cfg.index_dir / (ascii_lower(version) + ".json") : fs::path(index_out);
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      built.save(path);
      out << "index=" << path.string() << " strategy=" << strategy_name(want.strategy)
          << " leaves=" << built.index().size() << " embedder=" << built.embedder_name() << "\n";
      return 0;
    }

    if (*review) {
      if (!script.empty()) rr.script = script;
      if (!replay.empty()) rr.replay = replay;
      auto m = parse_mode_label(mode);
      if (!m || *m == ModeLabel::CoPilot || *m == ModeLabel::HumanOnly) {
        fail(ErrorCode::InvalidArgument, "review --mode expects autonomous or llm");
      }
      rr.mode = std::string(mode_label_name(*m));
      auto runs = ws.review(rr);
      int status = 0;
      for (const auto& r : runs) {
        out << r.run_id << " status=" << run_status_name(r.status) << " calls=" << r.transcripts.size()
            << " findings=" << r.findings.size() << " file=" << ws.runs().path_for(r.run_id).string() << "\n";
        for (const auto& w : r.warnings) err << "warning: " << r.run_id << ": " << w << "\n";
        if (r.status == RunStatus::Failed) {
          err << "ERROR " << trim(split(r.error, ':').front()) << ": " << r.run_id << ": " << r.error << "\n";
          status = 2;
        }
      }
      return status;
    }

    if (*eval) {
      std::vector<std::string> warnings;
      auto result = run_eval(ws, eval_args, warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      if (eval_json) {
        out << report_json(result.modes).dump(2) << "\n";
        return 0;
      }
      auto names = column_names(result.modes);
      for (std::size_t i = 0; i < result.modes.size(); ++i) {
        const auto& m = result.modes[i];
        out << names[i] << " mode=" << m.mode << " runs=" << m.per_run.size();
        out << " precision=" << num(m.summary.precision.mean) << "±" << num(m.summary.precision.sd);
        out << " recall=" << num(m.summary.recall.mean) << "±" << num(m.summary.recall.sd);
        out << " f1=" << num(m.summary.f1.mean) << "±" << num(m.summary.f1.sd);
        out << " accuracy=" << num(m.summary.accuracy.mean) << "±" << num(m.summary.accuracy.sd) << "\n";
      }
      return 0;
    }

    if (*report) {
      std::vector<std::string> warnings;
      auto result = run_eval(ws, report_args, warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      auto j = report_json(result.modes);
      if (!schema_path.empty()) require_schema(j, json::parse(read_file(schema_path)));
      fs::path dir = report_out.empty() ? cfg.reports_dir : fs::path(report_out);
      fs::create_directories(dir);
      write_file(dir / "metrics.csv", report_csv(result.modes));
      write_file(dir / "metrics.json", j.dump(2) + "\n");
      out << "csv=" << (dir / "metrics.csv").string() << " json=" << (dir / "metrics.json").string()
          << " modes=" << result.modes.size() << "\n";
      return 0;
    }

    if (*serve) {
      ws.corpus();
      ws.dataset();
      ws.index("v1");
      Service svc(ws);
      auto h = host.empty() ? cfg.host : host;
      auto p = port > 0 ? port : cfg.port;
      out << "listening on http://" << h << ":" << p << "/api/v1\n" << std::flush;
      if (!svc.serve(h, p)) fail(ErrorCode::Io, "cannot listen on " + h + ":" + std::to_string(p));
      return 0;
    }

    if (*stats) {
      const auto& data = ws.dataset();
      auto s = dataset_stats(data.cases, data.drps);
      out << "cases=" << s.n_cases << " drps=" << s.n_drps << "\n";
      out << "control_cases=" << s.n_control << "\n";
      out << "severity";
      for (auto sev : {Severity::Serious, Severity::Moderate, Severity::Minor, Severity::NoHarm}) {
        auto it = s.severity_histogram.find(sev);
        out << " " << severity_name(sev) << "=" << (it == s.severity_histogram.end() ? 0 : it->second) << " ("
            << pct(s.severity_percent(sev)) << "%)";
      }
      out << "\ncategory";
      for (auto c : kAllCategories) {
        auto it = s.category_histogram.find(c);
        out << " " << category_name(c) << "=" << (it == s.category_histogram.end() ? 0 : it->second);
      }
      out << "\nmedications_per_case median=" << num(s.medications_per_case.median)
          << " q1=" << num(s.medications_per_case.q1) << " q3=" << num(s.medications_per_case.q3) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    err << "ERROR " << code_name(e.code()) << ": " << e.what() << "\n";
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "ERROR IO: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace chartreview
