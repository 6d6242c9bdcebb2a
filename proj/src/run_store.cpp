#include "chartreview/run_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;
namespace fs = std::filesystem;

FileLock::FileLock(fs::path target) : lock_(target.string() + ".lock") {
  int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    if (errno == EEXIST) fail(ErrorCode::LockHeld, "another writer holds " + lock_.string());
    fail(ErrorCode::Io, "cannot create " + lock_.string());
  }
  auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

FileLock::~FileLock() {
  std::error_code ec;
  fs::remove(lock_, ec);
}

RunStore::RunStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::Io, "cannot create run directory " + dir_.string());
}

fs::path RunStore::path_for(const std::string& run_id) const {
  if (run_id.empty() || run_id.find_first_of("/\\") != std::string::npos || run_id[0] == '.') {
    fail(ErrorCode::InvalidArgument, "bad run id '" + run_id + "'");
  }
  return dir_ / (run_id + ".jsonl");
}

namespace {

void append_line(std::ofstream& out, const json& j) {
  out << j.dump() << '\n';
  out.flush();
}

json call_record(const ReviewRun& run, const TaskTranscript& t) {
  json j = to_json(t);
  j["type"] = "call";
  j["run_id"] = run.run_id;
  j["case_id"] = run.case_id;
  return j;
}

}  // namespace

void RunStore::save(const ReviewRun& run) {
  auto path = path_for(run.run_id);
  FileLock lock(path);
  if (fs::exists(path)) fail(ErrorCode::DuplicateId, "run '" + run.run_id + "' already stored");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  append_line(out, {{"type", "header"},
                    {"schema_version", kSchemaVersion},
                    {"run_id", run.run_id},
                    {"case_id", run.case_id},
                    {"fingerprint", run.fingerprint},
                    {"config_label", run.config_label},
                    {"mode", run.mode},
                    {"replicate", run.replicate},
                    {"started_at", run.started_at}});
  for (const auto& t : run.transcripts) append_line(out, call_record(run, t));
  json findings = json::array();
  for (const auto& f : run.findings) findings.push_back(to_json(f));
  append_line(out, {{"type", "result"},
                    {"status", run_status_name(run.status)},
                    {"error", run.error},
                    {"note", to_json(run.note)},
                    {"findings", findings},
                    {"warnings", run.warnings},
                    {"finished_at", run.finished_at}});
  if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
}

void RunStore::append_adjudication(const std::string& run_id, const AdjudicationOverride& o) {
  auto path = path_for(run_id);
  FileLock lock(path);
  if (!fs::exists(path)) fail(ErrorCode::UnknownId, "unknown run '" + run_id + "'");
  std::ofstream out(path, std::ios::binary | std::ios::app);
  json j = to_json(o);
  j["type"] = "adjudication";
  j["at"] = utc_timestamp();
  append_line(out, j);
}

bool RunStore::contains(const std::string& run_id) const { return fs::exists(path_for(run_id)); }

StoredRun RunStore::load(const std::string& run_id) const {
  auto path = path_for(run_id);
  if (!fs::exists(path)) fail(ErrorCode::UnknownId, "unknown run '" + run_id + "'");
  return read_run_file(path);
}

std::vector<std::string> RunStore::list() const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end(), natural_less);
  return ids;
}

std::vector<StoredRun> RunStore::load_all() const {
  std::vector<StoredRun> out;
  for (const auto& id : list()) out.push_back(load(id));
  return out;
}

StoredRun read_run_file(const fs::path& path) {
  auto text = read_file(path);
  std::vector<std::string> lines = split(text, '\n');
  bool trailing_newline = !text.empty() && text.back() == '\n';
  if (trailing_newline) lines.pop_back();

  StoredRun s;
  auto& run = s.run;
  bool header = false, result = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      if (i + 1 == lines.size()) {
        s.warnings.push_back(path.filename().string() + ": torn final record dropped");
        break;
      }
      fail(ErrorCode::CorruptStore, path.string() + ": unreadable record at line " + std::to_string(i + 1));
    }
    try {
      auto type = j.at("type").get<std::string>();
      if (type == "header") {
        header = true;
        run.run_id = j.at("run_id").get<std::string>();
        run.case_id = j.at("case_id").get<std::string>();
        run.fingerprint = j.value("fingerprint", "");
        run.config_label = j.value("config_label", "");
        run.mode = j.value("mode", "RagLlmAutonomous");
        run.replicate = j.value("replicate", 1);
        run.started_at = j.value("started_at", "");
      } else if (type == "call") {
        run.transcripts.push_back(transcript_from_json(j));
      } else if (type == "result") {
        result = true;
        run.status = parse_run_status(j.at("status").get<std::string>()).value_or(RunStatus::Incomplete);
        run.error = j.value("error", "");
        run.note = note_from_json(j.at("note"), "/note");
        run.findings.clear();
        const auto& fs_ = j.at("findings");
        for (std::size_t k = 0; k < fs_.size(); ++k) {
          run.findings.push_back(finding_from_json(fs_[k], "/findings/" + std::to_string(k)));
        }
        run.warnings = j.value("warnings", std::vector<std::string>{});
        run.finished_at = j.value("finished_at", "");
      } else if (type == "adjudication") {
        s.overrides.push_back(override_from_json(j));
      }
    } catch (const json::exception& e) {
      fail(ErrorCode::CorruptStore, path.string() + ": bad record at line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (!header) fail(ErrorCode::CorruptStore, path.string() + ": no header record");
  if (!result) {
    run.status = RunStatus::Incomplete;
    s.warnings.push_back(path.filename().string() + ": no result record, run incomplete");
  }
  return s;
}

std::vector<EvalItem> eval_items(const std::vector<StoredRun>& runs, std::vector<std::string>& warnings) {
  std::vector<EvalItem> out;
  for (const auto& s : runs) {
    const auto& r = s.run;
    if (r.status != RunStatus::Complete && r.status != RunStatus::ParseFailed) {
      warnings.push_back(r.run_id + ": skipped, status " + std::string(run_status_name(r.status)));
      continue;
    }
    out.push_back({r.run_id, r.case_id, r.mode, r.config_label, r.replicate, r.findings, s.overrides});
  }
  return out;
}

}  // namespace chartreview
