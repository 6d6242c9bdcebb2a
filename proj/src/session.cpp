#include "chartreview/session.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

double parse_ts(const std::string& ts) {
  std::tm tm{};
  std::istringstream in(ts);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%S");
  if (in.fail()) return 0;
  double frac = 0;
  if (in.peek() == '.') {
    std::string digits;
    in.get();
    while (std::isdigit(in.peek())) digits.push_back(static_cast<char>(in.get()));
    if (!digits.empty()) frac = std::stod("0." + digits);
  }
  return double(timegm(&tm)) + frac;
}

}  // namespace

bool CoPilotSession::revealed_before_submission() const {
  return std::any_of(reveals.begin(), reveals.end(), [](const RevealEvent& e) { return e.before_submission; });
}

ModeLabel CoPilotSession::mode() const {
  return revealed_before_submission() ? ModeLabel::CoPilot : ModeLabel::HumanOnly;
}

json to_json(const CoPilotSession& s) {
  json reveals = json::array();
  for (const auto& r : s.reveals) reveals.push_back({{"at", r.at}, {"before_submission", r.before_submission}});
  json findings = json::array();
  for (const auto& f : s.findings) findings.push_back(to_json(f));
  json ov = json::array();
  for (const auto& o : s.overrides) ov.push_back(to_json(o));
  return {{"session_id", s.session_id},
          {"case_id", s.case_id},
          {"reviewer_id", s.reviewer_id},
          {"blinded", s.blinded},
          // the run id stays hidden while blinded
          {"suggestions_run_id", s.suggestions_run_id && !(s.blinded && !s.submitted()) ? json(*s.suggestions_run_id)
                                                                                        : json(nullptr)},
          {"has_suggestions", s.suggestions_run_id.has_value()},
          {"time_limit", s.time_limit_s},
          {"started_at", s.started_at},
          {"submitted_at", s.submitted_at ? json(*s.submitted_at) : json(nullptr)},
          {"submitted", s.submitted()},
          {"elapsed_seconds", s.elapsed_s},
          {"overtime", s.overtime},
          {"reveal_events", reveals},
          {"revealed_before_submission", s.revealed_before_submission()},
          {"mode", mode_label_name(s.mode())},
          {"assessment", s.note ? json{{"note", to_json(*s.note)}, {"findings", findings}} : json(nullptr)},
          {"score", s.score ? to_json(*s.score) : json(nullptr)},
          {"overrides", ov}};
}

SessionStore::SessionStore(fs::path dir, double default_time_limit_s)
    : dir_(std::move(dir)), default_limit_(default_time_limit_s) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) fail(ErrorCode::Io, "cannot create session directory " + dir_.string());
}

fs::path SessionStore::path_for(const std::string& id) const {
  if (id.empty() || id.find_first_of("/\\") != std::string::npos || id[0] == '.') {
    fail(ErrorCode::UnknownId, "bad session id '" + id + "'");
  }
  return dir_ / (id + ".jsonl");
}

std::shared_ptr<std::mutex> SessionStore::mutex_for(const std::string& id) const {
  std::lock_guard<std::mutex> g(registry_mu_);
  auto& m = locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

void SessionStore::append(const std::string& id, const json& event) const {
  std::ofstream out(path_for(id), std::ios::binary | std::ios::app);
  if (!out) fail(ErrorCode::Io, "cannot write session " + id);
  out << event.dump() << '\n';
  out.flush();
}

CoPilotSession SessionStore::read(const std::string& id) const {
  auto path = path_for(id);
  if (!fs::exists(path)) fail(ErrorCode::UnknownId, "unknown session '" + id + "'");
  auto lines = split(read_file(path), '\n');
  CoPilotSession s;
  bool created = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    json j;
    try {
      j = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      if (i + 1 >= lines.size() || (i + 2 == lines.size() && lines.back().empty())) break;  // torn tail
      fail(ErrorCode::CorruptStore, path.string() + ": unreadable record at line " + std::to_string(i + 1));
    }
    auto type = j.value("type", "");
    if (type == "created") {
      created = true;
      s.session_id = j.at("session_id").get<std::string>();
      s.case_id = j.at("case_id").get<std::string>();
      s.reviewer_id = j.at("reviewer_id").get<std::string>();
      s.blinded = j.at("blinded").get<bool>();
      if (j.contains("suggestions_run_id") && j["suggestions_run_id"].is_string()) {
        s.suggestions_run_id = j["suggestions_run_id"].get<std::string>();
      }
      s.time_limit_s = j.at("time_limit").get<double>();
      s.started_at = j.at("at").get<std::string>();
    } else if (type == "reveal") {
      s.reveals.push_back({j.at("at").get<std::string>(), j.at("before_submission").get<bool>()});
    } else if (type == "assessment") {
      s.submitted_at = j.at("at").get<std::string>();
      s.elapsed_s = j.at("elapsed_seconds").get<double>();
      s.overtime = j.at("overtime").get<bool>();
      s.note = note_from_json(j.at("note"));
      s.findings.clear();
      for (const auto& f : j.at("findings")) s.findings.push_back(finding_from_json(f));
    } else if (type == "score") {
      MatchReport r;
      const auto& rj = j.at("report");
      r.case_id = rj.at("case_id").get<std::string>();
      for (const auto& d : rj.at("drps")) {
        DrpMatch m;
        m.drp_id = d.at("drp_id").get<std::string>();
        m.category = *parse_category(d.at("category").get<std::string>());
        m.severity = *parse_severity(d.at("severity").get<std::string>());
        if (d.at("finding_id").is_string()) m.finding_id = d["finding_id"].get<std::string>();
        r.drps.push_back(m);
      }
      for (const auto& f : rj.at("findings")) {
        FindingMatch m;
        m.finding_id = f.at("finding_id").get<std::string>();
        m.drug_names = f.at("drug_names").get<std::vector<std::string>>();
        m.category = *parse_category(f.at("category").get<std::string>());
        if (f.at("drp_id").is_string()) m.drp_id = f["drp_id"].get<std::string>();
        m.anchored = f.at("outcome").get<std::string>() != "unanchored";
        r.findings.push_back(m);
      }
      for (const auto& o : rj.at("overrides")) r.overrides.push_back(override_from_json(o));
      r.counts = {rj.at("counts").at("tp").get<std::size_t>(), rj.at("counts").at("fp").get<std::size_t>(),
                  rj.at("counts").at("fn").get<std::size_t>()};
      s.score = r;
    } else if (type == "adjudication") {
      s.overrides.push_back(override_from_json(j));
    }
  }
  if (!created) fail(ErrorCode::CorruptStore, path.string() + ": no created record");
  return s;
}

CoPilotSession SessionStore::create(const SessionRequest& req) {
  if (trim(req.case_id).empty()) throw SchemaError("/case_id", "case_id is required");
  if (trim(req.reviewer_id).empty()) throw SchemaError("/reviewer_id", "reviewer_id is required");
  double limit = req.time_limit_s.value_or(default_limit_);
  if (limit <= 0) throw SchemaError("/time_limit", "time_limit must be positive");
  std::string id;
  {
    std::lock_guard<std::mutex> g(registry_mu_);
    for (std::size_t n = list().size() + 1;; ++n) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "session-%04zu", n);
      id = buf;
      int fd = ::open(path_for(id).c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
      if (fd >= 0) {
        ::close(fd);
        break;
      }
    }
  }
  json ev = {{"type", "created"}, {"session_id", id},      {"case_id", req.case_id},
             {"reviewer_id", req.reviewer_id}, {"blinded", req.blinded}, {"time_limit", limit},
             {"at", utc_timestamp()}};
  ev["suggestions_run_id"] = req.suggestions_run_id ? json(*req.suggestions_run_id) : json(nullptr);
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  append(id, ev);
  return read(id);
}

CoPilotSession SessionStore::get(const std::string& id) const {
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  return read(id);
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") ids.push_back(e.path().stem().string());
  }
  std::sort(ids.begin(), ids.end(), natural_less);
  return ids;
}

CoPilotSession SessionStore::reveal(const std::string& id) {
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  auto s = read(id);
  if (s.blinded && !s.submitted()) fail(ErrorCode::Blinded, "suggestions are hidden until the assessment is submitted");
  append(id, {{"type", "reveal"}, {"at", utc_timestamp()}, {"before_submission", !s.submitted()}});
  return read(id);
}

CoPilotSession SessionStore::submit(const std::string& id, const SbarNote& note,
                                    const std::vector<DrpFinding>& findings) {
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  auto s = read(id);
  if (s.submitted()) fail(ErrorCode::AlreadySubmitted, "session '" + id + "' was already submitted");
  auto now = utc_timestamp();
  double elapsed = std::max(0.0, parse_ts(now) - parse_ts(s.started_at));
  json fs_ = json::array();
  for (const auto& f : findings) fs_.push_back(to_json(f));
  append(id, {{"type", "assessment"},
              {"at", now},
              {"elapsed_seconds", elapsed},
              {"overtime", elapsed > s.time_limit_s},
              {"note", to_json(note)},
              {"findings", fs_}});
  return read(id);
}

CoPilotSession SessionStore::record_score(const std::string& id, const MatchReport& report) {
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  auto s = read(id);
  if (!s.submitted()) fail(ErrorCode::NotSubmitted, "session '" + id + "' has no assessment yet");
  append(id, {{"type", "score"}, {"at", utc_timestamp()}, {"report", to_json(report)}});
  return read(id);
}

CoPilotSession SessionStore::adjudicate(const std::string& id, const AdjudicationOverride& o) {
  auto mu = mutex_for(id);
  std::lock_guard<std::mutex> g(*mu);
  auto s = read(id);
  if (!s.submitted()) fail(ErrorCode::NotSubmitted, "session '" + id + "' has no assessment yet");
  json j = to_json(o);
  j["type"] = "adjudication";
  j["at"] = utc_timestamp();
  append(id, j);
  return read(id);
}

std::vector<EvalItem> eval_items(const std::vector<CoPilotSession>& sessions) {
  std::vector<EvalItem> out;
  for (const auto& s : sessions) {
    if (!s.submitted()) continue;
    bool copilot = s.mode() == ModeLabel::CoPilot;
    out.push_back({s.session_id, s.case_id, std::string(mode_label_name(s.mode())), copilot ? "copilot" : "human", 1,
                   s.findings, s.overrides});
  }
  return out;
}

}  // namespace chartreview
