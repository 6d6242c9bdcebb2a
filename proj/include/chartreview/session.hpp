#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartreview/pipeline.hpp"
#include "chartreview/report.hpp"
#include "chartreview/scoring.hpp"

namespace chartreview {

struct RevealEvent {
  std::string at;
  bool before_submission = false;
};

struct CoPilotSession {
  std::string session_id;
  std::string case_id;
  std::string reviewer_id;
  bool blinded = true;
  std::optional<std::string> suggestions_run_id;
  double time_limit_s = 3600;
  std::string started_at;
  std::optional<std::string> submitted_at;
  double elapsed_s = 0;
  bool overtime = false;
  std::vector<RevealEvent> reveals;
  std::optional<SbarNote> note;
  std::vector<DrpFinding> findings;
  std::optional<MatchReport> score;
  std::vector<AdjudicationOverride> overrides;

  bool submitted() const { return submitted_at.has_value(); }
  bool revealed_before_submission() const;
  // CoPilot when suggestions were seen before submitting, else HumanOnly.
  ModeLabel mode() const;
};

nlohmann::json to_json(const CoPilotSession& s);

struct SessionRequest {
  std::string case_id;
  std::string reviewer_id;
  bool blinded = true;
  std::optional<std::string> suggestions_run_id;
  std::optional<double> time_limit_s;
};

// Append-only event log per session under dir/<id>.jsonl. Operations on one
// session are serialised; distinct sessions proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir, double default_time_limit_s = 3600);

  CoPilotSession create(const SessionRequest& req);
  CoPilotSession get(const std::string& id) const;  // UnknownId
  std::vector<std::string> list() const;

  // Blinded before submission; logs a reveal event otherwise.
  CoPilotSession reveal(const std::string& id);
  // AlreadySubmitted on a second call.
  CoPilotSession submit(const std::string& id, const SbarNote& note, const std::vector<DrpFinding>& findings);
  // NotSubmitted before submission.
  CoPilotSession record_score(const std::string& id, const MatchReport& report);
  CoPilotSession adjudicate(const std::string& id, const AdjudicationOverride& o);

 private:
  std::filesystem::path path_for(const std::string& id) const;
  std::shared_ptr<std::mutex> mutex_for(const std::string& id) const;
  void append(const std::string& id, const nlohmann::json& event) const;
  CoPilotSession read(const std::string& id) const;

  std::filesystem::path dir_;
  double default_limit_;
  mutable std::mutex registry_mu_;
  mutable std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

// Submitted sessions as scoreable items, labelled "copilot" or "human".
std::vector<EvalItem> eval_items(const std::vector<CoPilotSession>& sessions);

}  // namespace chartreview
