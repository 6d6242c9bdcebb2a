#include "support.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chartreview/text.hpp"

namespace testsupport {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path source_dir() { return CHARTREVIEW_SOURCE_DIR; }
fs::path data_dir() { return source_dir() / "data"; }
fs::path cli_path() { return CHARTREVIEW_CLI; }

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("chartreview-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CliResult run_cli(const std::vector<std::string>& args, const fs::path& cwd) {
  static std::atomic<int> counter{0};
  auto tag = std::to_string(::getpid()) + "-" + std::to_string(counter++);
  auto out_file = fs::temp_directory_path() / ("cr-out-" + tag);
  auto err_file = fs::temp_directory_path() / ("cr-err-" + tag);
  std::string cmd = "cd " + quote(cwd.string()) + " && " + quote(cli_path().string());
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " >" + quote(out_file.string()) + " 2>" + quote(err_file.string());
  int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return r;
}

void write(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string monograph_md(const std::string& id, const std::string& name, const std::vector<std::string>& aliases,
                         const std::string& adverse, const std::string& mech, const std::string& interactions,
                         const std::string& dosing) {
  std::string s = "---\ndrug_id: " + id + "\ncanonical_name: " + name + "\naliases: " +
                  chartreview::join(aliases, ", ") + "\natc_codes: X00\n---\n\n";
  s += "# ADVERSE_CAUTIONS_CONTRA\n\n" + adverse + "\n\n";
  s += "# ATC_MECHANISM\n\n" + mech + "\n\n";
  s += "# INTERACTIONS\n\n" + interactions + "\n\n";
  s += "# DOSING_ADJUSTMENTS\n\n" + dosing + "\n";
  return s;
}

SyntheticSet write_synthetic_set(const fs::path& root) {
  SyntheticSet set;
  set.root = root;
  auto mono = root / "corpus" / "monographs";
  write(mono / "zentrolol.md",
        monograph_md("zentrolol", "Zentrolol", {"Zentrolol Tablet"},
                     "Bradycardia and fatigue. SENTINEL-ADR-ZEN: avoid when heart rate is below 50.",
                     "Selective beta blocker.",
                     "SENTINEL-DDI-ZEN-MIL: milbrafen raises zentrolol exposure threefold.",
                     "Start at 2.5 mg daily. Maximum 10 mg daily."));
  write(mono / "milbrafen.md",
        monograph_md("milbrafen", "Milbrafen", {"Milbrafen Capsule"}, "Nausea and headache.",
                     "Strong enzyme inhibitor used for migraine prophylaxis.",
                     "SENTINEL-DDI-MIL-ZEN: inhibits zentrolol clearance; reduce zentrolol dose or avoid.",
                     "100 mg twice daily."));
  write(mono / "quorvastatin.md",
        monograph_md("quorvastatin", "Quorvastatin", {"Quorva"}, "Myalgia.", "Lipid lowering agent.",
                     "No clinically relevant interactions listed.",
                     "SENTINEL-DOSE-QUO: maximum 40 mg daily; reduce to 10 mg when eGFR is below 30."));
  write(root / "corpus" / "guidelines" / "lipids.md",
        "---\nguideline_id: lipids\ntitle: Lipid management\ntags: lipids\n---\n\n"
        "Offer a statin to every patient after a coronary event.\n");

  json s1 = {{"case_id", "S1"},
             {"disciplines", {"Cardiology"}},
             {"clinical_note", "72 year old man, heart rate 48, eGFR 25 mL/min."},
             {"allergies", json::array()},
             {"is_control", false},
             {"medications",
              {{{"name", "Zentrolol Tablet"}, {"dose", "10 mg"}, {"route", "PO"}, {"frequency", "OM"}},
               {{"name", "Milbrafen Capsule"}, {"dose", "100 mg"}, {"route", "PO"}, {"frequency", "BD"}},
               {{"name", "Quorvastatin"}, {"dose", "80 mg"}, {"route", "PO"}, {"frequency", "ON"}}}}};
  json s2 = {{"case_id", "S2"},
             {"disciplines", {"General Medicine"}},
             {"clinical_note", "65 year old woman admitted with cellulitis, heart rate 44."},
             {"allergies", {"penicillin"}},
             {"is_control", false},
             {"medications",
              {{{"name", "Zentrolol"}, {"dose", "5 mg"}, {"route", "PO"}, {"frequency", "OM"}},
               {{"name", "Quorvastatin"}, {"dose", "20 mg"}, {"route", "PO"}, {"frequency", "ON"}}}}};
  write(root / "cases" / "s1.json", s1.dump(2));
  write(root / "cases" / "s2.json", s2.dump(2));

  json gt = json::array();
  gt.push_back({{"drp_id", "S1-1"}, {"case_id", "S1"}, {"category", "DrugDrugInteraction"}, {"severity", "Serious"},
                {"description", "Milbrafen raises zentrolol exposure"}, {"involved_drugs", {"Zentrolol", "Milbrafen"}},
                {"requires_all_drugs", true}});
  gt.push_back({{"drp_id", "S1-2"}, {"case_id", "S1"}, {"category", "InappropriateDosageRegimen"},
                {"severity", "Moderate"}, {"description", "Quorvastatin 80 mg above maximum"},
                {"involved_drugs", {"Quorvastatin"}}, {"requires_all_drugs", false}});
  gt.push_back({{"drp_id", "S2-1"}, {"case_id", "S2"}, {"category", "AdverseDrugReaction"}, {"severity", "Serious"},
                {"description", "Zentrolol with heart rate 44"}, {"involved_drugs", {"Zentrolol"}},
                {"requires_all_drugs", false}});
  write(root / "groundtruth" / "sentinel.json", gt.dump(2));

  auto summary = [](const std::string& drp_lines) {
    return "SITUATION: Chart review.\nBACKGROUND: Synthetic case.\nASSESSMENT: See findings.\n"
           "RECOMMENDATION: Act on each finding.\n```drp\n" +
           drp_lines + "```\n";
  };
  json rules = json::array();
  rules.push_back({{"pattern", "Case reference: S1\\nReview task: FINAL_SUMMARY"},
                   {"response", summary("DRP | drugs=Zentrolol;Milbrafen | category=DrugDrugInteraction | "
                                        "action=reduce zentrolol dose | rationale=milbrafen inhibits clearance\n"
                                        "DRP | drugs=Quorvastatin | category=InappropriateDosageRegimen | "
                                        "action=reduce dose to 10 mg | rationale=above maximum, eGFR 25\n")}});
  rules.push_back({{"pattern", "Case reference: S2\\nReview task: FINAL_SUMMARY"},
                   {"response", summary("DRP | drugs=Zentrolol | category=AdverseDrugReaction | "
                                        "action=hold zentrolol | rationale=heart rate 44\n")}});
  rules.push_back({{"pattern", "SENTINEL-DOSE-QUO"}, {"response", "Dose exceeds the listed maximum."}});
  rules.push_back({{"pattern", "SENTINEL-DDI"}, {"response", "Interaction requires a dose change."}});
  set.script = root / "mock.json";
  write(set.script, json({{"rules", rules}, {"default", "No issue for this task."}}).dump(2));

  set.corpus = chartreview::load_corpus(root / "corpus");
  set.dataset = chartreview::load_dataset(root);
  return set;
}

}  // namespace testsupport
