#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chartreview/casefile.hpp"
#include "chartreview/corpus.hpp"
#include "chartreview/pipeline.hpp"

namespace chartreview {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const ConfusionCounts&) const = default;
};

// accuracy is a percentage and always 100 * recall.
struct MetricSet {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double accuracy = 0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
  ConfusionCounts counts;
};

// EmptyEvaluation when tp = fp = fn = 0.
MetricSet compute_metrics(const ConfusionCounts& c);
double f1_score(double precision, double recall);

enum class MatchMode { Strict, Loose };
std::string_view match_mode_name(MatchMode m);
std::optional<MatchMode> parse_match_mode(std::string_view s);

const std::vector<std::string>& default_action_lexicon();
// True when some word of text is a lexicon verb or a regular inflection of one.
bool has_action_verb(std::string_view text, const std::vector<std::string>& lexicon);

struct MatchOptions {
  MatchMode mode = MatchMode::Strict;
  std::vector<std::string> lexicon = default_action_lexicon();
};

struct DrpMatch {
  std::string drp_id;
  DrpCategory category = DrpCategory::AdverseDrugReaction;
  Severity severity = Severity::NoHarm;
  std::optional<std::string> finding_id;
};

struct FindingMatch {
  std::string finding_id;  // "f<index into the findings list>"
  std::vector<std::string> drug_names;
  DrpCategory category = DrpCategory::AdverseDrugReaction;
  std::optional<std::string> drp_id;
  // Names a prescribed drug (or sits on a control case): counts as FP when unmatched.
  bool anchored = false;
};

struct AdjudicationOverride {
  std::string finding_id;
  std::string drp_id;
  bool match = true;
  std::string author;
  std::string reason;
};

struct MatchReport {
  std::string case_id;
  std::vector<DrpMatch> drps;
  std::vector<FindingMatch> findings;
  std::vector<AdjudicationOverride> overrides;
  ConfusionCounts counts;
};

// Greedy one-to-one assignment in ground-truth order. Findings are tried in a
// canonical order so the result does not depend on input order.
MatchReport match_findings(const std::vector<DrpFinding>& findings, const CaseVignette& c,
                           const std::vector<GroundTruthDrp>& ground_truth, const DrugNameIndex& index,
                           const MatchOptions& opts = {});

// UnknownId for ids absent from the report. Idempotent per (finding, drp).
MatchReport apply_adjudication(MatchReport report, const std::vector<AdjudicationOverride>& overrides);

nlohmann::json to_json(const MatchReport& r);
nlohmann::json to_json(const AdjudicationOverride& o);
AdjudicationOverride override_from_json(const nlohmann::json& j, const std::string& pointer = "");

struct MeanSd {
  double mean = 0;
  double sd = 0;  // sample SD, n - 1
};

MeanSd mean_sd(const std::vector<double>& xs);

struct TriplicateSummary {
  MeanSd precision, recall, f1, accuracy;
};

// WrongArity unless exactly three inputs.
TriplicateSummary aggregate_triplicate(const std::vector<MetricSet>& runs);

enum class StratifyBy { Category, Severity };

struct Bucket {
  std::string name;
  std::size_t matched = 0;
  std::size_t total = 0;
  double accuracy = 0;
};

// Buckets in enum order; empty buckets are left out.
std::vector<Bucket> stratify(const std::vector<MatchReport>& reports, StratifyBy by);

enum class ModeLabel { LlmOnly, RagLlmAutonomous, CoPilot, HumanOnly };
std::string_view mode_label_name(ModeLabel m);
// Also takes the short forms llm, autonomous, copilot, human.
std::optional<ModeLabel> parse_mode_label(std::string_view s);

struct RunScore {
  std::string run_id;
  std::string case_id;
  int replicate = 1;
  MatchReport report;
};

struct ModeEvaluation {
  std::string label;  // configuration label, e.g. "v1"
  std::string mode;
  std::vector<int> replicates;
  std::vector<MetricSet> per_run;  // one per replicate, counts pooled over cases
  TriplicateSummary summary;
  std::vector<Bucket> by_category;
  std::vector<Bucket> by_severity;
};

ModeEvaluation evaluate(const std::string& label, const std::string& mode, const std::vector<RunScore>& scores);

// WrongArity with fewer than two entries. Sorted by mean accuracy, descending.
std::vector<ModeEvaluation> compare_modes(std::vector<ModeEvaluation> modes);

}  // namespace chartreview
