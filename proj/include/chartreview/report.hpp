#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "chartreview/casefile.hpp"
#include "chartreview/scoring.hpp"

namespace chartreview {

inline constexpr const char* kSchemaVersion = "1";

// One scoreable unit: a stored run or a submitted session.
struct EvalItem {
  std::string id;
  std::string case_id;
  std::string mode;
  std::string label;
  int replicate = 1;
  std::vector<DrpFinding> findings;
  std::vector<AdjudicationOverride> overrides;
};

struct EvalResult {
  std::vector<ModeEvaluation> modes;  // sorted by accuracy, descending
  std::vector<std::string> warnings;
  std::size_t items = 0;
};

// Groups items by (mode, label). NoRuns when items is empty.
EvalResult evaluate_items(const std::vector<EvalItem>& items, const Dataset& data, const DrugNameIndex& index,
                          const MatchOptions& opts = {});

MatchReport score_item(const EvalItem& item, const Dataset& data, const DrugNameIndex& index,
                       const MatchOptions& opts = {});

// metric,<cfg>_mean,<cfg>_sd,... with rows Precision, Recall, F1, Accuracy (%).
std::string report_csv(const std::vector<ModeEvaluation>& modes);

// Metric means/SDs per mode, radar values and category/severity heatmaps.
nlohmann::json report_json(const std::vector<ModeEvaluation>& modes);

std::vector<std::string> column_names(const std::vector<ModeEvaluation>& modes);

}  // namespace chartreview
