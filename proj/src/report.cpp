#include "chartreview/report.hpp"

#include <cstdio>
#include <map>
#include <set>

#include "chartreview/error.hpp"

namespace chartreview {

using nlohmann::json;

MatchReport score_item(const EvalItem& item, const Dataset& data, const DrugNameIndex& index,
                       const MatchOptions& opts) {
  const auto* c = find_case(data.cases, item.case_id);
  if (!c) fail(ErrorCode::UnknownCase, "unknown case '" + item.case_id + "' in " + item.id);
  auto report = match_findings(item.findings, *c, drps_for_case(data.drps, item.case_id), index, opts);
  if (!item.overrides.empty()) report = apply_adjudication(std::move(report), item.overrides);
  return report;
}

EvalResult evaluate_items(const std::vector<EvalItem>& items, const Dataset& data, const DrugNameIndex& index,
                          const MatchOptions& opts) {
  if (items.empty()) fail(ErrorCode::NoRuns, "nothing to evaluate");
  EvalResult out;
  std::map<std::pair<std::string, std::string>, std::vector<RunScore>> groups;
  for (const auto& item : items) {
    MatchReport report;
    try {
      report = score_item(item, data, index, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnknownId) throw;
      out.warnings.push_back(item.id + ": adjudication ignored: " + e.what());
      EvalItem plain = item;
      plain.overrides.clear();
      report = score_item(plain, data, index, opts);
    }
    groups[{item.mode, item.label}].push_back({item.id, item.case_id, item.replicate, std::move(report)});
    out.items++;
  }
  for (const auto& [key, scores] : groups) {
    try {
      out.modes.push_back(evaluate(key.second, key.first, scores));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyEvaluation) throw;
      out.warnings.push_back(key.first + "/" + key.second + ": " + e.what());
    }
  }
  if (out.modes.size() >= 2) {
    out.modes = compare_modes(std::move(out.modes));
  }
  return out;
}

std::vector<std::string> column_names(const std::vector<ModeEvaluation>& modes) {
  std::map<std::string, int> seen;
  for (const auto& m : modes) seen[m.label]++;
  std::vector<std::string> out;
  for (const auto& m : modes) out.push_back(seen[m.label] > 1 ? m.mode + "-" + m.label : m.label);
  return out;
}

namespace {

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

json mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

json heat(const std::vector<ModeEvaluation>& modes, const std::vector<std::string>& cols, bool category) {
  json rows = json::array();
  json values = json::array();
  auto names = column_names(modes);
  for (std::size_t i = 0; i < modes.size(); ++i) {
    rows.push_back(names[i]);
    const auto& buckets = category ? modes[i].by_category : modes[i].by_severity;
    json row = json::array();
    for (const auto& c : cols) {
      json v = nullptr;
      for (const auto& b : buckets) {
        if (b.name == c) v = b.accuracy;
      }
      row.push_back(v);
    }
    values.push_back(row);
  }
  return {{"rows", rows}, {"columns", cols}, {"values", values}};
}

}  // namespace

std::string report_csv(const std::vector<ModeEvaluation>& modes) {
  auto names = column_names(modes);
  std::string out = "metric";
  for (const auto& n : names) out += "," + n + "_mean," + n + "_sd";
  out += "\n";
  struct Row {
    const char* name;
    MeanSd TriplicateSummary::*field;
  };
  for (auto row : {Row{"Precision", &TriplicateSummary::precision}, Row{"Recall", &TriplicateSummary::recall},
                   Row{"F1", &TriplicateSummary::f1}, Row{"Accuracy (%)", &TriplicateSummary::accuracy}}) {
    out += row.name;
    for (const auto& m : modes) {
      const auto& v = m.summary.*row.field;
      out += "," + fmt3(v.mean) + "," + fmt3(v.sd);
    }
    out += "\n";
  }
  return out;
}

json report_json(const std::vector<ModeEvaluation>& modes) {
  std::vector<std::string> cats, sevs;
  for (auto c : kAllCategories) cats.emplace_back(category_name(c));
  for (auto s : kAllSeverities) sevs.emplace_back(severity_name(s));
  auto names = column_names(modes);

  json jm = json::array();
  json series = json::array();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    json per_run = json::array();
    for (std::size_t r = 0; r < m.per_run.size(); ++r) {
      const auto& ms = m.per_run[r];
      per_run.push_back({{"replicate", m.replicates[r]},
                         {"precision", ms.precision},
                         {"recall", ms.recall},
                         {"f1", ms.f1},
                         {"accuracy", ms.accuracy},
                         {"tp", ms.counts.tp},
                         {"fp", ms.counts.fp},
                         {"fn", ms.counts.fn},
                         {"precision_undefined", ms.precision_undefined},
                         {"f1_undefined", ms.f1_undefined}});
    }
    auto buckets = [](const std::vector<Bucket>& bs) {
      json a = json::array();
      for (const auto& b : bs) {
        a.push_back({{"name", b.name}, {"matched", b.matched}, {"total", b.total}, {"accuracy", b.accuracy}});
      }
      return a;
    };
    jm.push_back({{"column", names[i]},
                  {"label", m.label},
                  {"mode", m.mode},
                  {"metrics",
                   {{"precision", mean_sd_json(m.summary.precision)},
                    {"recall", mean_sd_json(m.summary.recall)},
                    {"f1", mean_sd_json(m.summary.f1)},
                    {"accuracy", mean_sd_json(m.summary.accuracy)}}},
                  {"per_run", per_run},
                  {"by_category", buckets(m.by_category)},
                  {"by_severity", buckets(m.by_severity)}});
    series.push_back({{"column", names[i]},
                      {"values", {m.summary.precision.mean, m.summary.recall.mean, m.summary.f1.mean}}});
  }
  return {{"schema_version", kSchemaVersion},
          {"categories", cats},
          {"severities", sevs},
          {"modes", jm},
          {"radar", {{"axes", {"precision", "recall", "f1"}}, {"series", series}}},
          {"heatmap", {{"category", heat(modes, cats, true)}, {"severity", heat(modes, sevs, false)}}}};
}

}  // namespace chartreview
