#include "chartreview/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;

MetricSet compute_metrics(const ConfusionCounts& c) {
  if (c.tp == 0 && c.fp == 0 && c.fn == 0) fail(ErrorCode::EmptyEvaluation, "no findings and no ground truth");
  MetricSet m;
  m.counts = c;
  if (c.tp + c.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = double(c.tp) / double(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = double(c.tp) / double(c.tp + c.fn);
  }
  if (m.precision + m.recall == 0) {
    m.f1_undefined = true;
  } else {
    m.f1 = f1_score(m.precision, m.recall);
  }
  m.accuracy = 100.0 * m.recall;
  return m;
}

double f1_score(double p, double r) {
  if (p + r == 0) return 0;
  return 2 * p * r / (p + r);
}

std::string_view match_mode_name(MatchMode m) { return m == MatchMode::Strict ? "strict" : "loose"; }

std::optional<MatchMode> parse_match_mode(std::string_view s) {
  auto v = ascii_lower(trim(s));
  if (v == "strict") return MatchMode::Strict;
  if (v == "loose") return MatchMode::Loose;
  return std::nullopt;
}

const std::vector<std::string>& default_action_lexicon() {
  static const std::vector<std::string> lex = {"hold",   "stop",     "discontinue", "withhold", "reduce",
                                               "decrease", "increase", "adjust",    "switch",   "change",
                                               "substitute", "start",  "add",       "initiate", "order",
                                               "monitor", "check",    "correct",    "avoid"};
  return lex;
}

namespace {

bool inflects(const std::string& word, const std::string& verb) {
  if (word == verb) return true;
  if (word.size() <= verb.size() - (verb.back() == 'e' ? 1 : 0)) return false;
  for (const char* suf : {"s", "es", "ed", "d", "ing"}) {
    if (word == verb + suf) return true;
  }
  // doubled final consonant: stopped, stopping, added
  std::string dbl = verb + verb.back();
  if (word == dbl + "ed" || word == dbl + "ing") return true;
  // dropped e: reducing, changing
  if (verb.back() == 'e' && word == verb.substr(0, verb.size() - 1) + "ing") return true;
  return false;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalpha(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool categories_agree(DrpCategory a, DrpCategory b) {
  if (a == b) return true;
  auto adr_like = [](DrpCategory c) { return c == DrpCategory::AdverseDrugReaction || c == DrpCategory::Allergy; };
  return adr_like(a) && adr_like(b);
}

void recount(MatchReport& r) {
  ConfusionCounts c;
  for (const auto& d : r.drps) (d.finding_id ? c.tp : c.fn)++;
  for (const auto& f : r.findings) {
    if (!f.drp_id && f.anchored) c.fp++;
  }
  r.counts = c;
}

}  // namespace

bool has_action_verb(std::string_view text, const std::vector<std::string>& lexicon) {
  for (const auto& w : words(text)) {
    for (const auto& v : lexicon) {
      if (!v.empty() && inflects(w, ascii_lower(v))) return true;
    }
  }
  return false;
}

MatchReport match_findings(const std::vector<DrpFinding>& findings, const CaseVignette& c,
                           const std::vector<GroundTruthDrp>& ground_truth, const DrugNameIndex& index,
                           const MatchOptions& opts) {
  MatchReport r;
  r.case_id = c.case_id;

  std::set<std::string> prescribed;
  for (const auto& m : c.medications) {
    if (auto id = index.resolve_mention(m.name)) prescribed.insert(*id);
  }

  struct Prepared {
    std::size_t idx;
    std::set<std::string> ids;
    bool action;
    std::string key;
  };
  std::vector<Prepared> prep;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    const auto& f = findings[i];
    Prepared p{i, {}, has_action_verb(f.action_text, opts.lexicon), {}};
    for (const auto& n : f.drug_names) {
      if (auto id = index.resolve_mention(n)) p.ids.insert(*id);
    }
    std::vector<std::string> sorted_ids(p.ids.begin(), p.ids.end());
    std::vector<std::string> names;
    for (const auto& n : f.drug_names) names.push_back(casefold(n));
    std::sort(names.begin(), names.end());
    p.key = join(sorted_ids, ";") + '\x1f' + std::string(category_name(f.category)) + '\x1f' +
            casefold(f.action_text) + '\x1f' + casefold(f.rationale) + '\x1f' + join(names, ";");
    prep.push_back(std::move(p));

    FindingMatch fm;
    fm.finding_id = "f" + std::to_string(i);
    fm.drug_names = f.drug_names;
    fm.category = f.category;
    fm.anchored = c.is_control;
    for (const auto& id : prep.back().ids) {
      if (prescribed.count(id)) fm.anchored = true;
    }
    r.findings.push_back(std::move(fm));
  }
  std::stable_sort(prep.begin(), prep.end(), [](const Prepared& a, const Prepared& b) { return a.key < b.key; });

  std::vector<bool> used(findings.size(), false);
  for (const auto& d : ground_truth) {
    if (d.case_id != c.case_id) continue;
    DrpMatch dm{d.drp_id, d.category, d.severity, std::nullopt};
    std::set<std::string> involved;
    for (const auto& n : d.involved_drugs) {
      if (auto id = index.resolve(n)) involved.insert(*id);
    }
    for (const auto& p : prep) {
      if (used[p.idx] || !p.action || involved.empty()) continue;
      const auto& f = findings[p.idx];
      if (opts.mode == MatchMode::Strict && !categories_agree(f.category, d.category)) continue;
      std::size_t hit = 0;
      for (const auto& id : involved) hit += p.ids.count(id);
      bool anchor = d.requires_all_drugs ? hit == involved.size() : hit > 0;
      if (!anchor) continue;
      used[p.idx] = true;
      dm.finding_id = r.findings[p.idx].finding_id;
      r.findings[p.idx].drp_id = d.drp_id;
      break;
    }
    r.drps.push_back(std::move(dm));
  }
  recount(r);
  return r;
}

MatchReport apply_adjudication(MatchReport report, const std::vector<AdjudicationOverride>& overrides) {
  auto find_f = [&](const std::string& id) {
    auto it = std::find_if(report.findings.begin(), report.findings.end(),
                           [&](const FindingMatch& f) { return f.finding_id == id; });
    if (it == report.findings.end()) fail(ErrorCode::UnknownId, "unknown finding id '" + id + "'");
    return it;
  };
  auto find_d = [&](const std::string& id) {
    auto it = std::find_if(report.drps.begin(), report.drps.end(), [&](const DrpMatch& d) { return d.drp_id == id; });
    if (it == report.drps.end()) fail(ErrorCode::UnknownId, "unknown drp id '" + id + "'");
    return it;
  };
  for (const auto& o : overrides) {
    auto f = find_f(o.finding_id);
    auto d = find_d(o.drp_id);
    if (o.match) {
      if (d->finding_id && *d->finding_id != o.finding_id) find_f(*d->finding_id)->drp_id.reset();
      if (f->drp_id && *f->drp_id != o.drp_id) find_d(*f->drp_id)->finding_id.reset();
      d->finding_id = o.finding_id;
      f->drp_id = o.drp_id;
    } else if (d->finding_id == o.finding_id) {
      d->finding_id.reset();
      f->drp_id.reset();
    }
    auto same = std::find_if(report.overrides.begin(), report.overrides.end(), [&](const AdjudicationOverride& x) {
      return x.finding_id == o.finding_id && x.drp_id == o.drp_id;
    });
    if (same != report.overrides.end()) {
      *same = o;
    } else {
      report.overrides.push_back(o);
    }
  }
  recount(report);
  return report;
}

json to_json(const AdjudicationOverride& o) {
  return {{"finding_id", o.finding_id}, {"drp_id", o.drp_id}, {"match", o.match},
          {"author", o.author},         {"reason", o.reason}};
}

AdjudicationOverride override_from_json(const json& j, const std::string& pointer) {
  if (!j.is_object()) throw SchemaError(pointer, "override must be an object");
  AdjudicationOverride o;
  for (const char* k : {"finding_id", "drp_id"}) {
    if (!j.contains(k) || !j[k].is_string()) throw SchemaError(pointer + "/" + k, "missing string");
  }
  o.finding_id = j["finding_id"].get<std::string>();
  o.drp_id = j["drp_id"].get<std::string>();
  if (j.contains("match")) {
    if (!j["match"].is_boolean()) throw SchemaError(pointer + "/match", "expected boolean");
    o.match = j["match"].get<bool>();
  }
  if (!j.contains("author") || !j["author"].is_string() || j["author"].get<std::string>().empty()) {
    throw SchemaError(pointer + "/author", "author is required");
  }
  o.author = j["author"].get<std::string>();
  o.reason = j.value("reason", "");
  return o;
}

json to_json(const MatchReport& r) {
  json drps = json::array();
  for (const auto& d : r.drps) {
    drps.push_back({{"drp_id", d.drp_id},
                    {"category", category_name(d.category)},
                    {"severity", severity_name(d.severity)},
                    {"finding_id", d.finding_id ? json(*d.finding_id) : json(nullptr)},
                    {"outcome", d.finding_id ? "TP" : "FN"}});
  }
  json fs = json::array();
  for (const auto& f : r.findings) {
    fs.push_back({{"finding_id", f.finding_id},
                  {"drug_names", f.drug_names},
                  {"category", category_name(f.category)},
                  {"drp_id", f.drp_id ? json(*f.drp_id) : json(nullptr)},
                  {"outcome", f.drp_id ? "TP" : (f.anchored ? "FP" : "unanchored")}});
  }
  json ov = json::array();
  for (const auto& o : r.overrides) ov.push_back(to_json(o));
  return {{"case_id", r.case_id},
          {"drps", drps},
          {"findings", fs},
          {"overrides", ov},
          {"counts", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"fn", r.counts.fn}}}};
}

MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / double(xs.size() - 1));
  }
  return out;
}

TriplicateSummary aggregate_triplicate(const std::vector<MetricSet>& runs) {
  if (runs.size() != 3) fail(ErrorCode::WrongArity, "expected 3 runs, got " + std::to_string(runs.size()));
  auto pick = [&](double MetricSet::*field) {
    std::vector<double> v;
    for (const auto& m : runs) v.push_back(m.*field);
    return mean_sd(v);
  };
  return {pick(&MetricSet::precision), pick(&MetricSet::recall), pick(&MetricSet::f1), pick(&MetricSet::accuracy)};
}

std::vector<Bucket> stratify(const std::vector<MatchReport>& reports, StratifyBy by) {
  std::map<int, Bucket> buckets;
  for (const auto& r : reports) {
    for (const auto& d : r.drps) {
      int key = by == StratifyBy::Category ? int(d.category) : int(d.severity);
      auto& b = buckets[key];
      if (b.name.empty()) {
        b.name = std::string(by == StratifyBy::Category ? category_name(d.category) : severity_name(d.severity));
      }
      b.total++;
      if (d.finding_id) b.matched++;
    }
  }
  std::vector<Bucket> out;
  auto emit = [&](int key) {
    auto it = buckets.find(key);
    if (it == buckets.end()) return;
    it->second.accuracy = 100.0 * double(it->second.matched) / double(it->second.total);
    out.push_back(it->second);
  };
  if (by == StratifyBy::Category) {
    for (auto c : kAllCategories) emit(int(c));
  } else {
    for (auto s : kAllSeverities) emit(int(s));
  }
  return out;
}

std::string_view mode_label_name(ModeLabel m) {
  switch (m) {
    case ModeLabel::LlmOnly: return "LlmOnly";
    case ModeLabel::RagLlmAutonomous: return "RagLlmAutonomous";
    case ModeLabel::CoPilot: return "CoPilot";
    case ModeLabel::HumanOnly: return "HumanOnly";
  }
  return "";
}

std::optional<ModeLabel> parse_mode_label(std::string_view s) {
  std::string v;
  for (char ch : s) {
    if (ch != '-' && ch != '_' && ch != ' ') v.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  if (v == "llmonly" || v == "llm") return ModeLabel::LlmOnly;
  if (v == "ragllmautonomous" || v == "autonomous") return ModeLabel::RagLlmAutonomous;
  if (v == "copilot") return ModeLabel::CoPilot;
  if (v == "humanonly" || v == "human") return ModeLabel::HumanOnly;
  return std::nullopt;
}

ModeEvaluation evaluate(const std::string& label, const std::string& mode, const std::vector<RunScore>& scores) {
  if (scores.empty()) fail(ErrorCode::NoRuns, "no scored runs for '" + label + "'");
  ModeEvaluation ev;
  ev.label = label;
  ev.mode = mode;
  std::map<int, ConfusionCounts> by_rep;
  std::vector<MatchReport> reports;
  for (const auto& s : scores) {
    by_rep[s.replicate] += s.report.counts;
    reports.push_back(s.report);
  }
  for (const auto& [rep, counts] : by_rep) {
    ev.replicates.push_back(rep);
    ev.per_run.push_back(compute_metrics(counts));
  }
  if (ev.per_run.size() == 3) {
    ev.summary = aggregate_triplicate(ev.per_run);
  } else {
    auto pick = [&](double MetricSet::*field) {
      std::vector<double> v;
      for (const auto& m : ev.per_run) v.push_back(m.*field);
      return mean_sd(v);
    };
    ev.summary = {pick(&MetricSet::precision), pick(&MetricSet::recall), pick(&MetricSet::f1),
                  pick(&MetricSet::accuracy)};
  }
  ev.by_category = stratify(reports, StratifyBy::Category);
  ev.by_severity = stratify(reports, StratifyBy::Severity);
  return ev;
}

std::vector<ModeEvaluation> compare_modes(std::vector<ModeEvaluation> modes) {
  if (modes.size() < 2) fail(ErrorCode::WrongArity, "comparison needs at least two modes");
  std::stable_sort(modes.begin(), modes.end(), [](const ModeEvaluation& a, const ModeEvaluation& b) {
    if (a.summary.accuracy.mean != b.summary.accuracy.mean) return a.summary.accuracy.mean > b.summary.accuracy.mean;
    return a.label < b.label;
  });
  return modes;
}

}  // namespace chartreview
