#include "chartreview/casefile.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view category_name(DrpCategory c) {
  switch (c) {
    case DrpCategory::AdverseDrugReaction: return "AdverseDrugReaction";
    case DrpCategory::Allergy: return "Allergy";
    case DrpCategory::DrugDrugInteraction: return "DrugDrugInteraction";
    case DrpCategory::DuplicationOfTherapy: return "DuplicationOfTherapy";
    case DrpCategory::InappropriateChoiceOfTherapy: return "InappropriateChoiceOfTherapy";
    case DrpCategory::InappropriateDosageRegimen: return "InappropriateDosageRegimen";
    case DrpCategory::NoIndication: return "NoIndication";
    case DrpCategory::OmissionOfTherapy: return "OmissionOfTherapy";
  }
  return "";
}

namespace {

std::string squash(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == ' ' || c == '-' || c == '_' || c == '\t') continue;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  return out;
}

const json& member(const json& obj, const char* key, const std::string& ptr) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(ptr + "/" + key, std::string("missing required field '") + key + "'");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& ptr, bool required = true,
                         bool non_empty = false) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw SchemaError(ptr + "/" + key, std::string("missing required field '") + key + "'");
    return "";
  }
  if (!it->is_string()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must be a string");
  auto s = it->get<std::string>();
  if (non_empty && trim(s).empty()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must not be empty");
  return s;
}

std::vector<std::string> string_list(const json& obj, const char* key, const std::string& ptr, bool required = true) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw SchemaError(ptr + "/" + key, std::string("missing required field '") + key + "'");
    return {};
  }
  if (!it->is_array()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must be an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < it->size(); ++i) {
    const auto& v = (*it)[i];
    if (!v.is_string()) throw SchemaError(ptr + "/" + key + "/" + std::to_string(i), "expected a string");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool bool_field(const json& obj, const char* key, const std::string& ptr, bool fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_boolean()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must be a boolean");
  return it->get<bool>();
}

std::vector<fs::path> json_files(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(path)) return {path};
  if (!fs::is_directory(path)) fail(ErrorCode::Io, "no such file or directory: " + path.string());
  for (const auto& e : fs::directory_iterator(path)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Parses each file and hands every object (with its pointer) to fn.
template <typename Fn>
void for_each_record(const fs::path& path, Fn fn) {
  for (const auto& f : json_files(path)) {
    json doc;
    try {
      doc = json::parse(read_file(f));
    } catch (const json::parse_error& e) {
      throw SchemaError("", f.filename().string() + ": invalid JSON (" + e.what() + ")");
    }
    auto name = f.filename().string();
    try {
      if (doc.is_array()) {
        for (std::size_t i = 0; i < doc.size(); ++i) fn(doc[i], "/" + std::to_string(i));
      } else {
        fn(doc, std::string());
      }
    } catch (const SchemaError& e) {
      throw SchemaError(e.pointer(), name + ": " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" at ")));
    }
  }
}

}  // namespace

std::optional<DrpCategory> parse_category(std::string_view s) {
  auto key = squash(s);
  for (auto c : kAllCategories) {
    if (squash(category_name(c)) == key) return c;
  }
  return std::nullopt;
}

std::string_view severity_name(Severity s) {
  switch (s) {
    case Severity::NoHarm: return "NoHarm";
    case Severity::Minor: return "Minor";
    case Severity::Moderate: return "Moderate";
    case Severity::Serious: return "Serious";
  }
  return "";
}

std::optional<Severity> parse_severity(std::string_view s) {
  auto key = squash(s);
  for (auto v : kAllSeverities) {
    if (squash(severity_name(v)) == key) return v;
  }
  return std::nullopt;
}

std::string PrescribedMedication::line() const {
  return name + " | " + dose + " | " + route + " | " + frequency;
}

json to_json(const CaseVignette& c) {
  json meds = json::array();
  for (const auto& m : c.medications) {
    json jm = {{"name", m.name}, {"dose", m.dose}, {"route", m.route}, {"frequency", m.frequency},
               {"status", m.status}};
    if (m.atc_hint) jm["atc_hint"] = *m.atc_hint;
    meds.push_back(std::move(jm));
  }
  return {{"case_id", c.case_id},       {"disciplines", c.disciplines}, {"clinical_note", c.clinical_note},
          {"allergies", c.allergies},   {"medications", std::move(meds)}, {"is_control", c.is_control}};
}

json to_json(const GroundTruthDrp& d) {
  return {{"drp_id", d.drp_id},
          {"case_id", d.case_id},
          {"category", std::string(category_name(d.category))},
          {"severity", std::string(severity_name(d.severity))},
          {"description", d.description},
          {"involved_drugs", d.involved_drugs},
          {"requires_all_drugs", d.requires_all_drugs}};
}

CaseVignette case_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "case must be an object");
  CaseVignette c;
  c.case_id = string_field(j, "case_id", ptr, true, true);
  c.disciplines = string_list(j, "disciplines", ptr);
  c.clinical_note = string_field(j, "clinical_note", ptr);
  c.allergies = string_list(j, "allergies", ptr, false);
  c.is_control = bool_field(j, "is_control", ptr, false);
  const auto& meds = member(j, "medications", ptr);
  if (!meds.is_array()) throw SchemaError(ptr + "/medications", "'medications' must be an array");
  for (std::size_t i = 0; i < meds.size(); ++i) {
    auto mp = ptr + "/medications/" + std::to_string(i);
    const auto& m = meds[i];
    if (!m.is_object()) throw SchemaError(mp, "medication must be an object");
    PrescribedMedication pm;
    pm.name = string_field(m, "name", mp, true, true);
    pm.dose = string_field(m, "dose", mp, false);
    pm.route = string_field(m, "route", mp, false);
    pm.frequency = string_field(m, "frequency", mp, false);
    pm.status = string_field(m, "status", mp, false);
    if (m.contains("atc_hint") && !m["atc_hint"].is_null()) pm.atc_hint = string_field(m, "atc_hint", mp);
    c.medications.push_back(std::move(pm));
  }
  if (c.medications.empty() && !c.is_control) {
    throw SchemaError(ptr + "/medications", "non-control case needs at least one medication");
  }
  return c;
}

GroundTruthDrp drp_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "DRP must be an object");
  GroundTruthDrp d;
  d.drp_id = string_field(j, "drp_id", ptr, true, true);
  d.case_id = string_field(j, "case_id", ptr, true, true);
  auto cat = string_field(j, "category", ptr);
  auto c = parse_category(cat);
  if (!c) throw SchemaError(ptr + "/category", "unknown category '" + cat + "'");
  d.category = *c;
  auto sev = string_field(j, "severity", ptr);
  auto s = parse_severity(sev);
  if (!s) throw SchemaError(ptr + "/severity", "unknown severity '" + sev + "'");
  d.severity = *s;
  d.description = string_field(j, "description", ptr);
  d.involved_drugs = string_list(j, "involved_drugs", ptr);
  if (d.involved_drugs.empty()) throw SchemaError(ptr + "/involved_drugs", "'involved_drugs' must not be empty");
  d.requires_all_drugs = bool_field(j, "requires_all_drugs", ptr, false);
  return d;
}

std::vector<CaseVignette> load_cases(const fs::path& path) {
  std::vector<CaseVignette> cases;
  for_each_record(path, [&](const json& j, const std::string& ptr) { cases.push_back(case_from_json(j, ptr)); });
  std::sort(cases.begin(), cases.end(),
            [](const CaseVignette& a, const CaseVignette& b) { return natural_less(a.case_id, b.case_id); });
  for (std::size_t i = 1; i < cases.size(); ++i) {
    if (cases[i].case_id == cases[i - 1].case_id) fail(ErrorCode::DuplicateId, "case_id '" + cases[i].case_id + "' repeated");
  }
  return cases;
}

void validate_ground_truth(const std::vector<GroundTruthDrp>& drps, const std::vector<CaseVignette>& cases) {
  std::set<std::string> ids;
  for (const auto& d : drps) {
    const auto* c = find_case(cases, d.case_id);
    if (!c) fail(ErrorCode::UnknownCase, "DRP " + d.drp_id + " references unknown case '" + d.case_id + "'");
    if (c->is_control) throw SchemaError("", "control case " + c->case_id + " must not carry DRPs (" + d.drp_id + ")");
    if (!ids.insert(d.drp_id).second) fail(ErrorCode::DuplicateId, "drp_id '" + d.drp_id + "' repeated");
  }
}

std::vector<GroundTruthDrp> load_ground_truth(const fs::path& path, const std::vector<CaseVignette>& cases) {
  std::vector<GroundTruthDrp> drps;
  for_each_record(path, [&](const json& j, const std::string& ptr) { drps.push_back(drp_from_json(j, ptr)); });
  validate_ground_truth(drps, cases);
  std::stable_sort(drps.begin(), drps.end(), [](const GroundTruthDrp& a, const GroundTruthDrp& b) {
    return a.case_id != b.case_id && natural_less(a.case_id, b.case_id);
  });
  return drps;
}

std::vector<std::string> unresolved_drugs(const std::vector<GroundTruthDrp>& drps, const DrugNameIndex& index) {
  std::vector<std::string> out;
  for (const auto& d : drps) {
    for (const auto& n : d.involved_drugs) {
      if (!index.resolve(n)) out.push_back(d.drp_id + ":" + n);
    }
  }
  return out;
}

const CaseVignette* find_case(const std::vector<CaseVignette>& cases, std::string_view case_id) {
  for (const auto& c : cases) {
    if (c.case_id == case_id) return &c;
  }
  return nullptr;
}

std::vector<GroundTruthDrp> drps_for_case(const std::vector<GroundTruthDrp>& drps, std::string_view case_id) {
  std::vector<GroundTruthDrp> out;
  for (const auto& d : drps) {
    if (d.case_id == case_id) out.push_back(d);
  }
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) return {};
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    double h = (static_cast<double>(values.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {at(0.25), at(0.5), at(0.75)};
}

double DatasetStats::severity_percent(Severity s) const {
  if (n_drps == 0) return 0.0;
  auto it = severity_histogram.find(s);
  return 100.0 * static_cast<double>(it == severity_histogram.end() ? 0 : it->second) / static_cast<double>(n_drps);
}

DatasetStats dataset_stats(const std::vector<CaseVignette>& cases, const std::vector<GroundTruthDrp>& drps) {
  if (cases.empty()) fail(ErrorCode::EmptyDataset, "no cases loaded");
  DatasetStats s;
  s.n_cases = cases.size();
  s.n_drps = drps.size();
  for (auto v : kAllSeverities) s.severity_histogram[v] = 0;
  for (auto c : kAllCategories) s.category_histogram[c] = 0;
  for (const auto& d : drps) {
    ++s.severity_histogram[d.severity];
    ++s.category_histogram[d.category];
  }
  std::vector<double> counts;
  for (const auto& c : cases) {
    counts.push_back(static_cast<double>(c.medications.size()));
    if (c.is_control) ++s.n_control;
  }
  s.medications_per_case = quartiles(counts);
  return s;
}

Dataset load_dataset(const fs::path& data_dir) {
  Dataset d;
  d.cases = load_cases(data_dir / "cases");
  d.drps = load_ground_truth(data_dir / "groundtruth", d.cases);
  return d;
}

}  // namespace chartreview
