#include <cctype>

#include "chartreview/error.hpp"
#include "chartreview/pipeline.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

using nlohmann::json;

namespace {

// Returns the SBAR heading a line opens, and the text after it.
std::optional<std::pair<int, std::string>> sbar_heading(const std::string& raw) {
  static const char* names[] = {"situation", "background", "assessment", "recommendation"};
  std::size_t i = 0;
  while (i < raw.size() && (raw[i] == '#' || raw[i] == '*' || raw[i] == ' ' || raw[i] == '\t')) ++i;
  std::size_t j = i;
  while (j < raw.size() && std::isalpha(static_cast<unsigned char>(raw[j]))) ++j;
  auto word = ascii_lower(raw.substr(i, j - i));
  for (int k = 0; k < 4; ++k) {
    if (word != names[k]) continue;
    std::size_t rest = j;
    while (rest < raw.size() && (raw[rest] == '*' || raw[rest] == ' ' || raw[rest] == '\t')) ++rest;
    if (rest < raw.size() && raw[rest] == ':') return std::make_pair(k, trim(raw.substr(rest + 1)));
    if (rest == raw.size()) return std::make_pair(k, std::string());
    return std::nullopt;
  }
  return std::nullopt;
}

bool opens_block(const std::string& line) {
  auto t = ascii_lower(trim(line));
  return t.rfind("```drp", 0) == 0;
}

}  // namespace

json to_json(const DrpFinding& f) {
  return {{"drug_names", f.drug_names},
          {"category", std::string(category_name(f.category))},
          {"action_text", f.action_text},
          {"rationale", f.rationale},
          {"evidence_chunk_ids", f.evidence_chunk_ids}};
}

json to_json(const SbarNote& n) {
  return {{"situation", n.situation},
          {"background", n.background},
          {"assessment", n.assessment},
          {"recommendation", n.recommendation}};
}

DrpFinding finding_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "finding must be an object");
  DrpFinding f;
  auto names = j.find("drug_names");
  if (names != j.end()) {
    if (!names->is_array()) throw SchemaError(ptr + "/drug_names", "'drug_names' must be an array");
    for (std::size_t i = 0; i < names->size(); ++i) {
      if (!(*names)[i].is_string()) throw SchemaError(ptr + "/drug_names/" + std::to_string(i), "expected a string");
      auto s = trim((*names)[i].get<std::string>());
      if (!s.empty()) f.drug_names.push_back(s);
    }
  }
  auto cat = j.find("category");
  if (cat == j.end() || !cat->is_string()) throw SchemaError(ptr + "/category", "'category' must be a string");
  auto parsed = parse_category(cat->get<std::string>());
  if (!parsed) throw SchemaError(ptr + "/category", "unknown category '" + cat->get<std::string>() + "'");
  f.category = *parsed;
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return "";
    if (!it->is_string()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };
  f.action_text = str("action_text");
  f.rationale = str("rationale");
  if (j.contains("evidence_chunk_ids")) {
    const auto& ev = j["evidence_chunk_ids"];
    if (!ev.is_array()) throw SchemaError(ptr + "/evidence_chunk_ids", "'evidence_chunk_ids' must be an array");
    for (const auto& e : ev) {
      if (e.is_string()) f.evidence_chunk_ids.push_back(e.get<std::string>());
    }
  }
  if (f.drug_names.empty() && f.category != DrpCategory::OmissionOfTherapy) {
    throw SchemaError(ptr + "/drug_names", "a finding must name at least one drug unless it is an omission");
  }
  return f;
}

SbarNote note_from_json(const json& j, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "note must be an object");
  SbarNote n;
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(ptr + "/" + key, std::string("missing required field '") + key + "'");
    if (!it->is_string()) throw SchemaError(ptr + "/" + key, std::string("'") + key + "' must be a string");
    return it->get<std::string>();
  };
  n.situation = str("situation");
  n.background = str("background");
  n.assessment = str("assessment");
  n.recommendation = str("recommendation");
  return n;
}

ParsedResponse parse_findings(const std::string& response) {
  auto lines = split(normalize_newlines(response), '\n');
  std::size_t open = lines.size();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (opens_block(lines[i])) {
      open = i;
      break;
    }
  }
  if (open == lines.size()) fail(ErrorCode::ParseFailure, "response has no ```drp findings block");

  ParsedResponse out;
  std::string* sections[] = {&out.note.situation, &out.note.background, &out.note.assessment,
                             &out.note.recommendation};
  int current = -1;
  for (std::size_t i = 0; i < open; ++i) {
    if (auto h = sbar_heading(lines[i])) {
      current = h->first;
      if (!h->second.empty()) *sections[current] = h->second;
      continue;
    }
    if (current < 0) continue;
    auto& s = *sections[current];
    if (!s.empty() || !trim(lines[i]).empty()) {
      if (!s.empty()) s += "\n";
      s += lines[i];
    }
  }
  for (auto* s : sections) *s = trim(*s);

  std::size_t close = lines.size();
  for (std::size_t i = open + 1; i < lines.size(); ++i) {
    if (trim(lines[i]) == "```") {
      close = i;
      break;
    }
  }
  if (close == lines.size()) out.warnings.push_back("findings block is not closed; read to end of response");

  for (std::size_t i = open + 1; i < close; ++i) {
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    auto fields = split(line, '|');
    if (ascii_lower(trim(fields[0])) != "drp") {
      out.warnings.push_back("line " + std::to_string(i + 1) + ": not a DRP record, skipped");
      continue;
    }
    std::map<std::string, std::string> kv;
    for (std::size_t f = 1; f < fields.size(); ++f) {
      auto eq = fields[f].find('=');
      if (eq == std::string::npos) continue;
      kv[ascii_lower(trim(fields[f].substr(0, eq)))] = trim(fields[f].substr(eq + 1));
    }
    auto cat = parse_category(kv["category"]);
    if (!cat) {
      out.warnings.push_back("line " + std::to_string(i + 1) + ": unknown category '" + kv["category"] +
                             "', entry dropped");
      continue;
    }
    DrpFinding finding;
    finding.drug_names = split_trimmed(kv["drugs"], ';');
    finding.category = *cat;
    finding.action_text = kv["action"];
    finding.rationale = kv["rationale"];
    finding.evidence_chunk_ids = split_trimmed(kv["evidence"], ';');
    if (finding.drug_names.empty() && finding.category != DrpCategory::OmissionOfTherapy) {
      out.warnings.push_back("line " + std::to_string(i + 1) + ": no drug named, entry dropped");
      continue;
    }
    out.findings.push_back(std::move(finding));
  }
  return out;
}

}  // namespace chartreview
