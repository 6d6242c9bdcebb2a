#include "chartreview/corpus.hpp"

#include <algorithm>
#include <set>

#include "chartreview/error.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

namespace fs = std::filesystem;

std::string_view section_heading(SectionKind kind) {
  switch (kind) {
    case SectionKind::AdverseCautionsContra: return "ADVERSE_CAUTIONS_CONTRA";
    case SectionKind::AtcMechanism: return "ATC_MECHANISM";
    case SectionKind::Interactions: return "INTERACTIONS";
    case SectionKind::DosingAdjustments: return "DOSING_ADJUSTMENTS";
  }
  return "";
}

std::string_view section_name(SectionKind kind) {
  switch (kind) {
    case SectionKind::AdverseCautionsContra: return "AdverseCautionsContra";
    case SectionKind::AtcMechanism: return "AtcMechanism";
    case SectionKind::Interactions: return "Interactions";
    case SectionKind::DosingAdjustments: return "DosingAdjustments";
  }
  return "";
}

std::optional<SectionKind> parse_section_name(std::string_view name) {
  for (auto k : kAllSections) {
    if (name == section_name(k) || name == section_heading(k)) return k;
  }
  return std::nullopt;
}

namespace {

std::string rtrim(std::string_view s) {
  auto e = s.size();
  while (e > 0 && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(0, e));
}

struct FrontMatter {
  std::map<std::string, std::string> fields;
  std::vector<std::string> body_lines;
};

FrontMatter split_front_matter(std::string_view raw, const std::string& source) {
  auto lines = split(normalize_newlines(raw), '\n');
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || rtrim(lines[i]) != "---") {
    fail(ErrorCode::ParseError, source + ": missing front-matter opening '---'");
  }
  FrontMatter fm;
  for (++i; i < lines.size(); ++i) {
    if (rtrim(lines[i]) == "---") break;
    auto line = trim(lines[i]);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos || colon == 0) {
      fail(ErrorCode::ParseError, source + ": malformed front-matter line '" + line + "'");
    }
    auto key = trim(line.substr(0, colon));
    if (fm.fields.count(key)) fail(ErrorCode::ParseError, source + ": repeated front-matter key '" + key + "'");
    fm.fields[key] = trim(line.substr(colon + 1));
  }
  if (i == lines.size()) fail(ErrorCode::ParseError, source + ": unterminated front-matter");
  fm.body_lines.assign(lines.begin() + static_cast<std::ptrdiff_t>(i) + 1, lines.end());
  return fm;
}

std::string require_field(const FrontMatter& fm, const std::string& key, const std::string& source) {
  auto it = fm.fields.find(key);
  if (it == fm.fields.end() || it->second.empty()) {
    fail(ErrorCode::ParseError, source + ": front-matter field '" + key + "' missing or empty");
  }
  return it->second;
}

std::vector<std::string> list_field(const FrontMatter& fm, const std::string& key) {
  auto it = fm.fields.find(key);
  if (it == fm.fields.end()) return {};
  return split_trimmed(it->second, ',');
}

// Joins lines [b, e) after dropping blank lines at both ends.
std::string block_text(const std::vector<std::string>& lines, std::size_t b, std::size_t e) {
  while (b < e && trim(lines[b]).empty()) ++b;
  while (e > b && trim(lines[e - 1]).empty()) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b) out.push_back('\n');
    out.append(lines[i]);
  }
  return out;
}

std::vector<fs::path> sorted_md_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".md") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

}  // namespace

void DrugNameIndex::add(std::string_view alias, const std::string& drug_id) {
  auto key = casefold(alias);
  if (key.empty()) return;
  auto [it, inserted] = map_.emplace(key, drug_id);
  if (!inserted && it->second != drug_id) {
    fail(ErrorCode::DuplicateAlias, "alias '" + key + "' claimed by both " + it->second + " and " + drug_id);
  }
}

std::optional<std::string> DrugNameIndex::resolve(std::string_view name) const {
  auto it = map_.find(casefold(name));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> DrugNameIndex::resolve_mention(std::string_view text) const {
  if (auto hit = resolve(text)) return hit;

  std::string folded = casefold(text);
  for (std::size_t open = folded.find_first_of("[("); open != std::string::npos;
       open = folded.find_first_of("[(", open + 1)) {
    auto close = folded.find_first_of("])", open + 1);
    if (close == std::string::npos) break;
    if (auto hit = resolve(folded.substr(open + 1, close - open - 1))) return hit;
  }

  std::string cleaned = folded;
  for (auto& c : cleaned) {
    if (c == '[' || c == ']' || c == '(' || c == ')' || c == '{' || c == '}' || c == '/' || c == '"') c = ' ';
  }
  std::vector<std::string> words;
  for (auto& w : split_trimmed(cleaned, ' ')) {
    while (!w.empty() && (w.back() == ',' || w.back() == '.' || w.back() == ';' || w.back() == ':')) w.pop_back();
    if (!w.empty()) words.push_back(w);
  }
  for (std::size_t n = words.size(); n >= 1; --n) {
    for (std::size_t i = 0; i + n <= words.size(); ++i) {
      std::vector<std::string> window(words.begin() + static_cast<std::ptrdiff_t>(i),
                                      words.begin() + static_cast<std::ptrdiff_t>(i + n));
      auto it = map_.find(join(window, " "));
      if (it != map_.end()) return it->second;
    }
  }
  return std::nullopt;
}

const Monograph* Corpus::find(std::string_view drug_id) const {
  auto it = by_id_.find(drug_id);
  return it == by_id_.end() ? nullptr : &monographs[it->second];
}

const Guideline* Corpus::find_guideline(std::string_view guideline_id) const {
  auto it = guideline_by_id_.find(guideline_id);
  return it == guideline_by_id_.end() ? nullptr : &guidelines[it->second];
}

Monograph parse_monograph(std::string_view text, const std::string& source) {
  auto fm = split_front_matter(text, source);
  Monograph m;
  m.source = source;
  m.drug_id = require_field(fm, "drug_id", source);
  m.canonical_name = require_field(fm, "canonical_name", source);
  m.atc_codes = list_field(fm, "atc_codes");

  std::set<std::string> seen{casefold(m.canonical_name)};
  for (auto& a : list_field(fm, "aliases")) {
    if (seen.insert(casefold(a)).second) m.aliases.push_back(a);
  }

  const auto& lines = fm.body_lines;
  std::array<std::optional<std::size_t>, 4> at;
  int last = -1;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = rtrim(lines[i]);
    if (line.size() < 3 || line[0] != '#' || line[1] != ' ') continue;
    for (auto k : kAllSections) {
      if (line.substr(2) != section_heading(k)) continue;
      int idx = static_cast<int>(k);
      if (at[idx]) fail(ErrorCode::ParseError, source + ": heading " + line + " repeated");
      if (idx < last) fail(ErrorCode::ParseError, source + ": heading " + line + " out of order");
      at[idx] = i;
      last = idx;
    }
  }
  for (auto k : kAllSections) {
    if (!at[static_cast<int>(k)]) {
      fail(ErrorCode::MissingSection,
           source + ": missing heading '# " + std::string(section_heading(k)) + "'");
    }
  }
  if (!block_text(lines, 0, *at[0]).empty()) {
    fail(ErrorCode::ParseError, source + ": text before the first section heading");
  }
  for (int s = 0; s < 4; ++s) {
    std::size_t b = *at[s] + 1;
    std::size_t e = s + 1 < 4 ? *at[s + 1] : lines.size();
    m.sections[s] = block_text(lines, b, e);
  }
  return m;
}

Guideline parse_guideline(std::string_view text, const std::string& source) {
  auto fm = split_front_matter(text, source);
  Guideline g;
  g.source = source;
  g.guideline_id = require_field(fm, "guideline_id", source);
  auto it = fm.fields.find("title");
  g.title = it == fm.fields.end() ? g.guideline_id : it->second;
  g.tags = list_field(fm, "tags");
  g.body = block_text(fm.body_lines, 0, fm.body_lines.size());
  if (g.body.empty()) fail(ErrorCode::ParseError, source + ": guideline body is empty");
  return g;
}

Corpus build_corpus(std::vector<Monograph> monographs, std::vector<Guideline> guidelines, std::string hash) {
  Corpus c;
  c.monographs = std::move(monographs);
  c.guidelines = std::move(guidelines);
  c.hash = std::move(hash);
  for (std::size_t i = 0; i < c.monographs.size(); ++i) {
    const auto& m = c.monographs[i];
    if (!c.by_id_.emplace(m.drug_id, i).second) {
      fail(ErrorCode::DuplicateId, m.source + ": drug_id '" + m.drug_id + "' already defined");
    }
  }
  for (std::size_t i = 0; i < c.guidelines.size(); ++i) {
    const auto& g = c.guidelines[i];
    if (!c.guideline_by_id_.emplace(g.guideline_id, i).second) {
      fail(ErrorCode::DuplicateId, g.source + ": guideline_id '" + g.guideline_id + "' already defined");
    }
  }
  for (const auto& m : c.monographs) {
    c.index.add(m.canonical_name, m.drug_id);
    c.index.add(m.drug_id, m.drug_id);
    for (const auto& a : m.aliases) c.index.add(a, m.drug_id);
  }
  return c;
}

Corpus load_corpus(const fs::path& root) {
  auto mono_dir = root / "monographs";
  if (!fs::is_directory(mono_dir)) fail(ErrorCode::Io, "no monographs/ directory under " + root.string());

  std::string digest;
  std::vector<Monograph> monographs;
  for (const auto& p : sorted_md_files(mono_dir)) {
    auto text = normalize_newlines(read_file(p));
    auto name = "monographs/" + p.filename().string();
    monographs.push_back(parse_monograph(text, name));
    digest += name + '\0' + text + '\0';
  }
  std::vector<Guideline> guidelines;
  for (const auto& p : sorted_md_files(root / "guidelines")) {
    auto text = normalize_newlines(read_file(p));
    auto name = "guidelines/" + p.filename().string();
    guidelines.push_back(parse_guideline(text, name));
    digest += name + '\0' + text + '\0';
  }
  return build_corpus(std::move(monographs), std::move(guidelines), content_hash(digest));
}

std::optional<std::string> resolve_drug(const DrugNameIndex& index, std::string_view name) {
  return index.resolve(name);
}

const std::string& section_lookup(const Corpus& corpus, std::string_view drug_id, SectionKind kind) {
  const auto* m = corpus.find(drug_id);
  if (!m) fail(ErrorCode::UnknownDrug, "unknown drug_id '" + std::string(drug_id) + "'");
  return m->section(kind);
}

}  // namespace chartreview
