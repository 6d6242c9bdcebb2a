#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace chartreview {

enum class SectionKind { AdverseCautionsContra = 0, AtcMechanism = 1, Interactions = 2, DosingAdjustments = 3 };

inline constexpr std::array<SectionKind, 4> kAllSections = {
    SectionKind::AdverseCautionsContra, SectionKind::AtcMechanism, SectionKind::Interactions,
    SectionKind::DosingAdjustments};

// Heading text in monograph files, e.g. "ADVERSE_CAUTIONS_CONTRA".
std::string_view section_heading(SectionKind kind);
// Enum spelling, e.g. "AdverseCautionsContra".
std::string_view section_name(SectionKind kind);
std::optional<SectionKind> parse_section_name(std::string_view name);

struct Monograph {
  std::string drug_id;
  std::string canonical_name;
  std::vector<std::string> aliases;
  std::vector<std::string> atc_codes;
  std::array<std::string, 4> sections;
  std::string source;

  const std::string& section(SectionKind kind) const { return sections[static_cast<int>(kind)]; }
};

struct Guideline {
  std::string guideline_id;
  std::string title;
  std::string body;
  std::vector<std::string> tags;
  std::string source;
};

class DrugNameIndex {
 public:
  // Throws DuplicateAlias when the folded alias already maps to another drug.
  void add(std::string_view alias, const std::string& drug_id);

  // Exact lookup after casefold.
  std::optional<std::string> resolve(std::string_view name) const;

  // Lenient lookup for free-text medication strings such as
  // "LANTUS [Insulin Glargine] Solostar": exact, then bracketed text,
  // then the longest run of words that is a known name.
  std::optional<std::string> resolve_mention(std::string_view text) const;

  std::size_t size() const { return map_.size(); }
  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

struct Corpus {
  std::vector<Monograph> monographs;
  std::vector<Guideline> guidelines;
  DrugNameIndex index;
  std::string hash;

  const Monograph* find(std::string_view drug_id) const;
  const Guideline* find_guideline(std::string_view guideline_id) const;

 private:
  friend Corpus build_corpus(std::vector<Monograph>, std::vector<Guideline>, std::string);
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::size_t, std::less<>> guideline_by_id_;
};

Monograph parse_monograph(std::string_view text, const std::string& source);
Guideline parse_guideline(std::string_view text, const std::string& source);

Corpus build_corpus(std::vector<Monograph> monographs, std::vector<Guideline> guidelines, std::string hash);

// Loads root/monographs/*.md and root/guidelines/*.md in filename order.
Corpus load_corpus(const std::filesystem::path& root);

std::optional<std::string> resolve_drug(const DrugNameIndex& index, std::string_view name);

const std::string& section_lookup(const Corpus& corpus, std::string_view drug_id, SectionKind kind);

}  // namespace chartreview
