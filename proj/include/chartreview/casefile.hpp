#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chartreview/corpus.hpp"

namespace chartreview {

enum class DrpCategory {
  AdverseDrugReaction,
  Allergy,
  DrugDrugInteraction,
  DuplicationOfTherapy,
  InappropriateChoiceOfTherapy,
  InappropriateDosageRegimen,
  NoIndication,
  OmissionOfTherapy,
};

inline constexpr std::array<DrpCategory, 8> kAllCategories = {
    DrpCategory::AdverseDrugReaction,          DrpCategory::Allergy,
    DrpCategory::DrugDrugInteraction,          DrpCategory::DuplicationOfTherapy,
    DrpCategory::InappropriateChoiceOfTherapy, DrpCategory::InappropriateDosageRegimen,
    DrpCategory::NoIndication,                 DrpCategory::OmissionOfTherapy};

enum class Severity { NoHarm = 0, Minor = 1, Moderate = 2, Serious = 3 };

inline constexpr std::array<Severity, 4> kAllSeverities = {Severity::NoHarm, Severity::Minor, Severity::Moderate,
                                                           Severity::Serious};

std::string_view category_name(DrpCategory c);
// Accepts the enum spelling in any case, ignoring spaces, '-' and '_'.
std::optional<DrpCategory> parse_category(std::string_view s);
std::string_view severity_name(Severity s);
std::optional<Severity> parse_severity(std::string_view s);

struct PrescribedMedication {
  std::string name;
  std::string dose;
  std::string route;
  std::string frequency;
  std::string status;
  std::optional<std::string> atc_hint;

  // "name | dose | route | frequency"
  std::string line() const;
};

struct CaseVignette {
  std::string case_id;
  std::vector<std::string> disciplines;
  std::string clinical_note;
  std::vector<std::string> allergies;
  std::vector<PrescribedMedication> medications;
  bool is_control = false;
};

struct GroundTruthDrp {
  std::string drp_id;
  std::string case_id;
  DrpCategory category = DrpCategory::AdverseDrugReaction;
  Severity severity = Severity::NoHarm;
  std::string description;
  std::vector<std::string> involved_drugs;
  bool requires_all_drugs = false;
};

nlohmann::json to_json(const CaseVignette& c);
nlohmann::json to_json(const GroundTruthDrp& d);
CaseVignette case_from_json(const nlohmann::json& j, const std::string& pointer = "");
GroundTruthDrp drp_from_json(const nlohmann::json& j, const std::string& pointer = "");

// A directory of *.json files or a single file; each file holds one case
// object or an array of them. Sorted by case_id.
std::vector<CaseVignette> load_cases(const std::filesystem::path& path);

// Same layout for ground truth. UnknownCase for a dangling case_id.
std::vector<GroundTruthDrp> load_ground_truth(const std::filesystem::path& path,
                                              const std::vector<CaseVignette>& cases);

void validate_ground_truth(const std::vector<GroundTruthDrp>& drps, const std::vector<CaseVignette>& cases);

// Involved drug names that do not resolve against the index.
std::vector<std::string> unresolved_drugs(const std::vector<GroundTruthDrp>& drps, const DrugNameIndex& index);

const CaseVignette* find_case(const std::vector<CaseVignette>& cases, std::string_view case_id);
std::vector<GroundTruthDrp> drps_for_case(const std::vector<GroundTruthDrp>& drps, std::string_view case_id);

struct Quartiles {
  double q1 = 0, median = 0, q3 = 0;
};

// Linear interpolation between closest ranks, h = (n - 1) p.
Quartiles quartiles(std::vector<double> values);

struct DatasetStats {
  std::size_t n_cases = 0;
  std::size_t n_drps = 0;
  std::size_t n_control = 0;
  std::map<Severity, std::size_t> severity_histogram;
  std::map<DrpCategory, std::size_t> category_histogram;
  Quartiles medications_per_case;

  double severity_percent(Severity s) const;
};

DatasetStats dataset_stats(const std::vector<CaseVignette>& cases, const std::vector<GroundTruthDrp>& drps);

struct Dataset {
  std::vector<CaseVignette> cases;
  std::vector<GroundTruthDrp> drps;
};

// data_dir/cases and data_dir/groundtruth.
Dataset load_dataset(const std::filesystem::path& data_dir);

}  // namespace chartreview
