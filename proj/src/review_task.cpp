#include "chartreview/review_task.hpp"

namespace chartreview {

std::string_view task_name(ReviewTask task) {
  switch (task) {
    case ReviewTask::Indication: return "INDICATION";
    case ReviewTask::Dosing: return "DOSING";
    case ReviewTask::Interactions: return "INTERACTIONS";
    case ReviewTask::AdrAllergyContra: return "ADR_ALLERGY_CONTRA";
    case ReviewTask::Omission: return "OMISSION";
    case ReviewTask::Duplication: return "DUPLICATION";
    case ReviewTask::PatientFactors: return "PATIENT_FACTORS";
  }
  return "";
}

std::optional<ReviewTask> parse_task_name(std::string_view name) {
  for (auto t : {ReviewTask::Indication, ReviewTask::Dosing, ReviewTask::Interactions, ReviewTask::AdrAllergyContra,
                 ReviewTask::Omission, ReviewTask::Duplication, ReviewTask::PatientFactors}) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

std::vector<SectionKind> task_sections(ReviewTask task) {
  switch (task) {
    case ReviewTask::Indication: return {SectionKind::AtcMechanism};
    case ReviewTask::Dosing: return {SectionKind::DosingAdjustments};
    case ReviewTask::Interactions: return {SectionKind::Interactions};
    case ReviewTask::AdrAllergyContra: return {SectionKind::AdverseCautionsContra};
    default: return {};
  }
}

bool is_drug_task(ReviewTask task) { return !task_sections(task).empty(); }

std::string_view task_question(ReviewTask task) {
  switch (task) {
    case ReviewTask::Indication:
      return "Is this medication indicated for the patient?";
    case ReviewTask::Dosing:
      return "Is the dose, frequency, route and duration of this medication appropriate for this patient, "
             "considering age, kidney function and liver function?";
    case ReviewTask::Interactions:
      return "Does this medication interact with any other current medication in a way that warrants a change "
             "in therapy or monitoring?";
    case ReviewTask::AdrAllergyContra:
      return "Could this medication cause an adverse drug reaction in this patient, or is it contraindicated, "
             "cautioned or a documented allergy?";
    case ReviewTask::Omission:
      return "Are there conditions in the patient's history that are not being treated but should be, "
             "according to current clinical guidelines?";
    case ReviewTask::Duplication:
      return "Is there any duplication in medication class or therapy?";
    case ReviewTask::PatientFactors:
      return "Which patient-specific factors such as age, allergies, organ function and preferences should "
             "change medication selection or management?";
  }
  return "";
}

}  // namespace chartreview
