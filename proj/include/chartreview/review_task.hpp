#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "chartreview/corpus.hpp"

namespace chartreview {

enum class ReviewTask { Indication, Dosing, Interactions, AdrAllergyContra, Omission, Duplication, PatientFactors };

inline constexpr std::array<ReviewTask, 4> kDrugTasks = {ReviewTask::Indication, ReviewTask::Dosing,
                                                         ReviewTask::Interactions, ReviewTask::AdrAllergyContra};
inline constexpr std::array<ReviewTask, 3> kCaseTasks = {ReviewTask::Omission, ReviewTask::Duplication,
                                                         ReviewTask::PatientFactors};

std::string_view task_name(ReviewTask task);
std::optional<ReviewTask> parse_task_name(std::string_view name);

// Monograph sections a task may draw on. Empty for case-level tasks.
std::vector<SectionKind> task_sections(ReviewTask task);

bool is_drug_task(ReviewTask task);

std::string_view task_question(ReviewTask task);

}  // namespace chartreview
