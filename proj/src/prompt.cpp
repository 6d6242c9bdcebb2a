#include <cstdio>
#include <regex>

#include "chartreview/error.hpp"
#include "chartreview/pipeline.hpp"
#include "chartreview/text.hpp"

namespace chartreview {

namespace {

const char* kDefaultPreamble =
    "Assume the role of a clinical pharmacist. You are tasked to perform a medication chart review for a patient "
    "admitted to the department of {{specialty}}. I will provide you with the patient's medication list, clinical "
    "note, and drug monographs as reference. Identify drug related problems specific to the patient's profile using "
    "this guide:\n"
    "\n"
    "- Medication Indications: Confirm that each medication has a clear indication and that current health "
    "conditions are being addressed with appropriate pharmacotherapy. [Drug monograph reference sections: "
    "\"Pharmacologic Category\", \"Use: Labeled Indications\", \"Use: Off-Label: Adult\", \"Mechanism of Action\"]\n"
    "- Dosing Verification: Check that the dosages of medications are within the recommended ranges and adjust if "
    "necessary, considering factors such as age, kidney function, and liver function [Drug monograph reference "
    "sections: \"Dosing: Adult\", \"Dosing: Older Adult\", \"Dosing: Altered Kidney Function: Adult\", \"Dosing: "
    "Hepatic Impairment: Adult\"]\n"
    "- Drug-Drug Interactions: Investigate potential interactions between current medications that could increase "
    "the risk of adverse effects or reduce therapeutic efficacy and warrants a change in therapy or monitoring "
    "tests. [Drug monograph reference sections: \"Metabolism/Transport Effects\", \"Drug Interactions\"]\n"
    "- Potential adverse drug reaction, contraindications and cautions, medication allergy [Drug monograph "
    "reference sections: \"Special alerts\", \"ALERT: U.S. Boxed Warning\", \"Warnings/Precautions\", "
    "\"Contraindications\", \"Adverse Reactions\", \"Adverse Reactions (Significant): Considerations\"]\n"
    "- Medication Omissions: Look for any conditions that are not being treated which should be, according to the "
    "patient's history and current clinical guidelines.\n"
    "- Any duplication in medication class or therapy\n"
    "- Patient-Specific Factors: Take into account patient-specific factors such as age, allergies, and "
    "preferences that may influence medication selection and management.\n"
    "\n"
    "Create a pharmacist recommendation note to address any identified drug related problem(s) in the following "
    "format: \"situation, background, assessment, recommendation\". Your plan should be clear and justified with "
    "specific recommendations for any changes to the medication regimen, including discontinuations, dose "
    "adjustments, or additions.";

std::string specialty_of(const CaseVignette& c) {
  if (c.disciplines.empty() || trim(c.disciplines.front()).empty()) {
    fail(ErrorCode::TemplateSlotMissing, "case " + c.case_id + " has no discipline for the specialty slot");
  }
  return casefold(c.disciplines.front());
}

void append_case_body(std::string& out, const CaseVignette& c) {
  out += "Medication list:\n";
  for (std::size_t i = 0; i < c.medications.size(); ++i) {
    out += std::to_string(i + 1) + ". " + c.medications[i].line() + "\n";
  }
  out += "\nAllergies: " + (c.allergies.empty() ? std::string("none recorded") : join(c.allergies, "; ")) + "\n";
  out += "\nClinical note:\n" + c.clinical_note + "\n";
}

std::string format_score(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", s);
  return buf;
}

std::string category_list() {
  std::vector<std::string> names;
  for (auto c : kAllCategories) names.emplace_back(category_name(c));
  return join(names, ", ");
}

}  // namespace

PromptTemplate::PromptTemplate() : text_(kDefaultPreamble) {}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {}

PromptTemplate PromptTemplate::from_file(const std::filesystem::path& path) {
  return PromptTemplate(normalize_newlines(read_file(path)));
}

std::string PromptTemplate::fill(const std::map<std::string, std::string>& slots) const {
  static const std::regex slot_re(R"(\{\{\s*([A-Za-z_]+)\s*\}\})");
  std::string out;
  auto begin = std::sregex_iterator(text_.begin(), text_.end(), slot_re);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    auto key = m[1].str();
    auto v = slots.find(key);
    if (v == slots.end() || v->second.empty()) {
      fail(ErrorCode::TemplateSlotMissing, "no value for template slot '" + key + "'");
    }
    out.append(text_, last, static_cast<std::size_t>(m.position(0)) - last);
    out += v->second;
    last = static_cast<std::size_t>(m.position(0) + m.length(0));
  }
  out.append(text_, last, std::string::npos);
  return out;
}

std::string render_task_prompt(const CaseVignette& c, std::optional<std::size_t> med_index, ReviewTask task,
                               const ContextBundle& context, const PromptTemplate& tmpl) {
  auto preamble = tmpl.fill({{"specialty", specialty_of(c)}});
  std::string out;
  out += "Case reference: " + c.case_id + "\n";
  out += "Review task: " + std::string(task_name(task)) + "\n";
  if (is_drug_task(task)) {
    if (!med_index || *med_index >= c.medications.size()) {
      fail(ErrorCode::InvalidArgument, "drug task needs a valid medication index");
    }
    out += "Medication under review: " + std::to_string(*med_index + 1) + ". " + c.medications[*med_index].line() +
           "\n";
  }
  out += "\n" + preamble + "\n\n";
  append_case_body(out, c);
  out += "\nReference context:\n";
  if (context.items.empty()) {
    out += "No reference context retrieved.\n";
  } else {
    for (const auto& item : context.items) {
      out += "[" + item.chunk_id + "] score=" + format_score(item.score) + "\n" + item.text + "\n\n";
    }
  }
  out += "\nQuestion: " + std::string(task_question(task)) + "\n";
  if (is_drug_task(task)) {
    out += "Answer for the medication under review only. Name the medication, the problem, its category and the "
           "recommended action, citing reference chunk ids in square brackets.\n";
  } else {
    out += "Answer for the whole medication list. Name each medication or missing therapy, the problem, its "
           "category and the recommended action.\n";
  }
  return out;
}

std::string render_summary_prompt(const CaseVignette& c, const std::vector<TaskOutput>& outputs,
                                  const PromptTemplate& tmpl) {
  auto preamble = tmpl.fill({{"specialty", specialty_of(c)}});
  std::string out;
  out += "Case reference: " + c.case_id + "\n";
  out += "Review task: FINAL_SUMMARY\n";
  out += "\n" + preamble + "\n\n";
  append_case_body(out, c);
  out += "\nTask findings:\n";
  for (const auto& o : outputs) {
    out += "--- ";
    out += o.med_index ? std::to_string(*o.med_index + 1) + ". " + o.drug_name : std::string("case");
    out += " | " + std::string(task_name(o.task)) + "\n" + o.response + "\n";
  }
  out += "\nOutput format: write the note under the headings SITUATION, BACKGROUND, ASSESSMENT and "
         "RECOMMENDATION. Then list every drug related problem in a fenced block tagged drp, one line per problem:\n"
         "```drp\n"
         "DRP | drugs=<drug>;<drug> | category=<category> | action=<recommended action> | rationale=<reason> | "
         "evidence=<chunk id>;<chunk id>\n"
         "```\n"
         "Allowed categories: " +
         category_list() + ". Leave the block empty when there is no problem.\n";
  return out;
}

}  // namespace chartreview
