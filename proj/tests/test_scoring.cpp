#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "chartreview/error.hpp"
#include "chartreview/scoring.hpp"
#include "support.hpp"

using namespace chartreview;

namespace {

struct Fixture {
  Corpus corpus = load_corpus(testsupport::data_dir() / "corpus");
  Dataset dataset = load_dataset(testsupport::data_dir());
  const CaseVignette& get(const std::string& id) const { return *find_case(dataset.cases, id); }
  MatchReport match(const std::string& id, const std::vector<DrpFinding>& f, const MatchOptions& o = {}) const {
    return match_findings(f, get(id), dataset.drps, corpus.index, o);
  }
};

const Fixture& fx() {
  static Fixture f;
  return f;
}

DrpFinding finding(std::vector<std::string> drugs, DrpCategory cat, std::string action) {
  DrpFinding f;
  f.drug_names = std::move(drugs);
  f.category = cat;
  f.action_text = std::move(action);
  return f;
}

MetricSet metrics_with_accuracy(double acc) {
  MetricSet m;
  m.accuracy = acc;
  m.recall = acc / 100.0;
  return m;
}

ModeEvaluation mode_with(const std::string& label, double acc) {
  ModeEvaluation m;
  m.label = label;
  m.summary.accuracy.mean = acc;
  return m;
}

}  // namespace

TEST(Metrics, WorkedExample) {
  auto m = compute_metrics({3, 1, 2});
  EXPECT_DOUBLE_EQ(m.precision, 0.75);
  EXPECT_DOUBLE_EQ(m.recall, 0.6);
  EXPECT_NEAR(m.f1, 2 * 0.75 * 0.6 / 1.35, 1e-12);
  EXPECT_DOUBLE_EQ(m.accuracy, 60.0);
}

TEST(Metrics, UndefinedRatiosAreZero) {
  auto m = compute_metrics({0, 0, 4});
  EXPECT_TRUE(m.precision_undefined);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_TRUE(m.f1_undefined);
  auto fp_only = compute_metrics({0, 2, 0});
  EXPECT_TRUE(fp_only.recall_undefined);
  EXPECT_EQ(fp_only.accuracy, 0.0);
}

TEST(Metrics, EmptyEvaluation) {
  try {
    compute_metrics({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyEvaluation);
  }
}

TEST(Metrics, PublishedF1) { EXPECT_NEAR(f1_score(0.407, 0.355), 0.379, 0.0005); }

TEST(Lexicon, Inflections) {
  const auto& lex = default_action_lexicon();
  for (const char* s : {"Stop aspirin", "stopped it", "reducing dose", "holds", "switched", "adjusting", "added",
                        "initiating", "Discontinued."}) {
    EXPECT_TRUE(has_action_verb(s, lex)) << s;
  }
  for (const char* s : {"aspirin noted", "", "holder", "stopgap"}) EXPECT_FALSE(has_action_verb(s, lex)) << s;
}

TEST(Matching, EnoxaparinDoseIsTruePositive) {
  auto r = fx().match("1", {finding({"Enoxaparin Sodium Injection"}, DrpCategory::InappropriateDosageRegimen,
                                    "reduce enoxaparin to 1 mg/kg")});
  EXPECT_EQ(r.counts, (ConfusionCounts{1, 0, 3}));
  auto it = std::find_if(r.drps.begin(), r.drps.end(), [](const DrpMatch& d) { return d.drp_id == "C1-2"; });
  ASSERT_NE(it, r.drps.end());
  EXPECT_EQ(it->finding_id, "f0");
}

TEST(Matching, NoActionVerbIsNotAMatch) {
  auto r = fx().match("1", {finding({"enoxaparin"}, DrpCategory::InappropriateDosageRegimen, "dose is high")});
  EXPECT_EQ(r.counts, (ConfusionCounts{0, 1, 4}));
}

TEST(Matching, ClassOnlyMentionIsFalseNegative) {
  auto r = fx().match("1", {finding({"statin"}, DrpCategory::OmissionOfTherapy, "start a statin"),
                            finding({"anticoagulant"}, DrpCategory::InappropriateDosageRegimen, "reduce dose")});
  EXPECT_EQ(r.counts.tp, 0u);
  EXPECT_EQ(r.counts.fn, 4u);
  EXPECT_EQ(r.counts.fp, 0u);  // names no prescribed drug
  EXPECT_FALSE(r.findings[0].anchored);
}

TEST(Matching, NamedOmissionAgent) {
  auto r = fx().match("1", {finding({"Atorvastatin"}, DrpCategory::OmissionOfTherapy, "start atorvastatin 80 mg")});
  EXPECT_EQ(r.counts.tp, 1u);
  EXPECT_EQ(r.counts.fp, 0u);
}

TEST(Matching, EmptyFindingsAreAllFalseNegatives) {
  auto r = fx().match("1", {});
  EXPECT_EQ(r.counts, (ConfusionCounts{0, 0, 4}));
}

TEST(Matching, AdrAndAllergyAgree) {
  auto r = fx().match("1", {finding({"Aspirin"}, DrpCategory::AdverseDrugReaction, "stop aspirin")});
  EXPECT_EQ(r.counts.tp, 1u);
}

TEST(Matching, WrongCategoryStrictVersusLoose) {
  std::vector<DrpFinding> f = {finding({"Enoxaparin"}, DrpCategory::DrugDrugInteraction, "reduce enoxaparin")};
  EXPECT_EQ(fx().match("1", f).counts.tp, 0u);
  MatchOptions loose;
  loose.mode = MatchMode::Loose;
  EXPECT_EQ(fx().match("1", f, loose).counts.tp, 1u);
}

TEST(Matching, OneFindingMatchesOneDrp) {
  // C1-4 lists perindopril and bisoprolol; one finding naming both covers one DRP only.
  auto r = fx().match("1", {finding({"Perindopril", "Bisoprolol"}, DrpCategory::AdverseDrugReaction, "hold both"),
                            finding({"Perindopril"}, DrpCategory::AdverseDrugReaction, "hold perindopril")});
  EXPECT_EQ(r.counts.tp, 1u);
  EXPECT_EQ(r.counts.fp, 1u);
}

TEST(Matching, ControlCaseFindingsAreFalsePositives) {
  auto r = fx().match("4", {finding({"unknownium"}, DrpCategory::NoIndication, "stop it")});
  EXPECT_EQ(r.counts, (ConfusionCounts{0, 1, 0}));
}

TEST(Matching, PermutationInvariant) {
  std::vector<DrpFinding> f = {
      finding({"Aspirin"}, DrpCategory::Allergy, "stop aspirin"),
      finding({"Aspirin"}, DrpCategory::AdverseDrugReaction, "discontinue aspirin"),
      finding({"Enoxaparin"}, DrpCategory::InappropriateDosageRegimen, "reduce"),
      finding({"Simvastatin"}, DrpCategory::OmissionOfTherapy, "start simvastatin"),
      finding({"Bisoprolol"}, DrpCategory::AdverseDrugReaction, "hold bisoprolol"),
      finding({"Clopidogrel"}, DrpCategory::NoIndication, "review"),
  };
  auto base = fx().match("1", f).counts;
  std::mt19937 rng(5);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(f.begin(), f.end(), rng);
    EXPECT_EQ(fx().match("1", f).counts, base);
  }
}

TEST(Adjudication, FalseNegativeToTruePositive) {
  auto r = fx().match("1", {finding({"Lantus"}, DrpCategory::InappropriateDosageRegimen, "reduce insulin")});
  EXPECT_EQ(r.counts, (ConfusionCounts{0, 1, 4}));
  AdjudicationOverride o{"f0", "C1-2", true, "pharmacist-a", "same problem"};
  auto a = apply_adjudication(r, {o});
  EXPECT_EQ(a.counts, (ConfusionCounts{1, 0, 3}));
  auto twice = apply_adjudication(a, {o});
  EXPECT_EQ(twice.counts, a.counts);
  EXPECT_EQ(twice.overrides.size(), 1u);
  auto undo = apply_adjudication(a, {{"f0", "C1-2", false, "pharmacist-b", ""}});
  EXPECT_EQ(undo.counts, r.counts);
}

TEST(Adjudication, UnknownIds) {
  auto r = fx().match("1", {});
  for (auto o : {AdjudicationOverride{"f9", "C1-1", true, "x", ""}, AdjudicationOverride{"f0", "C9-9", true, "x", ""}}) {
    try {
      apply_adjudication(r, {o});
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnknownId);
    }
  }
}

TEST(Adjudication, AuthorRequired) {
  EXPECT_THROW(override_from_json({{"finding_id", "f0"}, {"drp_id", "C1-1"}}), SchemaError);
  auto o = override_from_json({{"finding_id", "f0"}, {"drp_id", "C1-1"}, {"author", "a"}, {"match", false}});
  EXPECT_FALSE(o.match);
}

TEST(Aggregate, MeanAndSampleSd) {
  auto s = aggregate_triplicate({metrics_with_accuracy(1), metrics_with_accuracy(2), metrics_with_accuracy(3)});
  EXPECT_DOUBLE_EQ(s.accuracy.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.accuracy.sd, 1.0);
  try {
    aggregate_triplicate({metrics_with_accuracy(1), metrics_with_accuracy(2)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongArity);
  }
}

TEST(Stratify, ByCategoryAndSeverity) {
  MatchReport r;
  r.drps = {{"a", DrpCategory::Allergy, Severity::Serious, "f0"},
            {"b", DrpCategory::Allergy, Severity::Minor, std::nullopt},
            {"c", DrpCategory::NoIndication, Severity::Serious, "f1"}};
  auto cat = stratify({r}, StratifyBy::Category);
  ASSERT_EQ(cat.size(), 2u);
  EXPECT_EQ(cat[0].name, "Allergy");
  EXPECT_DOUBLE_EQ(cat[0].accuracy, 50.0);
  EXPECT_EQ(cat[1].name, "NoIndication");
  EXPECT_DOUBLE_EQ(cat[1].accuracy, 100.0);
  auto sev = stratify({r, r}, StratifyBy::Severity);
  ASSERT_EQ(sev.size(), 2u);
  EXPECT_EQ(sev[0].name, "Minor");
  EXPECT_EQ(sev[1].total, 4u);
  EXPECT_TRUE(stratify({}, StratifyBy::Category).empty());
}

TEST(Compare, SortedByAccuracyThenLabel) {
  auto out = compare_modes({mode_with("v1", 35.5), mode_with("v2", 42.6), mode_with("a", 35.5)});
  EXPECT_EQ(out[0].label, "v2");
  EXPECT_EQ(out[1].label, "a");
  EXPECT_EQ(out[2].label, "v1");
  EXPECT_THROW(compare_modes({mode_with("v1", 1)}), Error);
}

TEST(Evaluate, PoolsCasesPerReplicate) {
  std::vector<RunScore> scores;
  for (int rep = 1; rep <= 3; ++rep) {
    for (const char* id : {"1", "4"}) {
      RunScore s;
      s.replicate = rep;
      s.case_id = id;
      std::vector<DrpFinding> f;
      if (rep == 1 && std::string(id) == "1") f.push_back(finding({"Aspirin"}, DrpCategory::Allergy, "stop"));
      s.report = fx().match(id, f);
      scores.push_back(s);
    }
  }
  auto ev = evaluate("v1", "RagLlmAutonomous", scores);
  ASSERT_EQ(ev.per_run.size(), 3u);
  EXPECT_DOUBLE_EQ(ev.per_run[0].accuracy, 25.0);
  EXPECT_DOUBLE_EQ(ev.per_run[1].accuracy, 0.0);
  EXPECT_NEAR(ev.summary.accuracy.mean, 25.0 / 3, 1e-12);
  EXPECT_EQ(ev.by_category.size(), 4u);
  EXPECT_THROW(evaluate("v1", "x", {}), Error);
}

TEST(Modes, ShortNames) {
  EXPECT_EQ(parse_mode_label("llm"), ModeLabel::LlmOnly);
  EXPECT_EQ(parse_mode_label("Co-Pilot"), ModeLabel::CoPilot);
  EXPECT_EQ(parse_mode_label("human_only"), ModeLabel::HumanOnly);
  EXPECT_EQ(parse_mode_label("robot"), std::nullopt);
  EXPECT_EQ(parse_match_mode("loose"), MatchMode::Loose);
}
