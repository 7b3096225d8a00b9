#pragma once

#include <string>
#include <vector>

#include "forge/evaluate.hpp"
#include "forge/evidence.hpp"
#include "forge/score.hpp"

namespace fixtures {

using forge::EntityLink;
using forge::EvidenceRecord;
using forge::SemanticType;

inline EntityLink entity(const std::string& id, SemanticType type = SemanticType::Other) {
  EntityLink l;
  l.raw_name = id;
  l.semantic_type = type;
  l.concept_id = id;
  l.canonical_name = id;
  l.source_db = "FIX";
  l.link_score = 1.0;
  l.method = forge::LinkMethod::Exact;
  return l;
}

inline EvidenceRecord make(const std::string& id, const std::string& doc, const std::string& text, double composite,
                           const std::vector<std::string>& entities, const std::string& created = "2024-01-01T00:00:00Z") {
  EvidenceRecord r;
  r.evidence_id = id;
  r.disease = "HCC";
  r.doc_id = doc;
  r.evidence.source_text = text;
  r.evidence.extraction_confidence = 0.8;
  r.score.composite = composite;
  r.score.grade = forge::grade_for(composite);
  for (const auto& e : entities) {
    r.core_entities.push_back(entity(e));
    r.linked_entities.push_back(e);
  }
  r.created_at = created;
  r.updated_at = created;
  return r;
}

// ---- fusion ----------------------------------------------------------------

struct FusionExpectation {
  std::size_t survivors = 16;
  std::size_t merges = 4;
  // canonical id -> absorbed ids (transitive)
  std::vector<std::pair<std::string, std::vector<std::string>>> merged = {
      {"FX-03", {"FX-01", "FX-02"}}, {"FX-04", {"FX-05"}}, {"FX-07", {"FX-06"}}};
  std::vector<std::string> untouched_pair = {"FX-08", "FX-09"};
};

/// Twenty records: a three-record chain (fingerprint then semantic), a
/// quality-ordered pair, a tie broken by created_at, an identical-text pair
/// with disjoint entities, and eleven singletons.
inline std::vector<EvidenceRecord> fusion_records() {
  const std::string sor = "Sorafenib prolonged overall survival in patients with advanced HCC (p < 0.001).";
  const std::string yap = "YAP1 knockdown inhibited proliferation of Huh7 cells in vitro.";
  const std::string afp = "Serum AFP above 400 ng/mL predicted early recurrence after resection.";
  const std::string wnt = "Wnt pathway activation increased stemness markers in organoids.";
  std::vector<EvidenceRecord> out{
      make("FX-01", "docA", sor, 0.50, {"DB:sorafenib", "PHEN:OS"}),
      make("FX-02", "docA", "  sorafenib PROLONGED overall survival in patients with advanced HCC  (p < 0.001).", 0.60,
           {"DB:sorafenib", "PHEN:OS"}),
      make("FX-03", "docB", sor, 0.70, {"DB:sorafenib", "PHEN:OS"}),
      make("FX-04", "docC", yap, 0.80, {"HGNC:YAP1", "PHEN:PROLIF"}),
      make("FX-05", "docD", yap, 0.40, {"HGNC:YAP1", "PHEN:PROLIF"}),
      make("FX-06", "docE", afp, 0.55, {"HGNC:AFP", "PHEN:RECUR"}, "2024-02-01T00:00:00Z"),
      make("FX-07", "docF", afp, 0.55, {"HGNC:AFP", "PHEN:RECUR"}, "2024-01-01T00:00:00Z"),
      make("FX-08", "docG", wnt, 0.65, {"PATH:WNT"}),
      make("FX-09", "docH", wnt, 0.45, {"PHEN:STEM"}),
  };
  const char* singles[] = {
      "Regorafenib attenuated angiogenesis through VEGFR2 signaling.",
      "Lenvatinib combined with PD-1 blockade improved objective response rate.",
      "CTNNB1 silencing reduced xenograft tumor volume by half.",
      "Hepatitis B viral load correlated with tumor multiplicity.",
      "Metformin use was associated with lower HCC incidence in diabetics.",
      "GPC3 immunostaining distinguished HCC from dysplastic nodules.",
      "TERT promoter mutations were frequent in cirrhotic livers.",
      "Atezolizumab plus bevacizumab extended progression-free survival.",
      "Hypoxia induced HIF1A accumulation and glycolytic gene expression.",
      "Transarterial chemoembolization response predicted transplant eligibility.",
      "MicroRNA-122 loss promoted hepatocyte dedifferentiation.",
  };
  int i = 10;
  for (const char* s : singles) {
    auto id = "FX-" + std::to_string(i);
    out.push_back(make(id, "doc" + std::to_string(i), s, 0.3 + 0.04 * (i - 10), {"U:" + std::to_string(i)}));
    ++i;
  }
  return out;
}

// ---- relations -------------------------------------------------------------

struct RelationCase {
  std::string name;
  EvidenceRecord a;
  EvidenceRecord b;
  double similarity;
  forge::RelationType expected;
  std::string expected_source;
};

inline EvidenceRecord rel(const std::string& id, const std::string& doc, int year, const std::string& intervention,
                          const std::string& phenotype, forge::StudyDesign design,
                          const std::vector<std::string>& entities) {
  auto r = make(id, doc, intervention + " " + phenotype, 0.6, entities);
  r.source.year = year;
  r.evidence.intervention = intervention;
  r.evidence.phenotype = phenotype;
  r.evidence.study_design = design;
  return r;
}

inline std::vector<RelationCase> relation_cases() {
  using forge::RelationType;
  using forge::StudyDesign;
  std::vector<RelationCase> cases;

  cases.push_back({"opposite polarity",
                   rel("R-01", "d1", 2019, "sorafenib", "increased overall survival", StudyDesign::Cohort, {"DRUG", "OS"}),
                   rel("R-02", "d2", 2021, "sorafenib", "reduced overall survival", StudyDesign::Cohort, {"DRUG", "OS"}),
                   0.8, RelationType::Contradicts, "R-02"});

  cases.push_back({"negated marker flips polarity",
                   rel("R-03", "d1", 2018, "YAP1 knockdown", "inhibited proliferation", StudyDesign::InVitro, {"YAP1"}),
                   rel("R-04", "d2", 2020, "YAP1 knockdown", "no inhibition of proliferation", StudyDesign::InVitro, {"YAP1"}),
                   0.7, RelationType::Contradicts, "R-04"});

  cases.push_back({"matched design replicates",
                   rel("R-05", "d1", 2018, "YAP1 expression", "increased recurrence risk", StudyDesign::Cohort, {"YAP1", "RECUR"}),
                   rel("R-06", "d2", 2021, "YAP1 expression", "increased recurrence risk", StudyDesign::Cohort, {"YAP1", "RECUR"}),
                   0.95, RelationType::Replicates, "R-06"});

  cases.push_back({"same year falls back to id order",
                   rel("R-08", "d1", 2020, "AFP", "elevated recurrence", StudyDesign::Cohort, {"AFP"}),
                   rel("R-07", "d2", 2020, "AFP", "elevated recurrence", StudyDesign::Cohort, {"AFP"}),
                   0.9, RelationType::Replicates, "R-08"});

  {
    auto a = rel("R-09", "d1", 2019, "sorafenib", "reduced tumor growth", StudyDesign::InVivo, {"DRUG", "GROWTH"});
    auto b = rel("R-10", "d2", 2022, "sorafenib", "reduced tumor growth", StudyDesign::InVitro, {"DRUG", "GROWTH"});
    b.evidence.comparison = "vehicle control";
    cases.push_back({"added comparison refines", a, b, 0.8, RelationType::Refines, "R-10"});
    auto c = a;
    c.evidence_id = "R-11";
    auto d = b;
    d.evidence_id = "R-12";
    cases.push_back({"low similarity does not refine", c, d, 0.6, RelationType::Supports, "R-12"});
  }

  cases.push_back({"outcome drives the next finding",
                   rel("R-13", "d1", 2018, "YAP1 overexpression", "increased AFP secretion", StudyDesign::InVitro, {"YAP1", "AFP"}),
                   rel("R-14", "d2", 2021, "AFP", "promoted tumor recurrence", StudyDesign::Cohort, {"AFP", "RECUR"}),
                   0.6, RelationType::CausalChain, "R-14"});

  cases.push_back({"new entity extends",
                   rel("R-15", "d1", 2019, "regorafenib", "attenuated angiogenesis", StudyDesign::InVivo, {"REGO"}),
                   rel("R-16", "d2", 2023, "regorafenib", "reduced migration", StudyDesign::InVitro, {"REGO", "VEGFR2"}),
                   0.6, RelationType::Extends, "R-16"});

  {
    auto a = rel("R-17", "d1", 2017, "CTNNB1 silencing", "reduced stemness", StudyDesign::InVitro, {"CTNNB1", "WNT"});
    auto b = rel("R-18", "d2", 2020, "LGK974", "reduced organoid formation", StudyDesign::InVitro, {"WNT", "PORCN"});
    a.evidence.bio_mechanism = "Wnt beta-catenin signaling";
    b.evidence.bio_mechanism = "Wnt beta-catenin signaling";
    cases.push_back({"shared mechanism extends", a, b, 0.6, RelationType::Extends, "R-18"});
  }

  cases.push_back({"agreeing direction supports",
                   rel("R-19", "d1", 2018, "sorafenib", "reduced tumor growth", StudyDesign::InVivo, {"GROWTH"}),
                   rel("R-20", "d2", 2022, "lenvatinib", "reduced tumor growth", StudyDesign::InVivo, {"GROWTH"}),
                   0.7, RelationType::Supports, "R-20"});

  cases.push_back({"no direction markers supports",
                   rel("R-21", "d1", 2018, "hepatitis B", "tumor multiplicity", StudyDesign::Cohort, {"HBV"}),
                   rel("R-22", "d2", 2019, "viral load", "tumor multiplicity", StudyDesign::CaseControl, {"HBV"}),
                   0.6, RelationType::Supports, "R-22"});

  cases.push_back({"argument order does not change direction",
                   rel("R-24", "d2", 2024, "metformin", "lowered HCC incidence", StudyDesign::Cohort, {"MET", "INC"}),
                   rel("R-23", "d1", 2016, "metformin", "lowered HCC incidence", StudyDesign::Cohort, {"MET", "INC"}),
                   0.9, RelationType::Replicates, "R-24"});
  return cases;
}

// ---- QA metrics --------------------------------------------------------------

struct QaExpectation {
  double accuracy = 5.0 / 8.0;
  double semsim = 4.0 / 8.0;
};

/// Eight answered items. Correct: 1, 2, 3, 5, 7. Answers are identical to
/// gold (cosine 1), share one of two tokens (cosine 1/2) or share none.
inline std::vector<forge::QaItem> qa_items() {
  using forge::YesNo;
  auto item = [](std::string q, YesNo gold, YesNo pred, std::string gold_answer, std::string pred_answer) {
    forge::QaItem i;
    i.question = std::move(q);
    i.gold_class = gold;
    i.predicted_class = pred;
    i.gold_answer = std::move(gold_answer);
    i.predicted_answer = std::move(pred_answer);
    return i;
  };
  return {
      item("q1", YesNo::Yes, YesNo::Yes, "sorafenib survival", "sorafenib survival"),
      item("q2", YesNo::No, YesNo::No, "yap1 proliferation", "yap1 proliferation"),
      item("q3", YesNo::Yes, YesNo::Yes, "afp recurrence", "afp recurrence"),
      item("q4", YesNo::Yes, YesNo::No, "wnt stemness", "lenvatinib response"),
      item("q5", YesNo::No, YesNo::No, "regorafenib angiogenesis", "metformin incidence"),
      item("q6", YesNo::Yes, YesNo::No, "ctnnb1 volume", "hypoxia glycolysis"),
      item("q7", YesNo::Yes, YesNo::Yes, "gpc3 staining", "gpc3 nodules"),
      item("q8", YesNo::No, YesNo::Yes, "tert mutation", "tert cirrhosis"),
  };
}

}  // namespace fixtures
