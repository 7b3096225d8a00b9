#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus.hpp"

namespace forge {

enum class SemanticType { Gene, Drug, Disease, Phenotype, Pathway, Other };
enum class StudyDesign { MetaAnalysis, Rct, Cohort, CaseControl, InVivo, InVitro, Computational, Unknown };
enum class ClinicalStage { Preclinical, Clinical, PhaseI, PhaseII, PhaseIII, PhaseIV, Unknown };
enum class LinkMethod { Exact, Alias, Symbol, Fuzzy, Unlinked };
enum class Grade { A, B, C, D };
enum class ReviewStatus { Pending, Approved, Rejected };
enum class RelationType { Supports, Contradicts, Refines, Extends, Replicates, CausalChain };
enum class RelationOrigin { Heuristic, Verified };

std::string_view to_string(SemanticType v) noexcept;
std::string_view to_string(StudyDesign v) noexcept;
std::string_view to_string(ClinicalStage v) noexcept;
std::string_view to_string(LinkMethod v) noexcept;
std::string_view to_string(Grade v) noexcept;
std::string_view to_string(ReviewStatus v) noexcept;
std::string_view to_string(RelationType v) noexcept;
std::string_view to_string(RelationOrigin v) noexcept;

// Parsers accept case-insensitive input; spaces and underscores are read as
// hyphens for the design and stage vocabularies ("in vitro" -> in-vitro).
std::optional<SemanticType> parse_semantic_type(std::string_view s);
std::optional<StudyDesign> parse_study_design(std::string_view s);
std::optional<ClinicalStage> parse_clinical_stage(std::string_view s);
std::optional<LinkMethod> parse_link_method(std::string_view s);
std::optional<Grade> parse_grade(std::string_view s);
std::optional<ReviewStatus> parse_review_status(std::string_view s);
std::optional<RelationType> parse_relation_type(std::string_view s);
std::optional<RelationOrigin> parse_relation_origin(std::string_view s);

inline constexpr StudyDesign kAllStudyDesigns[] = {
    StudyDesign::MetaAnalysis, StudyDesign::Rct,     StudyDesign::Cohort,        StudyDesign::CaseControl,
    StudyDesign::InVivo,       StudyDesign::InVitro, StudyDesign::Computational, StudyDesign::Unknown};
inline constexpr ClinicalStage kAllClinicalStages[] = {
    ClinicalStage::Preclinical, ClinicalStage::Clinical, ClinicalStage::PhaseI,  ClinicalStage::PhaseII,
    ClinicalStage::PhaseIII,    ClinicalStage::PhaseIV,  ClinicalStage::Unknown};
inline constexpr RelationType kAllRelationTypes[] = {RelationType::Supports,   RelationType::Extends,
                                                     RelationType::Refines,    RelationType::Contradicts,
                                                     RelationType::CausalChain, RelationType::Replicates};
inline constexpr SemanticType kAllSemanticTypes[] = {SemanticType::Gene,      SemanticType::Drug,
                                                     SemanticType::Disease,   SemanticType::Phenotype,
                                                     SemanticType::Pathway,   SemanticType::Other};

struct RawEntity {
  std::string raw_name;
  SemanticType semantic_type = SemanticType::Other;

  bool operator==(const RawEntity&) const = default;
};

struct EvidenceOrigin {
  std::string doc_id;
  std::size_t chunk_index = 0;
  SectionLabel section_label = SectionLabel::Other;

  bool operator==(const EvidenceOrigin&) const = default;
};

/// One finding as returned by the extraction backend, after validation.
struct CandidateEvidence {
  std::optional<std::string> study_object;
  std::optional<std::string> intervention;
  std::optional<std::string> comparison;
  std::optional<std::string> outcome_metrics;
  std::vector<RawEntity> core_entities;
  std::optional<std::string> bio_mechanism;
  std::optional<std::string> phenotype;
  StudyDesign study_design = StudyDesign::Unknown;
  ClinicalStage clinical_stage = ClinicalStage::Unknown;
  std::optional<double> p_value;
  std::optional<long long> sample_size;
  std::optional<double> fold_change;
  std::string experimental_context;
  std::string source_text;
  double extraction_confidence = 0.0;
  std::optional<std::string> conflict_note;
  EvidenceOrigin origin;

  bool operator==(const CandidateEvidence&) const = default;
};

struct EntityLink {
  std::string raw_name;
  SemanticType semantic_type = SemanticType::Other;
  std::optional<std::string> concept_id;
  std::optional<std::string> canonical_name;
  std::optional<std::string> source_db;
  double link_score = 0.0;
  LinkMethod method = LinkMethod::Unlinked;

  bool linked() const noexcept { return method != LinkMethod::Unlinked; }
  bool operator==(const EntityLink&) const = default;
};

struct QualityScore {
  double s_type = 0.0;
  double s_impact = 0.0;
  double s_stat = 0.0;
  double s_sample = 0.0;
  double llm_confidence = 0.0;
  double composite = 0.0;
  Grade grade = Grade::D;

  bool operator==(const QualityScore&) const = default;
};

struct RelationEdge {
  std::string source_id;
  std::string target_id;
  RelationType relation_type = RelationType::Supports;
  double similarity = 0.0;
  double confidence = 0.0;
  std::string rationale;
  std::string created_at;
  RelationOrigin origin = RelationOrigin::Heuristic;

  bool operator==(const RelationEdge&) const = default;
};

/// A scored, normalized finding with provenance and lifecycle metadata.
struct EvidenceRecord {
  std::string evidence_id;
  std::string disease;
  std::string doc_id;
  DocumentMeta source;
  CandidateEvidence evidence;
  std::vector<EntityLink> core_entities;
  std::vector<std::string> linked_entities;
  QualityScore score;
  std::vector<RelationEdge> evidence_relations;
  std::vector<std::string> merged_from;
  ReviewStatus review_status = ReviewStatus::Pending;
  std::string created_at;
  std::string updated_at;
  int version = 1;

  bool operator==(const EvidenceRecord&) const = default;
};

/// intervention, mechanism, phenotype and source text joined by spaces; the
/// text compared during fusion, relation induction and retrieval.
std::string combined_text(const CandidateEvidence& e);

/// |A ∩ B| / |A ∪ B| over distinct ids; 0 when both are empty.
double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace forge
