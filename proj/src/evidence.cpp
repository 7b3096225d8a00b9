#include "forge/evidence.hpp"

#include <algorithm>
#include <set>

#include "forge/text.hpp"

namespace forge {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::pair<std::string_view, E> (&table)[N], std::string_view key) {
  for (const auto& [name, value] : table)
    if (name == key) return value;
  return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::pair<std::string_view, E> (&table)[N], E value) {
  for (const auto& [name, v] : table)
    if (v == value) return name;
  return table[N - 1].first;
}

// Lowercase, trimmed, spaces/underscores as hyphens.
std::string vocab_key(std::string_view s) {
  auto out = text::to_lower(text::collapse_whitespace(s));
  std::replace(out.begin(), out.end(), ' ', '-');
  std::replace(out.begin(), out.end(), '_', '-');
  return out;
}

constexpr std::pair<std::string_view, SemanticType> kSemanticTypes[] = {
    {"Gene", SemanticType::Gene},       {"Drug", SemanticType::Drug},       {"Disease", SemanticType::Disease},
    {"Phenotype", SemanticType::Phenotype}, {"Pathway", SemanticType::Pathway}, {"Other", SemanticType::Other}};

constexpr std::pair<std::string_view, StudyDesign> kStudyDesigns[] = {
    {"meta-analysis", StudyDesign::MetaAnalysis}, {"rct", StudyDesign::Rct},
    {"cohort", StudyDesign::Cohort},              {"case-control", StudyDesign::CaseControl},
    {"in-vivo", StudyDesign::InVivo},             {"in-vitro", StudyDesign::InVitro},
    {"computational", StudyDesign::Computational}, {"unknown", StudyDesign::Unknown}};

constexpr std::pair<std::string_view, ClinicalStage> kStages[] = {
    {"preclinical", ClinicalStage::Preclinical}, {"clinical", ClinicalStage::Clinical},
    {"phase-i", ClinicalStage::PhaseI},          {"phase-ii", ClinicalStage::PhaseII},
    {"phase-iii", ClinicalStage::PhaseIII},      {"phase-iv", ClinicalStage::PhaseIV},
    {"unknown", ClinicalStage::Unknown}};

constexpr std::pair<std::string_view, LinkMethod> kMethods[] = {{"exact", LinkMethod::Exact},
                                                                {"alias", LinkMethod::Alias},
                                                                {"symbol", LinkMethod::Symbol},
                                                                {"fuzzy", LinkMethod::Fuzzy},
                                                                {"unlinked", LinkMethod::Unlinked}};

constexpr std::pair<std::string_view, Grade> kGrades[] = {
    {"A", Grade::A}, {"B", Grade::B}, {"C", Grade::C}, {"D", Grade::D}};

constexpr std::pair<std::string_view, ReviewStatus> kReview[] = {{"pending", ReviewStatus::Pending},
                                                                 {"approved", ReviewStatus::Approved},
                                                                 {"rejected", ReviewStatus::Rejected}};

constexpr std::pair<std::string_view, RelationType> kRelations[] = {
    {"SUPPORTS", RelationType::Supports},     {"CONTRADICTS", RelationType::Contradicts},
    {"REFINES", RelationType::Refines},       {"EXTENDS", RelationType::Extends},
    {"REPLICATES", RelationType::Replicates}, {"CAUSAL_CHAIN", RelationType::CausalChain}};

constexpr std::pair<std::string_view, RelationOrigin> kOrigins[] = {{"heuristic", RelationOrigin::Heuristic},
                                                                    {"verified", RelationOrigin::Verified}};

}  // namespace

std::string_view to_string(SemanticType v) noexcept { return name_of(kSemanticTypes, v); }
std::string_view to_string(StudyDesign v) noexcept { return name_of(kStudyDesigns, v); }
std::string_view to_string(ClinicalStage v) noexcept { return name_of(kStages, v); }
std::string_view to_string(LinkMethod v) noexcept { return name_of(kMethods, v); }
std::string_view to_string(Grade v) noexcept { return name_of(kGrades, v); }
std::string_view to_string(ReviewStatus v) noexcept { return name_of(kReview, v); }
std::string_view to_string(RelationType v) noexcept { return name_of(kRelations, v); }
std::string_view to_string(RelationOrigin v) noexcept { return name_of(kOrigins, v); }

std::optional<SemanticType> parse_semantic_type(std::string_view s) {
  auto key = text::to_lower(text::trim(s));
  for (const auto& [name, value] : kSemanticTypes)
    if (text::to_lower(name) == key) return value;
  return std::nullopt;
}

std::optional<StudyDesign> parse_study_design(std::string_view s) { return lookup(kStudyDesigns, vocab_key(s)); }
std::optional<ClinicalStage> parse_clinical_stage(std::string_view s) { return lookup(kStages, vocab_key(s)); }
std::optional<LinkMethod> parse_link_method(std::string_view s) { return lookup(kMethods, vocab_key(s)); }
std::optional<Grade> parse_grade(std::string_view s) { return lookup(kGrades, text::to_upper(text::trim(s))); }
std::optional<ReviewStatus> parse_review_status(std::string_view s) { return lookup(kReview, vocab_key(s)); }
std::optional<RelationType> parse_relation_type(std::string_view s) {
  return lookup(kRelations, text::to_upper(text::trim(s)));
}
std::optional<RelationOrigin> parse_relation_origin(std::string_view s) { return lookup(kOrigins, vocab_key(s)); }

std::string combined_text(const CandidateEvidence& e) {
  std::string out;
  auto add = [&](const std::optional<std::string>& s) {
    if (!s || s->empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += *s;
  };
  add(e.intervention);
  add(e.bio_mechanism);
  add(e.phenotype);
  add(e.source_text);
  return out;
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& x : sa) inter += sb.count(x);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

}  // namespace forge
