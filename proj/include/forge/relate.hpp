#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/encode.hpp"
#include "forge/evidence.hpp"
#include "forge/llm.hpp"

namespace forge {

/// Outcome-direction markers: +1 raises the measured outcome, -1 lowers it.
class PolarityLexicon {
 public:
  PolarityLexicon() = default;
  explicit PolarityLexicon(std::map<std::string, int> markers) : markers_(std::move(markers)) {}

  /// The bundled marker table.
  static PolarityLexicon defaults();
  static PolarityLexicon parse(std::string_view tsv);

  /// Sign of the first marker in `text`, flipped by a directly preceding
  /// negation; 0 when no marker occurs.
  int polarity(std::string_view text) const;
  bool is_marker(std::string_view token) const { return markers_.count(std::string(token)) > 0; }

 private:
  std::map<std::string, int> markers_;
};

PolarityLexicon load_polarity_lexicon(const std::filesystem::path& path);

struct RelationParams {
  double sim_min = 0.55;
  double overlap_min = 0.2;
  double refine_cut = 0.75;
  double verify_cut = 0.6;
  double high_sim_cut = 0.9;
  double same_term_min = 0.5;  // term Jaccard for "same intervention/phenotype"
};

struct CandidatePair {
  std::string id_a;  // id_a < id_b
  std::string id_b;
  double similarity = 0.0;
};

/// Cross-document pairs passing both the text-similarity and entity-overlap floors.
std::vector<CandidatePair> candidate_pairs(std::span<const EvidenceRecord> records, const TextEncoder& encoder,
                                           const RelationParams& params = {});

struct RelationProposal {
  std::string source_id;
  std::string target_id;
  RelationType relation_type = RelationType::Supports;
  double confidence = 0.0;
  std::string rationale;
};

/// Content words of `text`: lowercase tokens minus stopwords and polarity markers.
std::vector<std::string> content_terms(std::string_view text, const PolarityLexicon& lexicon);

/// Directs the pair later-to-earlier and types it by the first matching rule.
RelationProposal heuristic_relation(const EvidenceRecord& a, const EvidenceRecord& b, double similarity,
                                    const PolarityLexicon& lexicon, const RelationParams& params = {});

bool needs_verification(const RelationProposal& p, double similarity, const RelationParams& params = {});

/// Asks the backend to confirm or retype the proposal. Any unusable answer
/// keeps the heuristic result.
RelationEdge verify_relation(const EvidenceRecord& a, const EvidenceRecord& b, const RelationProposal& proposal,
                             double similarity, LlmBackend& backend, std::string_view now);

RelationEdge to_edge(const RelationProposal& p, double similarity, std::string_view now);

struct RelateReport {
  std::size_t pairs = 0;
  std::size_t verified = 0;
  std::size_t verification_fallbacks = 0;
};

/// Proposes, optionally verifies, and attaches edges to their source
/// records' evidence_relations. Returns every edge, sorted.
std::vector<RelationEdge> relate_records(std::vector<EvidenceRecord>& records, const TextEncoder& encoder,
                                         const PolarityLexicon& lexicon, const RelationParams& params,
                                         LlmBackend* verifier, std::string_view now, RelateReport* report = nullptr);

bool edge_less(const RelationEdge& x, const RelationEdge& y);

}  // namespace forge
