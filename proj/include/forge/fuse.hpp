#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/encode.hpp"
#include "forge/evidence.hpp"

namespace forge {

enum class MatchKind { Fingerprint, Semantic };
std::string_view to_string(MatchKind k) noexcept;

struct FusionParams {
  double dup_threshold = 0.95;
  double entity_overlap_min = 0.5;
};

/// "<DISEASE>-EV-000042".
std::string make_evidence_id(std::string_view disease, std::size_t sequence);

/// Hex SHA-256 of doc_id and the lowercased, whitespace-collapsed source_text.
std::string fingerprint(const EvidenceRecord& record);

struct DuplicateMatch {
  std::string existing_id;
  MatchKind kind = MatchKind::Fingerprint;
  double similarity = 0.0;
};

/// Matches of `incoming` in `store`, best first. Records sharing the
/// incoming evidence_id are ignored.
std::vector<DuplicateMatch> find_duplicates(const EvidenceRecord& incoming, std::span<const EvidenceRecord> store,
                                            const TextEncoder& encoder, const FusionParams& params = {});

/// True when `a` should be kept over `b`: higher composite, then earlier
/// created_at, then smaller evidence_id.
bool outranks(const EvidenceRecord& a, const EvidenceRecord& b);

/// Fills absent canonical fields from `duplicate`, extends merged_from and
/// bumps the version.
EvidenceRecord merge_records(const EvidenceRecord& canonical, const EvidenceRecord& duplicate, std::string_view now);

struct MergeLogEntry {
  std::string canonical_id;
  std::string absorbed_id;
  MatchKind kind = MatchKind::Fingerprint;
  double similarity = 0.0;
};

struct FusionResult {
  std::vector<EvidenceRecord> records;
  std::vector<MergeLogEntry> log;
  std::size_t passes = 0;
};

/// Repeats fusion passes until one performs no merge. Survivors keep their
/// first-seen order.
FusionResult fuse_records(std::vector<EvidenceRecord> records, const TextEncoder& encoder,
                          const FusionParams& params, std::string_view now);

std::string merge_log_csv(std::span<const MergeLogEntry> log);

}  // namespace forge
