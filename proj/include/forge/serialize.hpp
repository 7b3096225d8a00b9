#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "forge/corpus.hpp"
#include "forge/evidence.hpp"

namespace forge {

using Json = nlohmann::json;

/// Field names the reader did not recognize, as dotted paths. Readers
/// collect them instead of failing so that newer files still load.
using UnknownFields = std::vector<std::string>;

Json meta_to_json(const DocumentMeta& meta);
DocumentMeta meta_from_json(const Json& j, UnknownFields* unknown = nullptr);

Json document_to_json(const Document& doc);
Document document_from_json(const Json& j);

Json chunk_to_json(const Chunk& chunk);

Json entity_link_to_json(const EntityLink& link);
Json score_to_json(const QualityScore& score);
Json relation_to_json(const RelationEdge& edge);
RelationEdge relation_from_json(const Json& j);

/// Candidate in the flat extraction schema (the backend's field names) plus origin.
Json candidate_to_json(const CandidateEvidence& c);

/// Strict parse of one extraction item. Throws SchemaViolation on wrong
/// types or out-of-range values; out-of-vocabulary enum values become
/// unknown/Other and are reported through `warnings`.
CandidateEvidence candidate_from_json(const Json& j, std::vector<std::string>* warnings = nullptr);

Json record_to_json(const EvidenceRecord& r);
EvidenceRecord record_from_json(const Json& j, UnknownFields* unknown = nullptr);

Json records_to_json(const std::vector<EvidenceRecord>& records);
std::vector<EvidenceRecord> records_from_json(const Json& j, UnknownFields* unknown = nullptr);

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string canonical_dump(const Json& j);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace forge
