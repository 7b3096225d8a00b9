#pragma once

#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/evidence.hpp"
#include "forge/llm.hpp"

namespace forge {

struct ExtractConfig {
  std::set<SectionLabel> evidence_sections;
  std::vector<std::string> signal_patterns;  // ECMAScript, matched case-insensitively

  static ExtractConfig defaults();
};

/// Chunks from evidence-bearing sections or matching a signal pattern, in order.
std::vector<Chunk> filter_chunks(std::span<const Chunk> chunks, const ExtractConfig& config = ExtractConfig::defaults());

struct GroundingFailure {
  std::string doc_id;
  std::size_t chunk_index = 0;
  std::size_t item_index = 0;
  std::string source_text;
};

struct ParsedExtraction {
  std::vector<CandidateEvidence> accepted;
  std::vector<GroundingFailure> rejected;
  std::vector<std::string> warnings;
};

/// True when `quote` occurs in `chunk_text` once both are whitespace-collapsed.
bool is_grounded(std::string_view quote, std::string_view chunk_text);

/// Parses a backend response for `chunk`. Structural problems throw
/// SchemaViolation; ungrounded items are returned in `rejected`.
ParsedExtraction parse_extraction_detailed(std::string_view raw, const Chunk& chunk);

/// Strict form: throws GroundingViolation if any item is ungrounded.
std::vector<CandidateEvidence> parse_extraction_response(std::string_view raw, const Chunk& chunk);

/// One backend call with the extraction prompt for `chunk`.
ParsedExtraction extract_chunk(const Chunk& chunk, std::string_view disease, LlmBackend& backend);

/// Drops exact repeats of a whitespace-normalized source_text, first wins.
/// With a backend, asks for enrichment and keeps it only when the item count
/// and every source_text survive unchanged.
std::vector<CandidateEvidence> aggregate_document(std::span<const std::vector<CandidateEvidence>> per_chunk,
                                                  LlmBackend* backend = nullptr, const DocumentMeta* meta = nullptr);

struct ExtractOptions {
  ChunkParams chunking;
  SectionConfig sections = SectionConfig::defaults();
  ExtractConfig filter = ExtractConfig::defaults();
  std::size_t workers = 1;
  bool enrich = false;
};

struct ExtractionReport {
  std::size_t chunks = 0;
  std::size_t chunks_sent = 0;
  std::size_t schema_failures = 0;
  std::size_t candidates = 0;
  std::vector<GroundingFailure> grounding_violations;
  std::vector<std::string> warnings;
};

struct DocumentExtraction {
  std::string doc_id;
  std::vector<CandidateEvidence> evidence;
};

/// Segments, chunks, filters and extracts every document. Chunk calls run on
/// up to `workers` threads; results are assembled in chunk order.
std::vector<DocumentExtraction> extract_documents(std::span<const Document> docs, std::string_view disease,
                                                  LlmBackend& backend, const ExtractOptions& options,
                                                  ExtractionReport* report = nullptr);

}  // namespace forge
