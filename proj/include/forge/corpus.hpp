#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

enum class SectionLabel { Abstract, Introduction, Methods, Results, Discussion, Conclusion, References, Other };

std::string_view to_string(SectionLabel label) noexcept;
std::optional<SectionLabel> parse_section_label(std::string_view name);

enum class Quartile { Q1, Q2, Q3, Q4 };

std::string_view to_string(Quartile q) noexcept;
std::optional<Quartile> parse_quartile(std::string_view name);

/// Bibliographic fields as they arrive from a sidecar file. Every field is
/// optional so that manual overrides can be merged field by field.
struct DocumentMeta {
  std::optional<std::string> doi;
  std::optional<std::string> title;
  std::optional<std::vector<std::string>> authors;
  std::optional<std::string> journal;
  std::optional<int> year;
  std::optional<long long> citation_count;
  std::optional<double> impact_factor;
  std::optional<Quartile> quartile;
  std::optional<std::string> path;

  bool operator==(const DocumentMeta&) const = default;
};

/// Fields of `override_meta` that are present win; everything else comes from `base`.
DocumentMeta merge_meta(const DocumentMeta& base, const DocumentMeta& override_meta);

struct Section {
  SectionLabel label = SectionLabel::Other;
  std::string heading;  // raw heading line, empty for leading text
  std::string text;

  bool operator==(const Section&) const = default;
};

struct Document {
  std::string doc_id;
  DocumentMeta meta;
  std::vector<Section> sections;

  bool operator==(const Document&) const = default;
};

struct Chunk {
  std::string doc_id;
  std::size_t index = 0;  // ordinal among the document's emitted chunks
  SectionLabel section_label = SectionLabel::Other;
  std::size_t start_offset = 0;  // Unicode scalar offsets into the section text
  std::size_t end_offset = 0;
  std::string text;

  bool operator==(const Chunk&) const = default;
};

struct SectionConfig {
  /// Lowercased heading text -> canonical label.
  std::map<std::string, SectionLabel> synonyms;
  /// Heading prefixes (lowercase) of sections never sent to extraction.
  std::vector<std::string> low_information;

  static SectionConfig defaults();
};

struct ChunkParams {
  long window = 3000;
  long overlap = 300;
  long min_len = 500;
};

/// Normalized DOI when present, otherwise a 128-bit hash of the normalized title.
std::string derive_doc_id(const DocumentMeta& meta);

/// Splits `body` into sections and attaches merged metadata.
Document ingest_document(std::string_view body, const DocumentMeta& auto_meta,
                         const std::optional<DocumentMeta>& manual_meta,
                         const SectionConfig& config = SectionConfig::defaults());

/// Sections eligible for extraction, in source order.
std::vector<Section> segment_sections(const Document& doc,
                                      const SectionConfig& config = SectionConfig::defaults());

std::vector<Chunk> chunk_sections(std::string_view doc_id, std::span<const Section> sections,
                                  const ChunkParams& params = {});

/// Reads `<stem>.txt` bodies with `<stem>.meta.json` and optional
/// `<stem>.manual.json` sidecars. Documents come back sorted by doc_id.
std::vector<Document> load_corpus_directory(const std::filesystem::path& dir,
                                            const SectionConfig& config = SectionConfig::defaults());

}  // namespace forge
