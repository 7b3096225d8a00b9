#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forge/evidence.hpp"

namespace forge {

struct VocabularyEntry {
  std::string concept_id;
  std::string canonical_name;
  SemanticType semantic_type = SemanticType::Other;
  std::vector<std::string> aliases;
  std::string source_db;
};

struct FuzzyParams {
  double threshold = 0.92;
  double margin = 0.03;
};

/// Immutable concept dictionary with exact, alias and gene-symbol indexes.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<VocabularyEntry> entries);

  const std::vector<VocabularyEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const VocabularyEntry* find(std::string_view concept_id) const;

  EntityLink link(std::string_view raw_name, SemanticType type, const FuzzyParams& fuzzy = {}) const;

 private:
  struct Name {
    std::u32string folded;
    std::size_t entry = 0;
  };

  std::vector<VocabularyEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> exact_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> alias_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> symbol_;
  std::map<SemanticType, std::vector<Name>> fuzzy_;

  EntityLink make_link(std::string_view raw, SemanticType type, std::size_t entry, double score, LinkMethod m) const;
  const std::vector<std::size_t>* lookup(const std::map<std::string, std::vector<std::size_t>, std::less<>>& index,
                                         const std::string& key) const;
};

/// Tab-separated: concept_id, canonical_name, semantic_type, aliases (|-separated), source_db.
/// Blank lines, '#' comments and a leading header row are skipped.
Vocabulary load_vocabulary(const std::filesystem::path& path);
Vocabulary parse_vocabulary(std::string_view tsv);

/// Lowercase with whitespace runs collapsed.
std::string fold_name(std::string_view s);

/// Gene-symbol key: Greek letters transliterated, punctuation removed, uppercased.
std::string symbol_key(std::string_view s);

/// 1 - Levenshtein / max length, over Unicode scalars.
double edit_similarity(std::u32string_view a, std::u32string_view b);

EntityLink link_entity(std::string_view raw_name, SemanticType type, const Vocabulary& vocab,
                       const FuzzyParams& fuzzy = {});

struct NormalizedEntities {
  std::vector<EntityLink> core_entities;
  std::vector<std::string> linked_entities;
};

NormalizedEntities normalize_record(const CandidateEvidence& c, const Vocabulary& vocab, const FuzzyParams& fuzzy = {});

}  // namespace forge
