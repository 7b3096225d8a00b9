#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "forge/error.hpp"
#include "forge/evidence.hpp"

#define CHECK_CODE(expr, ec)                              \
  do {                                                    \
    bool thrown_ = false;                                 \
    try {                                                 \
      (void)(expr);                                       \
    } catch (const forge::Error& e_) {                    \
      thrown_ = true;                                     \
      CHECK_MESSAGE(e_.code() == (ec), e_.what());        \
    }                                                     \
    CHECK_MESSAGE(thrown_, "expected " #ec);              \
  } while (0)

namespace testing {

inline std::filesystem::path data_dir() { return FORGE_TEST_DATA; }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("forge-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline forge::EntityLink link(std::string id, forge::SemanticType type, std::string name = {}) {
  forge::EntityLink l;
  l.raw_name = name.empty() ? id : name;
  l.semantic_type = type;
  l.concept_id = id;
  l.canonical_name = name.empty() ? id : name;
  l.source_db = "TEST";
  l.link_score = 1.0;
  l.method = forge::LinkMethod::Exact;
  return l;
}

inline forge::EvidenceRecord record(std::string id, std::string doc, std::string text, double composite,
                                    std::vector<forge::EntityLink> entities = {}) {
  forge::EvidenceRecord r;
  r.evidence_id = std::move(id);
  r.disease = "HCC";
  r.doc_id = std::move(doc);
  r.evidence.source_text = std::move(text);
  r.evidence.extraction_confidence = 0.8;
  r.score.composite = composite;
  for (const auto& e : entities) {
    if (e.concept_id) r.linked_entities.push_back(*e.concept_id);
  }
  r.core_entities = std::move(entities);
  r.created_at = "2024-01-01T00:00:00Z";
  r.updated_at = r.created_at;
  return r;
}

}  // namespace testing
