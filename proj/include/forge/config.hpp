#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/evaluate.hpp"
#include "forge/extract.hpp"
#include "forge/fuse.hpp"
#include "forge/llm.hpp"
#include "forge/normalize.hpp"
#include "forge/relate.hpp"
#include "forge/score.hpp"
#include "forge/serialize.hpp"

namespace forge {

struct EvalConfig {
  double negative_ratio = 1.0;
  double holdout_fraction = 0.1;
  std::size_t top_k = 5;
  QaSampling qa;
  LinkPredParams linkpred;
};

/// Everything a run needs. Paths are resolved against the config file's
/// directory; the raw strings are kept for the digest.
struct RunConfig {
  std::string disease = "HCC";
  std::string corpus_raw;
  std::string vocabulary_raw;
  std::string lexicon_raw;
  std::filesystem::path corpus;
  std::filesystem::path vocabulary;
  std::filesystem::path lexicon;  // empty: bundled lexicon
  std::filesystem::path workdir = "forge-out";
  std::uint64_t seed = 42;
  std::string timestamp = "2025-01-01T00:00:00Z";
  std::string creator = "forge";

  std::string encoder = "hashing";
  BackendSettings backend;

  ExtractOptions extract;
  FuzzyParams fuzzy;
  ScoringConfig scoring = ScoringConfig::defaults();
  FusionParams fusion;
  RelationParams relation;
  bool verify_relations = true;
  EvalConfig eval;

  std::vector<std::string> warnings;  // unknown keys and the like
};

/// Parses INI text. `base_dir` anchors relative paths. Throws ParseError on
/// malformed text or values, InvariantViolation listing every bad field.
RunConfig parse_config(std::string_view ini, const std::filesystem::path& base_dir = {}, bool check_paths = true);

RunConfig load_config(const std::filesystem::path& path, bool check_paths = true);

/// Every violated constraint; empty when the config is usable.
std::vector<std::string> config_problems(const RunConfig& c, bool check_paths);

/// Resolved settings without secrets or machine-specific paths.
Json config_to_json(const RunConfig& c);

std::string config_digest(const RunConfig& c);

}  // namespace forge
