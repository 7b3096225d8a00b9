#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/config.hpp"
#include "forge/graph.hpp"
#include "forge/llm.hpp"

namespace forge {

enum class Stage { Ingest, Extract, Normalize, Score, Fuse, Relate, Build };

inline constexpr Stage kAllStages[] = {Stage::Ingest, Stage::Extract, Stage::Normalize, Stage::Score,
                                       Stage::Fuse,   Stage::Relate,  Stage::Build};

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s);

/// Files a stage reads and writes. `side_output` holds the fusion log for
/// Fuse and the edge list for Relate.
struct StageIo {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> side_output;
};

/// Artifact names inside a work directory.
StageIo default_io(Stage s, const RunConfig& config);

struct StageResult {
  Stage stage = Stage::Ingest;
  Json inputs = Json::object();   // file name -> sha256
  Json outputs = Json::object();
  Json counts = Json::object();
  Json grounding_violations;  // Extract only
};

/// Runs one stage from its input artifact to its output artifact. A null
/// backend means one built from the config.
StageResult run_stage(Stage s, const RunConfig& config, const StageIo& io, LlmBackend* backend = nullptr);

/// Writes or replaces the stage's entry in `<workdir>/manifest.json`.
void record_stage(const RunConfig& config, const StageResult& result);

struct PipelineResult {
  std::vector<StageResult> stages;
  std::filesystem::path graph;
  std::filesystem::path manifest;
};

/// Every stage in order, each reading the previous stage's file.
PipelineResult run_pipeline(const RunConfig& config, LlmBackend* backend = nullptr);

/// sha256 of a file, or of a directory's sorted (relative path, content) listing.
std::string path_digest(const std::filesystem::path& p);

}  // namespace forge
