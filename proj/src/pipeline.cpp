#include "forge/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>

#include "forge/corpus.hpp"
#include "forge/error.hpp"
#include "forge/extract.hpp"
#include "forge/fuse.hpp"
#include "forge/normalize.hpp"
#include "forge/relate.hpp"
#include "forge/score.hpp"
#include "forge/text.hpp"

namespace fs = std::filesystem;

namespace forge {

namespace {

constexpr std::pair<std::string_view, Stage> kStageNames[] = {
    {"ingest", Stage::Ingest}, {"extract", Stage::Extract}, {"normalize", Stage::Normalize}, {"score", Stage::Score},
    {"fuse", Stage::Fuse},     {"relate", Stage::Relate},   {"build", Stage::Build}};

std::string file_key(const fs::path& p) { return p.filename().string(); }

void note_input(StageResult& r, const fs::path& p) { r.inputs[file_key(p)] = path_digest(p); }
void note_output(StageResult& r, const fs::path& p) { r.outputs[file_key(p)] = path_digest(p); }

std::vector<EvidenceRecord> read_records(const fs::path& p) { return records_from_json(read_json_file(p)); }

void write_records(const fs::path& p, const std::vector<EvidenceRecord>& records) {
  write_text_file(p, canonical_dump(records_to_json(records)));
}

Json grounding_to_json(const GroundingFailure& g) {
  return {{"doc_id", g.doc_id}, {"chunk_index", g.chunk_index}, {"item_index", g.item_index}, {"source_text", g.source_text}};
}

void ingest(const RunConfig& c, const StageIo& io, StageResult& r) {
  auto docs = load_corpus_directory(io.input);
  Json arr = Json::array();
  std::size_t sections = 0;
  for (const auto& d : docs) {
    sections += d.sections.size();
    arr.push_back(document_to_json(d));
  }
  write_text_file(io.output, canonical_dump(Json{{"disease", c.disease}, {"documents", arr}}));
  r.counts = {{"documents", docs.size()}, {"sections", sections}};
}

void extract(const RunConfig& c, const StageIo& io, LlmBackend& backend, StageResult& r) {
  auto corpus = read_json_file(io.input);
  std::vector<Document> docs;
  for (const auto& d : corpus.at("documents")) docs.push_back(document_from_json(d));
  ExtractionReport report;
  auto results = extract_documents(docs, c.disease, backend, c.extract, &report);
  Json arr = Json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    Json evidence = Json::array();
    for (const auto& e : results[i].evidence) evidence.push_back(candidate_to_json(e));
    arr.push_back({{"doc_id", results[i].doc_id}, {"meta", meta_to_json(docs[i].meta)}, {"evidence", evidence}});
  }
  Json violations = Json::array();
  for (const auto& g : report.grounding_violations) violations.push_back(grounding_to_json(g));
  r.grounding_violations = violations;
  write_text_file(io.output, canonical_dump(Json{{"disease", c.disease},
                                                 {"documents", arr},
                                                 {"grounding_violations", violations},
                                                 {"warnings", report.warnings}}));
  r.counts = {{"chunks", report.chunks},
              {"chunks_sent", report.chunks_sent},
              {"schema_failures", report.schema_failures},
              {"candidates", report.candidates},
              {"grounding_violations", report.grounding_violations.size()}};
}

void normalize(const RunConfig& c, const StageIo& io, StageResult& r) {
  auto vocab = load_vocabulary(c.vocabulary);
  note_input(r, c.vocabulary);
  auto cands = read_json_file(io.input);
  std::vector<EvidenceRecord> records;
  std::size_t seq = 0, linked = 0, unlinked = 0;
  for (const auto& doc : cands.at("documents")) {
    auto meta = meta_from_json(doc.at("meta"));
    auto doc_id = doc.at("doc_id").get<std::string>();
    for (const auto& item : doc.at("evidence")) {
      EvidenceRecord rec;
      rec.evidence = candidate_from_json(item);
      rec.evidence_id = make_evidence_id(c.disease, ++seq);
      rec.disease = c.disease;
      rec.doc_id = doc_id;
      rec.source = meta;
      auto norm = normalize_record(rec.evidence, vocab, c.fuzzy);
      for (const auto& l : norm.core_entities) (l.linked() ? linked : unlinked) += 1;
      rec.core_entities = std::move(norm.core_entities);
      rec.linked_entities = std::move(norm.linked_entities);
      rec.created_at = c.timestamp;
      rec.updated_at = c.timestamp;
      records.push_back(std::move(rec));
    }
  }
  write_records(io.output, records);
  r.counts = {{"records", records.size()}, {"entities_linked", linked}, {"entities_unlinked", unlinked}};
}

void score(const RunConfig& c, const StageIo& io, StageResult& r) {
  auto records = read_records(io.input);
  std::map<std::string, std::size_t> grades{{"A", 0}, {"B", 0}, {"C", 0}, {"D", 0}};
  for (auto& rec : records) {
    rec.score = score_evidence(rec.evidence, rec.source, c.scoring);
    ++grades[std::string(to_string(rec.score.grade))];
  }
  write_records(io.output, records);
  r.counts = {{"records", records.size()}, {"grades", grades}};
}

void fuse(const RunConfig& c, const StageIo& io, StageResult& r) {
  auto records = read_records(io.input);
  auto before = records.size();
  auto encoder = make_encoder(c.encoder);
  auto result = fuse_records(std::move(records), *encoder, c.fusion, c.timestamp);
  write_records(io.output, result.records);
  if (io.side_output) write_text_file(*io.side_output, merge_log_csv(result.log));
  r.counts = {{"input", before}, {"output", result.records.size()}, {"merges", result.log.size()}, {"passes", result.passes}};
}

void relate(const RunConfig& c, const StageIo& io, LlmBackend& backend, StageResult& r) {
  auto records = read_records(io.input);
  auto encoder = make_encoder(c.encoder);
  auto lexicon = c.lexicon.empty() ? PolarityLexicon::defaults() : load_polarity_lexicon(c.lexicon);
  if (!c.lexicon.empty()) note_input(r, c.lexicon);
  RelateReport report;
  auto edges = relate_records(records, *encoder, lexicon, c.relation, c.verify_relations ? &backend : nullptr,
                              c.timestamp, &report);
  write_records(io.output, records);
  if (io.side_output) {
    Json arr = Json::array();
    for (const auto& e : edges) arr.push_back(relation_to_json(e));
    write_text_file(*io.side_output, canonical_dump(arr));
  }
  std::map<std::string, std::size_t> types;
  for (auto t : kAllRelationTypes) types[std::string(to_string(t))] = 0;
  for (const auto& e : edges) ++types[std::string(to_string(e.relation_type))];
  r.counts = {{"pairs", report.pairs},
              {"edges", edges.size()},
              {"types", types},
              {"verified", report.verified},
              {"verification_fallbacks", report.verification_fallbacks}};
}

void build(const RunConfig& c, const StageIo& io, StageResult& r) {
  auto records = read_records(io.input);
  GraphMetadata meta;
  meta.disease = c.disease;
  meta.creator = c.creator;
  meta.updated_at = c.timestamp;
  auto g = build_graph(records, meta);
  save_graph(g, io.output);
  r.counts = {{"evidence_nodes", g.evidence().size()},
              {"entity_nodes", g.entities().size()},
              {"nodes", g.node_count()},
              {"edges", g.edge_count()}};
}

}  // namespace

std::string_view to_string(Stage s) noexcept {
  for (const auto& [name, v] : kStageNames)
    if (v == s) return name;
  return "ingest";
}

std::optional<Stage> parse_stage(std::string_view s) {
  for (const auto& [name, v] : kStageNames)
    if (name == s) return v;
  return std::nullopt;
}

StageIo default_io(Stage s, const RunConfig& c) {
  const auto& w = c.workdir;
  switch (s) {
    case Stage::Ingest: return {c.corpus, w / "corpus.json", std::nullopt};
    case Stage::Extract: return {w / "corpus.json", w / "candidates.json", std::nullopt};
    case Stage::Normalize: return {w / "candidates.json", w / "normalized.json", std::nullopt};
    case Stage::Score: return {w / "normalized.json", w / "scored.json", std::nullopt};
    case Stage::Fuse: return {w / "scored.json", w / "fused.json", w / "fusion_log.csv"};
    case Stage::Relate: return {w / "fused.json", w / "related.json", w / "edges.json"};
    case Stage::Build: return {w / "related.json", w / "graph.json", std::nullopt};
  }
  return {};
}

std::string path_digest(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p))
      if (e.is_regular_file()) files.push_back(fs::relative(e.path(), p));
    std::sort(files.begin(), files.end());
    std::string listing;
    for (const auto& f : files) {
      listing += f.generic_string() + '\x1f' + text::sha256_hex(read_text_file(p / f)) + '\n';
    }
    return text::sha256_hex(listing);
  }
  return text::sha256_hex(read_text_file(p));
}

StageResult run_stage(Stage s, const RunConfig& c, const StageIo& io, LlmBackend* backend) {
  StageResult r;
  r.stage = s;
  std::unique_ptr<LlmBackend> owned;
  auto need_backend = [&]() -> LlmBackend& {
    if (!backend) {
      owned = make_backend(c.backend);
      backend = owned.get();
    }
    return *backend;
  };
  spdlog::info("stage {}: {} -> {}", to_string(s), io.input.string(), io.output.string());
  try {
    if (!fs::exists(io.input)) fail(ErrorCode::IoError, "missing input " + io.input.string());
    note_input(r, io.input);
    switch (s) {
      case Stage::Ingest: ingest(c, io, r); break;
      case Stage::Extract: extract(c, io, need_backend(), r); break;
      case Stage::Normalize: normalize(c, io, r); break;
      case Stage::Score: score(c, io, r); break;
      case Stage::Fuse: fuse(c, io, r); break;
      case Stage::Relate: relate(c, io, need_backend(), r); break;
      case Stage::Build: build(c, io, r); break;
    }
    note_output(r, io.output);
    if (io.side_output) note_output(r, *io.side_output);
  } catch (const Error& e) {
    throw Error(e.code(), std::string(to_string(s)) + ": " + e.what());
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string(to_string(s)) + ": " + e.what());
  }
  return r;
}

void record_stage(const RunConfig& c, const StageResult& result) {
  auto path = c.workdir / "manifest.json";
  Json manifest = fs::exists(path) ? read_json_file(path) : Json::object();
  auto digest = config_digest(c);
  if (manifest.value("config_digest", "") != digest) manifest = Json::object();
  manifest["config_digest"] = digest;
  manifest["disease"] = c.disease;
  manifest["timestamp"] = c.timestamp;
  manifest["encoder"] = c.encoder;
  manifest["backend"] = c.backend.name;
  manifest["stages"][std::string(to_string(result.stage))] = {
      {"order", static_cast<int>(result.stage)}, {"inputs", result.inputs}, {"outputs", result.outputs}, {"counts", result.counts}};
  if (!result.grounding_violations.is_null()) manifest["grounding_violations"] = result.grounding_violations;
  write_text_file(path, canonical_dump(manifest));
}

PipelineResult run_pipeline(const RunConfig& c, LlmBackend* backend) {
  PipelineResult out;
  std::unique_ptr<LlmBackend> owned;
  if (!backend) {
    owned = make_backend(c.backend);
    backend = owned.get();
  }
  fs::create_directories(c.workdir);
  fs::remove(c.workdir / "manifest.json");
  for (auto s : kAllStages) {
    auto r = run_stage(s, c, default_io(s, c), backend);
    record_stage(c, r);
    out.stages.push_back(std::move(r));
  }
  out.graph = default_io(Stage::Build, c).output;
  out.manifest = c.workdir / "manifest.json";
  return out;
}

}  // namespace forge
