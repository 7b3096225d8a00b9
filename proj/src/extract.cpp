#include "forge/extract.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include <spdlog/spdlog.h>

#include "forge/error.hpp"
#include "forge/serialize.hpp"
#include "forge/text.hpp"

namespace forge {

ExtractConfig ExtractConfig::defaults() {
  ExtractConfig c;
  c.evidence_sections = {SectionLabel::Abstract, SectionLabel::Methods, SectionLabel::Results,
                         SectionLabel::Discussion};
  c.signal_patterns = {
      R"(\bp\s*(<|=|>|≤|<=)\s*0?\.\d)",
      R"(\bn\s*=\s*\d)",
      R"(\d+(\.\d+)?\s*-?\s*fold\b)",
      R"(\b(hazard|odds|risk)\s+ratio\b)",
      R"(\b(HR|OR|RR)\s*[=:]?\s*\d)",
      R"(\b95%\s*CI\b)",
      R"(\b(western blot|immunohistochemistry|qpcr|rt-pcr|flow cytometry|cck-8|mtt assay|transwell|xenograft|knockdown|overexpression)\b)",
  };
  return c;
}

std::vector<Chunk> filter_chunks(std::span<const Chunk> chunks, const ExtractConfig& config) {
  std::vector<std::regex> patterns;
  patterns.reserve(config.signal_patterns.size());
  for (const auto& p : config.signal_patterns) patterns.emplace_back(p, std::regex::icase);
  std::vector<Chunk> out;
  for (const auto& c : chunks) {
    bool keep = config.evidence_sections.count(c.section_label) > 0;
    for (std::size_t i = 0; !keep && i < patterns.size(); ++i) keep = std::regex_search(c.text, patterns[i]);
    if (keep) out.push_back(c);
  }
  return out;
}

bool is_grounded(std::string_view quote, std::string_view chunk_text) {
  auto q = text::collapse_whitespace(quote);
  if (q.empty()) return false;
  return text::collapse_whitespace(chunk_text).find(q) != std::string::npos;
}

ParsedExtraction parse_extraction_detailed(std::string_view raw, const Chunk& chunk) {
  Json parsed;
  try {
    parsed = Json::parse(strip_code_fence(raw));
  } catch (const Json::exception&) {
    fail(ErrorCode::SchemaViolation, "response is not valid JSON");
  }
  if (!parsed.is_object()) fail(ErrorCode::SchemaViolation, "response is not a JSON object");
  auto it = parsed.find("evidence");
  if (it == parsed.end()) fail(ErrorCode::SchemaViolation, "response has no 'evidence' key");
  if (!it->is_array()) fail(ErrorCode::SchemaViolation, "'evidence' is not a list");

  ParsedExtraction out;
  std::vector<CandidateEvidence> items;
  for (const auto& item : *it) items.push_back(candidate_from_json(item, &out.warnings));
  for (std::size_t i = 0; i < items.size(); ++i) {
    auto& c = items[i];
    if (!is_grounded(c.source_text, chunk.text)) {
      out.rejected.push_back(GroundingFailure{chunk.doc_id, chunk.index, i, c.source_text});
      continue;
    }
    c.origin = EvidenceOrigin{chunk.doc_id, chunk.index, chunk.section_label};
    out.accepted.push_back(std::move(c));
  }
  for (const auto& w : out.warnings) spdlog::warn("{} chunk {}: {}", chunk.doc_id, chunk.index, w);
  return out;
}

std::vector<CandidateEvidence> parse_extraction_response(std::string_view raw, const Chunk& chunk) {
  auto parsed = parse_extraction_detailed(raw, chunk);
  if (!parsed.rejected.empty()) {
    fail(ErrorCode::GroundingViolation,
         "source_text not found in chunk: \"" + parsed.rejected.front().source_text + "\"");
  }
  return std::move(parsed.accepted);
}

ParsedExtraction extract_chunk(const Chunk& chunk, std::string_view disease, LlmBackend& backend) {
  auto tmpl = prompts::get(prompts::Id::Extract);
  auto user = prompts::render(tmpl.user, {{"SECTION", std::string(to_string(chunk.section_label))},
                                          {"DISEASE", std::string(disease)},
                                          {"TEXT CHUNK", chunk.text}});
  auto raw = complete_with_retry(backend, tmpl.system, user);
  return parse_extraction_detailed(raw, chunk);
}

namespace {

std::vector<CandidateEvidence> dedup_exact(std::span<const std::vector<CandidateEvidence>> per_chunk) {
  std::vector<CandidateEvidence> out;
  std::set<std::string> seen;
  std::optional<std::string> doc;
  for (const auto& list : per_chunk) {
    for (const auto& c : list) {
      if (doc && *doc != c.origin.doc_id) fail(ErrorCode::MixedDocuments, "items from " + *doc + " and " + c.origin.doc_id);
      doc = c.origin.doc_id;
      if (seen.insert(text::collapse_whitespace(c.source_text)).second) out.push_back(c);
    }
  }
  return out;
}

std::optional<std::vector<CandidateEvidence>> try_enrich(const std::vector<CandidateEvidence>& base, LlmBackend& backend,
                                                         const DocumentMeta* meta) {
  Json arr = Json::array();
  for (const auto& c : base) {
    auto j = candidate_to_json(c);
    j.erase("origin");
    arr.push_back(std::move(j));
  }
  auto tmpl = prompts::get(prompts::Id::Enrich);
  auto user = prompts::render(tmpl.user, {{"TITLE", meta && meta->title ? *meta->title : ""},
                                          {"DOI", meta && meta->doi ? *meta->doi : ""},
                                          {"EVIDENCE JSON ARRAY", arr.dump(2)}});
  std::vector<CandidateEvidence> enriched;
  try {
    auto parsed = Json::parse(strip_code_fence(complete_with_retry(backend, tmpl.system, user)));
    if (!parsed.is_object() || !parsed.contains("evidence") || !parsed["evidence"].is_array()) return std::nullopt;
    for (const auto& item : parsed["evidence"]) enriched.push_back(candidate_from_json(item));
  } catch (const Json::exception&) {
    return std::nullopt;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::BackendFailure) throw;
    return std::nullopt;
  }
  if (enriched.size() != base.size()) return std::nullopt;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (enriched[i].source_text != base[i].source_text) return std::nullopt;
    enriched[i].origin = base[i].origin;
  }
  return enriched;
}

}  // namespace

std::vector<CandidateEvidence> aggregate_document(std::span<const std::vector<CandidateEvidence>> per_chunk,
                                                  LlmBackend* backend, const DocumentMeta* meta) {
  auto base = dedup_exact(per_chunk);
  if (!backend || base.empty()) return base;
  if (auto enriched = try_enrich(base, *backend, meta)) return std::move(*enriched);
  spdlog::warn("enrichment rejected for {}; keeping rule-based aggregation", base.front().origin.doc_id);
  return base;
}

std::vector<DocumentExtraction> extract_documents(std::span<const Document> docs, std::string_view disease,
                                                  LlmBackend& backend, const ExtractOptions& options,
                                                  ExtractionReport* report) {
  struct Job {
    std::size_t doc = 0;
    Chunk chunk;
  };
  std::vector<Job> jobs;
  std::size_t total_chunks = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto sections = segment_sections(docs[d], options.sections);
    auto chunks = chunk_sections(docs[d].doc_id, sections, options.chunking);
    total_chunks += chunks.size();
    for (auto& c : filter_chunks(chunks, options.filter)) jobs.push_back(Job{d, std::move(c)});
  }

  struct Outcome {
    ParsedExtraction parsed;
    bool schema_failed = false;
    std::string schema_message;
    std::exception_ptr error;
  };
  std::vector<Outcome> outcomes(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        outcomes[i].parsed = extract_chunk(jobs[i].chunk, disease, backend);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SchemaViolation) {
          outcomes[i].schema_failed = true;
          outcomes[i].schema_message = e.what();
        } else {
          outcomes[i].error = std::make_exception_ptr(
              Error(e.code(), "extract: chunk " + jobs[i].chunk.doc_id + "#" + std::to_string(jobs[i].chunk.index) +
                                  ": " + e.what()));
        }
      } catch (...) {
        outcomes[i].error = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(options.workers, jobs.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& o : outcomes)
    if (o.error) std::rethrow_exception(o.error);

  ExtractionReport local;
  local.chunks = total_chunks;
  local.chunks_sent = jobs.size();
  std::vector<std::vector<std::vector<CandidateEvidence>>> per_doc(docs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    auto& o = outcomes[i];
    if (o.schema_failed) {
      ++local.schema_failures;
      spdlog::warn("skipping chunk {}#{}: {}", jobs[i].chunk.doc_id, jobs[i].chunk.index, o.schema_message);
      local.warnings.push_back(jobs[i].chunk.doc_id + "#" + std::to_string(jobs[i].chunk.index) + ": " +
                               o.schema_message);
      continue;
    }
    for (auto& g : o.parsed.rejected) {
      spdlog::warn("ungrounded item rejected in {}#{}", g.doc_id, g.chunk_index);
      local.grounding_violations.push_back(std::move(g));
    }
    for (auto& w : o.parsed.warnings) local.warnings.push_back(std::move(w));
    per_doc[jobs[i].doc].push_back(std::move(o.parsed.accepted));
  }

  std::vector<DocumentExtraction> out;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    auto evidence = aggregate_document(per_doc[d], options.enrich ? &backend : nullptr, &docs[d].meta);
    local.candidates += evidence.size();
    out.push_back(DocumentExtraction{docs[d].doc_id, std::move(evidence)});
  }
  if (report) *report = std::move(local);
  return out;
}

}  // namespace forge
