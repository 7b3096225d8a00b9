#include "forge/fuse.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view to_string(MatchKind k) noexcept { return k == MatchKind::Fingerprint ? "fingerprint" : "semantic"; }

std::string make_evidence_id(std::string_view disease, std::size_t sequence) {
  return fmt::format("{}-EV-{:06d}", text::to_upper(disease), sequence);
}

std::string fingerprint(const EvidenceRecord& r) {
  return text::sha256_hex(r.doc_id + '\x1f' + text::to_lower(text::collapse_whitespace(r.evidence.source_text)));
}

namespace {

struct Indexed {
  std::string fingerprint;
  Embedding embedding;
};

Indexed index_record(const EvidenceRecord& r, const TextEncoder& encoder) {
  return Indexed{fingerprint(r), encoder.encode(combined_text(r.evidence))};
}

std::optional<DuplicateMatch> compare(const EvidenceRecord& a, const Indexed& ia, const EvidenceRecord& b,
                                      const Indexed& ib, const FusionParams& params) {
  if (a.evidence_id == b.evidence_id) return std::nullopt;
  if (ia.fingerprint == ib.fingerprint) return DuplicateMatch{b.evidence_id, MatchKind::Fingerprint, 1.0};
  if (jaccard(a.linked_entities, b.linked_entities) < params.entity_overlap_min) return std::nullopt;
  double sim = cosine(ia.embedding, ib.embedding);
  if (sim >= params.dup_threshold) return DuplicateMatch{b.evidence_id, MatchKind::Semantic, sim};
  return std::nullopt;
}

bool match_order(const DuplicateMatch& x, const DuplicateMatch& y) {
  if (x.similarity != y.similarity) return x.similarity > y.similarity;
  if (x.kind != y.kind) return x.kind == MatchKind::Fingerprint;
  return x.existing_id < y.existing_id;
}

template <typename T>
void fill(std::optional<T>& dst, const std::optional<T>& src) {
  if (!dst && src) dst = src;
}

}  // namespace

std::vector<DuplicateMatch> find_duplicates(const EvidenceRecord& incoming, std::span<const EvidenceRecord> store,
                                            const TextEncoder& encoder, const FusionParams& params) {
  const auto ii = index_record(incoming, encoder);
  std::vector<DuplicateMatch> out;
  for (const auto& r : store) {
    if (auto m = compare(incoming, ii, r, index_record(r, encoder), params)) out.push_back(std::move(*m));
  }
  std::stable_sort(out.begin(), out.end(), match_order);
  return out;
}

bool outranks(const EvidenceRecord& a, const EvidenceRecord& b) {
  if (a.score.composite != b.score.composite) return a.score.composite > b.score.composite;
  if (a.created_at != b.created_at) return a.created_at < b.created_at;
  return a.evidence_id < b.evidence_id;
}

EvidenceRecord merge_records(const EvidenceRecord& canonical, const EvidenceRecord& duplicate, std::string_view now) {
  if (canonical.evidence_id == duplicate.evidence_id) fail(ErrorCode::SelfMerge, "cannot merge " + canonical.evidence_id + " into itself");
  if (outranks(duplicate, canonical)) {
    fail(ErrorCode::ScoreOrderViolation, duplicate.evidence_id + " outranks " + canonical.evidence_id);
  }
  EvidenceRecord out = canonical;
  auto& e = out.evidence;
  const auto& d = duplicate.evidence;
  fill(e.study_object, d.study_object);
  fill(e.intervention, d.intervention);
  fill(e.comparison, d.comparison);
  fill(e.outcome_metrics, d.outcome_metrics);
  fill(e.bio_mechanism, d.bio_mechanism);
  fill(e.phenotype, d.phenotype);
  fill(e.p_value, d.p_value);
  fill(e.sample_size, d.sample_size);
  fill(e.fold_change, d.fold_change);
  fill(e.conflict_note, d.conflict_note);
  if (e.study_design == StudyDesign::Unknown) e.study_design = d.study_design;
  if (e.clinical_stage == ClinicalStage::Unknown) e.clinical_stage = d.clinical_stage;
  if (e.experimental_context.empty()) e.experimental_context = d.experimental_context;
  if (e.core_entities.empty()) e.core_entities = d.core_entities;
  if (out.core_entities.empty()) out.core_entities = duplicate.core_entities;
  if (out.linked_entities.empty()) out.linked_entities = duplicate.linked_entities;
  fill(out.source.doi, duplicate.source.doi);
  fill(out.source.title, duplicate.source.title);
  fill(out.source.authors, duplicate.source.authors);
  fill(out.source.journal, duplicate.source.journal);
  fill(out.source.year, duplicate.source.year);
  fill(out.source.citation_count, duplicate.source.citation_count);
  fill(out.source.impact_factor, duplicate.source.impact_factor);
  fill(out.source.quartile, duplicate.source.quartile);
  fill(out.source.path, duplicate.source.path);

  for (auto rel : duplicate.evidence_relations) {
    rel.source_id = out.evidence_id;
    if (rel.target_id == out.evidence_id) continue;
    bool present = std::any_of(out.evidence_relations.begin(), out.evidence_relations.end(), [&](const auto& x) {
      return x.target_id == rel.target_id && x.relation_type == rel.relation_type;
    });
    if (!present) out.evidence_relations.push_back(std::move(rel));
  }

  std::set<std::string> merged(out.merged_from.begin(), out.merged_from.end());
  merged.insert(duplicate.evidence_id);
  merged.insert(duplicate.merged_from.begin(), duplicate.merged_from.end());
  merged.erase(out.evidence_id);
  out.merged_from.assign(merged.begin(), merged.end());
  out.version = canonical.version + 1;
  out.updated_at = std::max(std::string(now), std::max(canonical.updated_at, canonical.created_at));
  return out;
}

FusionResult fuse_records(std::vector<EvidenceRecord> records, const TextEncoder& encoder,
                          const FusionParams& params, std::string_view now) {
  FusionResult result;
  if (records.empty()) return result;
  std::vector<Indexed> index;
  index.reserve(records.size());
  for (const auto& r : records) index.push_back(index_record(r, encoder));

  for (;;) {
    ++result.passes;
    std::vector<EvidenceRecord> active;
    std::vector<Indexed> active_index;
    std::size_t merges = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      std::optional<DuplicateMatch> best;
      std::size_t best_pos = 0;
      for (std::size_t j = 0; j < active.size(); ++j) {
        auto m = compare(records[i], index[i], active[j], active_index[j], params);
        if (m && (!best || match_order(*m, *best))) {
          best = std::move(m);
          best_pos = j;
        }
      }
      if (!best) {
        active.push_back(std::move(records[i]));
        active_index.push_back(std::move(index[i]));
        continue;
      }
      ++merges;
      auto& kept = active[best_pos];
      if (outranks(kept, records[i])) {
        result.log.push_back(MergeLogEntry{kept.evidence_id, records[i].evidence_id, best->kind, best->similarity});
        kept = merge_records(kept, records[i], now);
      } else {
        result.log.push_back(MergeLogEntry{records[i].evidence_id, kept.evidence_id, best->kind, best->similarity});
        kept = merge_records(records[i], kept, now);
      }
      active_index[best_pos] = index_record(kept, encoder);
    }
    records = std::move(active);
    index = std::move(active_index);
    if (merges == 0) break;
  }
  result.records = std::move(records);
  return result;
}

std::string merge_log_csv(std::span<const MergeLogEntry> log) {
  std::string out = "canonical_id,absorbed_id,match_kind,similarity\n";
  for (const auto& e : log) {
    out += fmt::format("{},{},{},{:.6f}\n", e.canonical_id, e.absorbed_id, to_string(e.kind), e.similarity);
  }
  return out;
}

}  // namespace forge
