#include "forge/relate.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/lexicon_embedded.hpp"
#include "forge/serialize.hpp"
#include "forge/text.hpp"

namespace forge {

PolarityLexicon PolarityLexicon::parse(std::string_view tsv) {
  std::map<std::string, int> markers;
  std::size_t line_no = 0;
  for (auto line : text::split(tsv, '\n')) {
    ++line_no;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = text::split(t, '\t');
    if (cols.size() < 2) fail(ErrorCode::ParseError, fmt::format("lexicon line {}: expected marker and polarity", line_no));
    auto sign = text::trim(cols[1]);
    int value = sign == "+1" || sign == "1" ? 1 : sign == "-1" ? -1 : 0;
    if (value == 0) fail(ErrorCode::ParseError, fmt::format("lexicon line {}: polarity must be +1 or -1", line_no));
    markers[text::to_lower(text::trim(cols[0]))] = value;
  }
  return PolarityLexicon(std::move(markers));
}

PolarityLexicon PolarityLexicon::defaults() {
  static const PolarityLexicon lexicon = parse(forge::embedded::polarity_lexicon);
  return lexicon;
}

PolarityLexicon load_polarity_lexicon(const std::filesystem::path& path) {
  return PolarityLexicon::parse(read_text_file(path));
}

int PolarityLexicon::polarity(std::string_view s) const {
  static const std::set<std::string> negations{"not", "no", "without", "failed", "nor"};
  auto tokens = text::word_tokens(s);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = markers_.find(tokens[i]);
    if (it == markers_.end()) continue;
    bool negated = (i >= 1 && negations.count(tokens[i - 1])) || (i >= 2 && negations.count(tokens[i - 2]));
    return negated ? -it->second : it->second;
  }
  return 0;
}

std::vector<std::string> content_terms(std::string_view s, const PolarityLexicon& lexicon) {
  static const std::set<std::string> stop{
      "a",     "an",   "the",  "of",   "in",      "on",     "and",   "or",     "to",   "with", "by",
      "for",   "at",   "from", "as",   "was",     "were",   "is",    "are",    "be",   "been", "that",
      "this",  "these", "its", "their", "via",    "through", "than", "treatment", "significantly", "markedly",
      "cells", "cell", "not",  "no",   "compared", "versus", "vs",   "group",  "levels", "level", "expression"};
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& t : text::word_tokens(s)) {
    if (stop.count(t) || lexicon.is_marker(t)) continue;
    if (seen.insert(t).second) out.push_back(std::move(t));
  }
  return out;
}

namespace {

const std::string& or_empty(const std::optional<std::string>& s) {
  static const std::string empty;
  return s ? *s : empty;
}

std::string phenotype_text(const CandidateEvidence& e) {
  if (e.phenotype) return *e.phenotype;
  if (e.outcome_metrics) return *e.outcome_metrics;
  return e.source_text;
}

double term_overlap(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  return jaccard(a, b);
}

// Share of `terms` that occur in `pool`.
double coverage(const std::vector<std::string>& terms, const std::vector<std::string>& pool) {
  if (terms.empty()) return 0.0;
  std::set<std::string> p(pool.begin(), pool.end());
  std::size_t hit = 0;
  for (const auto& t : terms) hit += p.count(t);
  return static_cast<double>(hit) / static_cast<double>(terms.size());
}

bool adds_detail(const CandidateEvidence& x, const CandidateEvidence& y) {
  bool comparison = x.comparison.has_value() != y.comparison.has_value();
  bool stage = (x.clinical_stage == ClinicalStage::Unknown) != (y.clinical_stage == ClinicalStage::Unknown);
  return comparison || stage;
}

bool introduces_entities(const EvidenceRecord& source, const EvidenceRecord& target) {
  std::set<std::string> known(target.linked_entities.begin(), target.linked_entities.end());
  return std::any_of(source.linked_entities.begin(), source.linked_entities.end(),
                     [&](const auto& id) { return !known.count(id); });
}

}  // namespace

std::vector<CandidatePair> candidate_pairs(std::span<const EvidenceRecord> records, const TextEncoder& encoder,
                                           const RelationParams& params) {
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto x, auto y) { return records[x].evidence_id < records[y].evidence_id; });
  std::vector<Embedding> emb;
  emb.reserve(records.size());
  for (auto i : order) emb.push_back(encoder.encode(combined_text(records[i].evidence)));

  std::vector<CandidatePair> out;
  for (std::size_t x = 0; x < order.size(); ++x) {
    const auto& a = records[order[x]];
    for (std::size_t y = x + 1; y < order.size(); ++y) {
      const auto& b = records[order[y]];
      if (a.doc_id == b.doc_id) continue;
      if (jaccard(a.linked_entities, b.linked_entities) < params.overlap_min) continue;
      double sim = cosine(emb[x], emb[y]);
      if (sim < params.sim_min) continue;
      out.push_back(CandidatePair{a.evidence_id, b.evidence_id, std::clamp(sim, 0.0, 1.0)});
    }
  }
  return out;
}

RelationProposal heuristic_relation(const EvidenceRecord& a, const EvidenceRecord& b, double similarity,
                                    const PolarityLexicon& lexicon, const RelationParams& params) {
  if (!a.source.year) fail(ErrorCode::MissingYear, a.evidence_id + " has no publication year");
  if (!b.source.year) fail(ErrorCode::MissingYear, b.evidence_id + " has no publication year");
  bool a_is_source = *a.source.year != *b.source.year ? *a.source.year > *b.source.year : a.evidence_id > b.evidence_id;
  const auto& src = a_is_source ? a : b;
  const auto& tgt = a_is_source ? b : a;
  const auto& s = src.evidence;
  const auto& t = tgt.evidence;

  auto s_int = content_terms(or_empty(s.intervention), lexicon);
  auto t_int = content_terms(or_empty(t.intervention), lexicon);
  auto s_phen = content_terms(phenotype_text(s), lexicon);
  auto t_phen = content_terms(phenotype_text(t), lexicon);
  auto s_mech = content_terms(or_empty(s.bio_mechanism), lexicon);
  auto t_mech = content_terms(or_empty(t.bio_mechanism), lexicon);
  const bool same_int = term_overlap(s_int, t_int) >= params.same_term_min;
  const bool same_phen = term_overlap(s_phen, t_phen) >= params.same_term_min;
  const bool same_mech = term_overlap(s_mech, t_mech) >= params.same_term_min;
  const int ps = lexicon.polarity(phenotype_text(s));
  const int pt = lexicon.polarity(phenotype_text(t));

  RelationProposal p{src.evidence_id, tgt.evidence_id, RelationType::Supports, 0.0, {}};
  auto set = [&](RelationType type, double confidence, std::string why) {
    p.relation_type = type;
    p.confidence = confidence;
    p.rationale = std::move(why);
    return p;
  };

  if (same_int && same_phen && ps != 0 && pt != 0 && ps == -pt) {
    return set(RelationType::Contradicts, 0.7, "Opposite outcome direction for a shared intervention and phenotype.");
  }
  if (same_int && same_phen && ps == pt && src.doc_id != tgt.doc_id && s.study_design == t.study_design) {
    return set(RelationType::Replicates, 0.85, "Same intervention, phenotype direction and study design in another paper.");
  }
  if (same_int && same_phen && similarity >= params.refine_cut && adds_detail(s, t)) {
    return set(RelationType::Refines, 0.75, "Same finding with added comparison or stage detail.");
  }
  std::vector<std::string> s_cause = s_int, t_cause = t_int;
  s_cause.insert(s_cause.end(), s_mech.begin(), s_mech.end());
  t_cause.insert(t_cause.end(), t_mech.begin(), t_mech.end());
  if (coverage(s_phen, t_cause) >= params.same_term_min || coverage(t_phen, s_cause) >= params.same_term_min) {
    return set(RelationType::CausalChain, 0.55, "The outcome of one finding is the driver of the other.");
  }
  if ((same_int || same_mech) && introduces_entities(src, tgt)) {
    return set(RelationType::Extends, 0.7, "Shared intervention or mechanism with newly involved entities.");
  }
  bool agree = ps != 0 && ps == pt;
  return set(RelationType::Supports, agree ? 0.8 : 0.5,
             agree ? "Consistent outcome direction on overlapping evidence." : "Overlapping evidence without a conflict.");
}

bool needs_verification(const RelationProposal& p, double similarity, const RelationParams& params) {
  return p.confidence < params.verify_cut || similarity >= params.high_sim_cut;
}

RelationEdge to_edge(const RelationProposal& p, double similarity, std::string_view now) {
  return RelationEdge{p.source_id,   p.target_id, p.relation_type,        std::clamp(similarity, 0.0, 1.0),
                      p.confidence,  p.rationale, std::string(now),       RelationOrigin::Heuristic};
}

RelationEdge verify_relation(const EvidenceRecord& a, const EvidenceRecord& b, const RelationProposal& proposal,
                             double similarity, LlmBackend& backend, std::string_view now) {
  auto edge = to_edge(proposal, similarity, now);
  auto entities = [](const EvidenceRecord& r) {
    std::string out;
    for (const auto& e : r.core_entities) out += (out.empty() ? "" : ", ") + e.canonical_name.value_or(e.raw_name);
    return out.empty() ? std::string("none") : out;
  };
  auto field = [](const std::optional<std::string>& s) { return s ? *s : std::string("not stated"); };
  auto year = [](const EvidenceRecord& r) { return r.source.year ? std::to_string(*r.source.year) : "unknown"; };
  auto tmpl = prompts::get(prompts::Id::Relation);
  auto user = prompts::render(tmpl.user, {{"A_INTERVENTION", field(a.evidence.intervention)},
                                          {"A_MECHANISM", field(a.evidence.bio_mechanism)},
                                          {"A_PHENOTYPE", field(a.evidence.phenotype)},
                                          {"A_DESIGN", std::string(to_string(a.evidence.study_design))},
                                          {"A_YEAR", year(a)},
                                          {"A_ENTITIES", entities(a)},
                                          {"B_INTERVENTION", field(b.evidence.intervention)},
                                          {"B_MECHANISM", field(b.evidence.bio_mechanism)},
                                          {"B_PHENOTYPE", field(b.evidence.phenotype)},
                                          {"B_DESIGN", std::string(to_string(b.evidence.study_design))},
                                          {"B_YEAR", year(b)},
                                          {"B_ENTITIES", entities(b)},
                                          {"RULE_RELATION", std::string(to_string(proposal.relation_type))}});
  auto fallback = [&](const std::string& why) {
    edge.rationale = proposal.rationale + " (verification failed: " + why + ")";
    return edge;
  };
  std::string raw;
  try {
    raw = complete_with_retry(backend, tmpl.system, user);
  } catch (const Error& e) {
    return fallback(e.what());
  }
  Json parsed;
  try {
    parsed = Json::parse(strip_code_fence(raw));
  } catch (const Json::exception&) {
    return fallback("response is not JSON");
  }
  if (!parsed.is_object() || !parsed.contains("relation_type") || !parsed["relation_type"].is_string()) {
    return fallback("no relation_type");
  }
  auto type = parse_relation_type(parsed["relation_type"].get<std::string>());
  if (!type) return fallback("relation_type '" + parsed["relation_type"].get<std::string>() + "' is not allowed");
  edge.relation_type = *type;
  edge.origin = RelationOrigin::Verified;
  if (parsed.contains("confidence") && parsed["confidence"].is_number()) {
    edge.confidence = std::clamp(parsed["confidence"].get<double>(), 0.0, 1.0);
  }
  if (parsed.contains("rationale") && parsed["rationale"].is_string()) edge.rationale = parsed["rationale"].get<std::string>();
  return edge;
}

bool edge_less(const RelationEdge& x, const RelationEdge& y) {
  if (x.source_id != y.source_id) return x.source_id < y.source_id;
  if (x.target_id != y.target_id) return x.target_id < y.target_id;
  return x.relation_type < y.relation_type;
}

std::vector<RelationEdge> relate_records(std::vector<EvidenceRecord>& records, const TextEncoder& encoder,
                                         const PolarityLexicon& lexicon, const RelationParams& params,
                                         LlmBackend* verifier, std::string_view now, RelateReport* report) {
  std::map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < records.size(); ++i) by_id[records[i].evidence_id] = i;
  RelateReport local;
  std::vector<RelationEdge> edges;
  for (const auto& pair : candidate_pairs(records, encoder, params)) {
    ++local.pairs;
    const auto& a = records[by_id.at(pair.id_a)];
    const auto& b = records[by_id.at(pair.id_b)];
    auto proposal = heuristic_relation(a, b, pair.similarity, lexicon, params);
    if (verifier && needs_verification(proposal, pair.similarity, params)) {
      const auto& src = proposal.source_id == a.evidence_id ? a : b;
      const auto& tgt = proposal.source_id == a.evidence_id ? b : a;
      auto edge = verify_relation(src, tgt, proposal, pair.similarity, *verifier, now);
      (edge.origin == RelationOrigin::Verified ? local.verified : local.verification_fallbacks)++;
      edges.push_back(std::move(edge));
    } else {
      edges.push_back(to_edge(proposal, pair.similarity, now));
    }
  }
  std::sort(edges.begin(), edges.end(), edge_less);
  for (auto& r : records) r.evidence_relations.clear();
  for (const auto& e : edges) records[by_id.at(e.source_id)].evidence_relations.push_back(e);
  if (report) *report = local;
  return edges;
}

}  // namespace forge
