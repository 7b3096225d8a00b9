#include "forge/serialize.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

void note_unknown(const Json& j, std::initializer_list<std::string_view> known, std::string_view prefix,
                  UnknownFields* unknown) {
  if (!unknown || !j.is_object()) return;
  for (const auto& [key, _] : j.items()) {
    bool found = false;
    for (auto k : known) found = found || k == key;
    if (!found) unknown->push_back(prefix.empty() ? key : std::string(prefix) + "." + key);
  }
}

const Json* field(const Json& j, std::string_view key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

std::optional<std::string> opt_string(const Json& j, std::string_view key) {
  const Json* f = field(j, key);
  if (!f) return std::nullopt;
  if (f->is_string()) return f->get<std::string>();
  if (f->is_number()) return f->dump();
  fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be a string");
}

std::optional<double> opt_number(const Json& j, std::string_view key) {
  const Json* f = field(j, key);
  if (!f) return std::nullopt;
  if (f->is_number()) return f->get<double>();
  if (f->is_string()) {
    try {
      std::size_t used = 0;
      auto s = text::trim(f->get<std::string>());
      double v = std::stod(s, &used);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be a number");
}

std::optional<long long> opt_integer(const Json& j, std::string_view key) {
  auto v = opt_number(j, key);
  if (!v) return std::nullopt;
  auto i = static_cast<long long>(*v);
  if (static_cast<double>(i) != *v) fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be an integer");
  return i;
}

std::string req_string(const Json& j, std::string_view key) {
  auto v = opt_string(j, key);
  if (!v) fail(ErrorCode::SchemaViolation, "missing field '" + std::string(key) + "'");
  return *v;
}

std::vector<std::string> string_list(const Json& j, std::string_view key) {
  std::vector<std::string> out;
  const Json* f = field(j, key);
  if (!f) return out;
  if (!f->is_array()) fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must be a list");
  for (const auto& x : *f) {
    if (x.is_string()) out.push_back(x.get<std::string>());
    else if (x.is_object() && x.contains("id") && x["id"].is_string()) out.push_back(x["id"].get<std::string>());
    else fail(ErrorCode::SchemaViolation, "field '" + std::string(key) + "' must hold strings");
  }
  return out;
}

}  // namespace

Json meta_to_json(const DocumentMeta& m) {
  Json j;
  j["doi"] = opt(m.doi);
  j["title"] = opt(m.title);
  j["authors"] = m.authors ? Json(*m.authors) : Json(nullptr);
  j["journal"] = opt(m.journal);
  j["year"] = opt(m.year);
  j["citation_count"] = opt(m.citation_count);
  j["impact_factor"] = opt(m.impact_factor);
  j["quartile"] = m.quartile ? Json(std::string(to_string(*m.quartile))) : Json(nullptr);
  j["path"] = opt(m.path);
  return j;
}

DocumentMeta meta_from_json(const Json& j, UnknownFields* unknown) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "metadata must be a JSON object");
  DocumentMeta m;
  m.doi = opt_string(j, "doi");
  m.title = opt_string(j, "title");
  if (const Json* a = field(j, "authors")) {
    if (a->is_string()) m.authors = std::vector<std::string>{a->get<std::string>()};
    else m.authors = string_list(j, "authors");
  }
  m.journal = opt_string(j, "journal");
  if (auto y = opt_integer(j, "year")) {
    if (*y < 1900 || *y > 2100) fail(ErrorCode::OutOfRange, "publication year outside [1900, 2100]");
    m.year = static_cast<int>(*y);
  }
  m.citation_count = opt_integer(j, "citation_count");
  if (m.citation_count && *m.citation_count < 0) fail(ErrorCode::OutOfRange, "negative citation_count");
  m.impact_factor = opt_number(j, "impact_factor");
  if (m.impact_factor && *m.impact_factor < 0) fail(ErrorCode::OutOfRange, "negative impact_factor");
  if (auto q = opt_string(j, "quartile")) {
    m.quartile = parse_quartile(*q);
    if (!m.quartile) fail(ErrorCode::SchemaViolation, "quartile must be one of Q1..Q4");
  }
  m.path = opt_string(j, "path");
  note_unknown(j,
               {"doi", "title", "authors", "journal", "year", "citation_count", "impact_factor", "quartile", "path",
                "doc_id", "sections"},
               "", unknown);
  return m;
}

Json document_to_json(const Document& doc) {
  Json j = meta_to_json(doc.meta);
  j["doc_id"] = doc.doc_id;
  Json sections = Json::array();
  for (const auto& s : doc.sections) {
    sections.push_back({{"label", to_string(s.label)}, {"heading", s.heading}, {"text", s.text}});
  }
  j["sections"] = std::move(sections);
  return j;
}

Document document_from_json(const Json& j) {
  Document doc;
  doc.meta = meta_from_json(j);
  doc.doc_id = req_string(j, "doc_id");
  if (const Json* s = field(j, "sections")) {
    for (const auto& item : *s) {
      auto label = parse_section_label(req_string(item, "label"));
      if (!label) fail(ErrorCode::SchemaViolation, "unknown section label");
      doc.sections.push_back(Section{*label, opt_string(item, "heading").value_or(""), req_string(item, "text")});
    }
  }
  return doc;
}

Json chunk_to_json(const Chunk& c) {
  return {{"doc_id", c.doc_id},         {"index", c.index},
          {"section", to_string(c.section_label)}, {"start_offset", c.start_offset},
          {"end_offset", c.end_offset}, {"text", c.text}};
}

Json entity_link_to_json(const EntityLink& l) {
  return {{"raw_name", l.raw_name},
          {"semantic_type", to_string(l.semantic_type)},
          {"concept_id", opt(l.concept_id)},
          {"canonical_name", opt(l.canonical_name)},
          {"source_db", opt(l.source_db)},
          {"link_score", l.link_score},
          {"method", to_string(l.method)}};
}

Json score_to_json(const QualityScore& s) {
  return {{"type_score", s.s_type},
          {"impact_score", s.s_impact},
          {"statistics_score", s.s_stat},
          {"sample_size_score", s.s_sample},
          {"llm_confidence", s.llm_confidence},
          {"composite_score", s.composite},
          {"grade", to_string(s.grade)}};
}

Json relation_to_json(const RelationEdge& e) {
  return {{"source_id", e.source_id},
          {"target_id", e.target_id},
          {"relation_type", to_string(e.relation_type)},
          {"similarity", e.similarity},
          {"confidence", e.confidence},
          {"rationale", e.rationale},
          {"created_at", e.created_at},
          {"origin", to_string(e.origin)}};
}

RelationEdge relation_from_json(const Json& j) {
  RelationEdge e;
  e.source_id = opt_string(j, "source_id").value_or(opt_string(j, "source").value_or(""));
  e.target_id = opt_string(j, "target_id").value_or(opt_string(j, "target").value_or(""));
  if (e.source_id.empty() || e.target_id.empty()) fail(ErrorCode::SchemaMismatch, "relation without endpoints");
  auto type_name = opt_string(j, "relation_type").value_or(opt_string(j, "type").value_or(""));
  auto type = parse_relation_type(type_name);
  if (!type) fail(ErrorCode::SchemaMismatch, "unknown relation type '" + type_name + "'");
  e.relation_type = *type;
  e.similarity = opt_number(j, "similarity").value_or(0.0);
  e.confidence = opt_number(j, "confidence").value_or(0.0);
  e.rationale = opt_string(j, "rationale").value_or("");
  e.created_at = opt_string(j, "created_at").value_or(opt_string(j, "timestamp").value_or(""));
  if (auto o = opt_string(j, "origin")) e.origin = parse_relation_origin(*o).value_or(RelationOrigin::Heuristic);
  return e;
}

Json candidate_to_json(const CandidateEvidence& c) {
  Json entities = Json::array();
  for (const auto& e : c.core_entities) {
    entities.push_back({{"name", e.raw_name}, {"type", to_string(e.semantic_type)}});
  }
  Json j{{"study_object", opt(c.study_object)},
         {"intervention", opt(c.intervention)},
         {"comparison", opt(c.comparison)},
         {"outcome_metrics", opt(c.outcome_metrics)},
         {"core_entities", std::move(entities)},
         {"bio_mechanism", opt(c.bio_mechanism)},
         {"phenotype", opt(c.phenotype)},
         {"study_design", to_string(c.study_design)},
         {"clinical_stage", to_string(c.clinical_stage)},
         {"p_value", opt(c.p_value)},
         {"sample_size", opt(c.sample_size)},
         {"fold_change", opt(c.fold_change)},
         {"experimental_context", c.experimental_context},
         {"source_text", c.source_text},
         {"extraction_confidence", c.extraction_confidence},
         {"origin",
          {{"doc_id", c.origin.doc_id},
           {"chunk_index", c.origin.chunk_index},
           {"section", to_string(c.origin.section_label)}}}};
  if (c.conflict_note) j["conflict_note"] = *c.conflict_note;
  return j;
}

CandidateEvidence candidate_from_json(const Json& j, std::vector<std::string>* warnings) {
  if (!j.is_object()) fail(ErrorCode::SchemaViolation, "evidence item must be a JSON object");
  auto warn = [&](std::string msg) {
    if (warnings) warnings->push_back(std::move(msg));
  };
  CandidateEvidence c;
  c.study_object = opt_string(j, "study_object");
  c.intervention = opt_string(j, "intervention");
  c.comparison = opt_string(j, "comparison");
  c.outcome_metrics = opt_string(j, "outcome_metrics");
  c.bio_mechanism = opt_string(j, "bio_mechanism");
  c.phenotype = opt_string(j, "phenotype");

  if (const Json* ents = field(j, "core_entities")) {
    if (!ents->is_array()) fail(ErrorCode::SchemaViolation, "core_entities must be a list");
    for (const auto& e : *ents) {
      RawEntity raw;
      std::optional<std::string> type_name;
      if (e.is_string()) {
        raw.raw_name = e.get<std::string>();
      } else if (e.is_object()) {
        auto name = opt_string(e, "name");
        if (!name) name = opt_string(e, "raw_name");
        if (!name) name = opt_string(e, "entity");
        if (!name) fail(ErrorCode::SchemaViolation, "core entity without a name");
        raw.raw_name = *name;
        type_name = opt_string(e, "type");
        if (!type_name) type_name = opt_string(e, "semantic_type");
      } else {
        fail(ErrorCode::SchemaViolation, "core_entities items must be strings or objects");
      }
      if (text::trim(raw.raw_name).empty()) continue;
      if (type_name) {
        auto t = parse_semantic_type(*type_name);
        if (!t) warn("semantic_type '" + *type_name + "' mapped to Other");
        raw.semantic_type = t.value_or(SemanticType::Other);
      }
      c.core_entities.push_back(std::move(raw));
    }
  }

  if (auto d = opt_string(j, "study_design")) {
    auto v = parse_study_design(*d);
    if (!v) warn("study_design '" + *d + "' mapped to unknown");
    c.study_design = v.value_or(StudyDesign::Unknown);
  }
  if (auto s = opt_string(j, "clinical_stage")) {
    auto v = parse_clinical_stage(*s);
    if (!v) warn("clinical_stage '" + *s + "' mapped to unknown");
    c.clinical_stage = v.value_or(ClinicalStage::Unknown);
  }

  c.p_value = opt_number(j, "p_value");
  if (c.p_value && !(*c.p_value > 0.0 && *c.p_value <= 1.0)) fail(ErrorCode::SchemaViolation, "p_value outside (0, 1]");
  c.sample_size = opt_integer(j, "sample_size");
  if (c.sample_size && *c.sample_size < 1) fail(ErrorCode::SchemaViolation, "sample_size must be positive");
  c.fold_change = opt_number(j, "fold_change");
  if (c.fold_change && !(*c.fold_change > 0.0)) fail(ErrorCode::SchemaViolation, "fold_change must be positive");

  c.experimental_context = opt_string(j, "experimental_context").value_or("");
  c.source_text = opt_string(j, "source_text").value_or("");
  if (text::trim(c.source_text).empty()) fail(ErrorCode::SchemaViolation, "source_text is required");
  c.extraction_confidence = opt_number(j, "extraction_confidence").value_or(0.0);
  if (!(c.extraction_confidence >= 0.0 && c.extraction_confidence <= 1.0)) {
    fail(ErrorCode::SchemaViolation, "extraction_confidence outside [0, 1]");
  }
  c.conflict_note = opt_string(j, "conflict_note");

  if (const Json* o = field(j, "origin")) {
    c.origin.doc_id = opt_string(*o, "doc_id").value_or("");
    c.origin.chunk_index = static_cast<std::size_t>(opt_integer(*o, "chunk_index").value_or(0));
    c.origin.section_label = parse_section_label(opt_string(*o, "section").value_or("other")).value_or(SectionLabel::Other);
  }
  return c;
}

Json record_to_json(const EvidenceRecord& r) {
  const auto& e = r.evidence;
  Json source = meta_to_json(r.source);
  source["doc_id"] = r.doc_id;
  Json entities = Json::array();
  for (const auto& l : r.core_entities) entities.push_back(entity_link_to_json(l));
  Json relations = Json::array();
  for (const auto& rel : r.evidence_relations) relations.push_back(relation_to_json(rel));
  Json j{{"evidence_id", r.evidence_id},
         {"disease", r.disease},
         {"source", std::move(source)},
         {"pico",
          {{"study_object", opt(e.study_object)},
           {"intervention", opt(e.intervention)},
           {"comparison", opt(e.comparison)},
           {"outcome_metrics", opt(e.outcome_metrics)}}},
         {"core_entities", std::move(entities)},
         {"bio_mechanism", opt(e.bio_mechanism)},
         {"phenotype", opt(e.phenotype)},
         {"study_design", to_string(e.study_design)},
         {"clinical_stage", to_string(e.clinical_stage)},
         {"statistics",
          {{"p_value", opt(e.p_value)}, {"fold_change", opt(e.fold_change)}, {"sample_size", opt(e.sample_size)}}},
         {"score", score_to_json(r.score)},
         {"source_text", e.source_text},
         {"experimental_context", e.experimental_context},
         {"extraction_confidence", e.extraction_confidence},
         {"conflict_note", opt(e.conflict_note)},
         {"origin",
          {{"doc_id", e.origin.doc_id},
           {"chunk_index", e.origin.chunk_index},
           {"section", to_string(e.origin.section_label)}}},
         {"linked_entities", r.linked_entities},
         {"evidence_relations", std::move(relations)},
         {"merged_from", r.merged_from},
         {"review_status", to_string(r.review_status)},
         {"created_at", r.created_at},
         {"updated_at", r.updated_at},
         {"version", r.version}};
  return j;
}

EvidenceRecord record_from_json(const Json& j, UnknownFields* unknown) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "evidence record must be a JSON object");
  EvidenceRecord r;
  r.evidence_id = req_string(j, "evidence_id");
  r.disease = opt_string(j, "disease").value_or("");
  auto& e = r.evidence;
  if (const Json* s = field(j, "source")) {
    UnknownFields ignored;
    r.source = meta_from_json(*s, &ignored);
    r.doc_id = opt_string(*s, "doc_id").value_or("");
  }
  if (const Json* p = field(j, "pico")) {
    e.study_object = opt_string(*p, "study_object");
    e.intervention = opt_string(*p, "intervention");
    e.comparison = opt_string(*p, "comparison");
    e.outcome_metrics = opt_string(*p, "outcome_metrics");
  }
  if (const Json* ents = field(j, "core_entities")) {
    for (const auto& x : *ents) {
      EntityLink l;
      if (x.is_string()) {
        l.raw_name = x.get<std::string>();
      } else {
        l.raw_name = opt_string(x, "raw_name").value_or(opt_string(x, "name").value_or(""));
        if (auto t = opt_string(x, "semantic_type")) l.semantic_type = parse_semantic_type(*t).value_or(SemanticType::Other);
        l.concept_id = opt_string(x, "concept_id");
        if (!l.concept_id) l.concept_id = opt_string(x, "normalized_id");
        l.canonical_name = opt_string(x, "canonical_name");
        l.source_db = opt_string(x, "source_db");
        l.link_score = opt_number(x, "link_score").value_or(l.concept_id ? 1.0 : 0.0);
        auto method = opt_string(x, "method");
        l.method = method ? parse_link_method(*method).value_or(LinkMethod::Exact)
                          : (l.concept_id ? LinkMethod::Exact : LinkMethod::Unlinked);
      }
      e.core_entities.push_back(RawEntity{l.raw_name, l.semantic_type});
      r.core_entities.push_back(std::move(l));
    }
  }
  e.bio_mechanism = opt_string(j, "bio_mechanism");
  e.phenotype = opt_string(j, "phenotype");
  if (auto d = opt_string(j, "study_design")) e.study_design = parse_study_design(*d).value_or(StudyDesign::Unknown);
  if (auto s = opt_string(j, "clinical_stage")) {
    e.clinical_stage = parse_clinical_stage(*s).value_or(ClinicalStage::Unknown);
  }
  if (const Json* st = field(j, "statistics")) {
    e.p_value = opt_number(*st, "p_value");
    e.fold_change = opt_number(*st, "fold_change");
    if (auto n = opt_number(*st, "sample_size")) e.sample_size = static_cast<long long>(*n);
  }
  if (const Json* sc = field(j, "score")) {
    auto& s = r.score;
    s.s_type = opt_number(*sc, "type_score").value_or(0.0);
    s.s_impact = opt_number(*sc, "impact_score").value_or(0.0);
    s.s_stat = opt_number(*sc, "statistics_score").value_or(0.0);
    s.s_sample = opt_number(*sc, "sample_size_score").value_or(0.0);
    s.llm_confidence = opt_number(*sc, "llm_confidence").value_or(0.0);
    s.composite = opt_number(*sc, "composite_score").value_or(opt_number(*sc, "composite").value_or(0.0));
    auto g = opt_string(*sc, "grade");
    if (!g) g = opt_string(*sc, "grade_level");
    s.grade = g ? parse_grade(*g).value_or(Grade::D) : Grade::D;
  }
  e.source_text = opt_string(j, "source_text").value_or("");
  e.experimental_context = opt_string(j, "experimental_context").value_or("");
  e.extraction_confidence = opt_number(j, "extraction_confidence").value_or(r.score.llm_confidence);
  e.conflict_note = opt_string(j, "conflict_note");
  if (const Json* o = field(j, "origin")) {
    e.origin.doc_id = opt_string(*o, "doc_id").value_or("");
    e.origin.chunk_index = static_cast<std::size_t>(opt_integer(*o, "chunk_index").value_or(0));
    e.origin.section_label = parse_section_label(opt_string(*o, "section").value_or("other")).value_or(SectionLabel::Other);
  }
  if (r.doc_id.empty()) r.doc_id = e.origin.doc_id;
  if (e.origin.doc_id.empty()) e.origin.doc_id = r.doc_id;
  r.linked_entities = string_list(j, "linked_entities");
  if (const Json* rels = field(j, "evidence_relations")) {
    for (const auto& x : *rels) {
      if (x.is_object()) r.evidence_relations.push_back(relation_from_json(x));
    }
  }
  r.merged_from = string_list(j, "merged_from");
  if (auto rs = opt_string(j, "review_status")) r.review_status = parse_review_status(*rs).value_or(ReviewStatus::Pending);
  r.created_at = opt_string(j, "created_at").value_or("");
  r.updated_at = opt_string(j, "updated_at").value_or(r.created_at);
  r.version = static_cast<int>(opt_integer(j, "version").value_or(1));
  note_unknown(j,
               {"evidence_id", "disease", "source", "pico", "core_entities", "bio_mechanism", "phenotype",
                "study_design", "clinical_stage", "statistics", "score", "source_text", "experimental_context",
                "extraction_confidence", "conflict_note", "origin", "linked_entities", "evidence_relations",
                "merged_from", "review_status", "created_at", "updated_at", "version"},
               "", unknown);
  return r;
}

Json records_to_json(const std::vector<EvidenceRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) arr.push_back(record_to_json(r));
  return arr;
}

std::vector<EvidenceRecord> records_from_json(const Json& j, UnknownFields* unknown) {
  const Json* arr = &j;
  if (j.is_object()) {
    for (auto key : {"records", "evidence", "evidence_records"}) {
      if (j.contains(key) && j[key].is_array()) {
        arr = &j[key];
        break;
      }
    }
  }
  if (!arr->is_array()) fail(ErrorCode::ParseError, "records file must hold a JSON array");
  std::vector<EvidenceRecord> out;
  out.reserve(arr->size());
  std::set<std::string> seen_unknown;
  for (const auto& item : *arr) {
    UnknownFields local;
    out.push_back(record_from_json(item, &local));
    if (unknown) {
      for (auto& f : local)
        if (seen_unknown.insert(f).second) unknown->push_back(f);
    }
  }
  return out;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::filesystem::path& path) {
  auto content = read_text_file(path);
  try {
    return Json::parse(content);
  } catch (const Json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace forge
