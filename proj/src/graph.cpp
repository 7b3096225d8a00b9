#include "forge/graph.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

#include "forge/error.hpp"
#include "forge/relate.hpp"
#include "forge/score.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

constexpr std::string_view kLinkedTo = "LINKED_TO";

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

const Json* pick(const Json& j, std::initializer_list<const char*> keys) {
  for (auto k : keys) {
    auto it = j.find(k);
    if (it != j.end() && !it->is_null()) return &*it;
  }
  return nullptr;
}

std::optional<std::string> pick_string(const Json& j, std::initializer_list<const char*> keys) {
  const Json* v = pick(j, keys);
  if (!v) return std::nullopt;
  if (v->is_string()) return v->get<std::string>();
  if (v->is_number_integer()) return std::to_string(v->get<long long>());
  if (v->is_number()) return v->dump();
  fail(ErrorCode::SchemaMismatch, std::string("field '") + *keys.begin() + "' must be a string");
}

std::optional<double> pick_number(const Json& j, std::initializer_list<const char*> keys) {
  const Json* v = pick(j, keys);
  if (!v) return std::nullopt;
  if (v->is_number()) return v->get<double>();
  if (v->is_string()) {
    try {
      return std::stod(v->get<std::string>());
    } catch (const std::exception&) {
    }
  }
  fail(ErrorCode::SchemaMismatch, std::string("field '") + *keys.begin() + "' must be a number");
}

Json extra_fields(const Json& j, std::initializer_list<const char*> known) {
  Json extra = Json::object();
  for (const auto& [k, v] : j.items()) {
    bool is_known = false;
    for (auto name : known) is_known = is_known || k == name;
    if (!is_known) extra[k] = v;
  }
  return extra;
}

void collect_unknown(const Json& extra, std::string_view prefix, std::set<std::string>& out) {
  for (const auto& [k, _] : extra.items()) out.insert(std::string(prefix) + "." + k);
}

// Arrays of objects, or objects keyed by id.
std::vector<Json> items_of(const Json& j, const char* id_key) {
  std::vector<Json> out;
  if (j.is_null()) return out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(x);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      Json x = v.is_object() ? v : Json::object();
      if (!x.contains(id_key)) x[id_key] = k;
      out.push_back(std::move(x));
    }
  } else {
    fail(ErrorCode::SchemaMismatch, "graph section must be a list or an object");
  }
  return out;
}

}  // namespace

bool EvidenceGraph::has_node(std::string_view id) const {
  std::string key(id);
  return evidence_.count(key) || entities_.count(key);
}

EvidenceNode flatten_record(const EvidenceRecord& r) {
  EvidenceNode n;
  n.id = r.evidence_id;
  n.disease = r.disease;
  n.doi = r.source.doi;
  n.title = r.source.title;
  n.journal = r.source.journal;
  n.year = r.source.year;
  n.study_design = std::string(to_string(r.evidence.study_design));
  n.clinical_stage = std::string(to_string(r.evidence.clinical_stage));
  n.bio_mechanism = r.evidence.bio_mechanism;
  n.phenotype = r.evidence.phenotype;
  n.intervention = r.evidence.intervention;
  n.study_object = r.evidence.study_object;
  n.linked_entities = r.linked_entities;
  n.composite_score = r.score.composite;
  n.grade = std::string(to_string(r.score.grade));
  n.source_text = r.evidence.source_text;
  return n;
}

void EvidenceGraph::upsert_evidence_node(EvidenceNode node) {
  if (entities_.count(node.id)) fail(ErrorCode::SchemaMismatch, node.id + " is already an entity node");
  auto id = node.id;
  evidence_[id] = std::move(node);
}

void EvidenceGraph::upsert_evidence(const EvidenceRecord& record) {
  if (record.evidence_id.empty()) fail(ErrorCode::PreconditionViolation, "record without evidence_id");
  upsert_evidence_node(flatten_record(record));
}

void EvidenceGraph::upsert_entity(EntityNode node) {
  if (evidence_.count(node.id)) fail(ErrorCode::SchemaMismatch, node.id + " is already an evidence node");
  auto id = node.id;
  entities_[id] = std::move(node);
}

void EvidenceGraph::upsert_entity_link(std::string_view evidence_id, const EntityLink& link) {
  std::string eid(evidence_id);
  if (!evidence_.count(eid)) fail(ErrorCode::UnknownEvidence, "no evidence node " + eid);
  if (!link.linked() || !link.concept_id) fail(ErrorCode::UnlinkedEntity, "entity '" + link.raw_name + "' is unlinked");
  const auto& cid = *link.concept_id;
  if (!entities_.count(cid)) {
    upsert_entity(EntityNode{cid, link.canonical_name.value_or(link.raw_name),
                             std::string(to_string(link.semantic_type)), link.source_db.value_or(""), Json::object()});
  }
  auto key = std::make_pair(eid, cid);
  LinkedEdge edge{eid, cid, entities_.at(cid).semantic_type, link.link_score};
  if (auto it = link_index_.find(key); it != link_index_.end()) {
    links_[it->second] = std::move(edge);
    return;
  }
  link_index_[key] = links_.size();
  links_.push_back(std::move(edge));
}

void EvidenceGraph::add_relation_edge(const RelationEdge& edge) {
  if (!evidence_.count(edge.source_id)) fail(ErrorCode::UnknownEndpoint, "no evidence node " + edge.source_id);
  if (!evidence_.count(edge.target_id)) fail(ErrorCode::UnknownEndpoint, "no evidence node " + edge.target_id);
  if (edge.source_id == edge.target_id) fail(ErrorCode::SelfLoop, "self-loop on " + edge.source_id);
  auto key = std::make_tuple(edge.source_id, edge.target_id, edge.relation_type);
  if (!relation_keys_.insert(key).second) {
    fail(ErrorCode::DuplicateEdge, edge.source_id + " -> " + edge.target_id + " " + std::string(to_string(edge.relation_type)));
  }
  relations_.push_back(edge);
}

void EvidenceGraph::canonicalize() {
  std::sort(links_.begin(), links_.end(), [](const LinkedEdge& a, const LinkedEdge& b) {
    return std::tie(a.evidence_id, a.concept_id) < std::tie(b.evidence_id, b.concept_id);
  });
  link_index_.clear();
  for (std::size_t i = 0; i < links_.size(); ++i) link_index_[{links_[i].evidence_id, links_[i].concept_id}] = i;
  std::stable_sort(relations_.begin(), relations_.end(), edge_less);
}

EvidenceGraph build_graph(std::span<const EvidenceRecord> records, const GraphMetadata& metadata) {
  EvidenceGraph g;
  g.metadata = metadata;
  for (const auto& r : records) g.upsert_evidence(r);
  for (const auto& r : records) {
    for (const auto& link : r.core_entities)
      if (link.linked()) g.upsert_entity_link(r.evidence_id, link);
  }
  for (const auto& r : records)
    for (const auto& e : r.evidence_relations) g.add_relation_edge(e);
  g.canonicalize();
  return g;
}

Json graph_to_json(const EvidenceGraph& g) {
  Json meta = g.metadata.extra;
  meta["disease"] = g.metadata.disease;
  meta["version"] = g.metadata.version;
  meta["creator"] = g.metadata.creator;
  meta["updated_at"] = g.metadata.updated_at;

  Json evi = Json::array();
  for (const auto& [id, n] : g.evidence()) {
    Json x = n.extra;
    x["id"] = n.id;
    x["disease"] = n.disease;
    x["doi"] = opt(n.doi);
    x["title"] = opt(n.title);
    x["journal"] = opt(n.journal);
    x["year"] = opt(n.year);
    x["study_design"] = n.study_design;
    x["clinical_stage"] = n.clinical_stage;
    x["bio_mechanism"] = opt(n.bio_mechanism);
    x["phenotype"] = opt(n.phenotype);
    x["intervention"] = opt(n.intervention);
    x["study_object"] = opt(n.study_object);
    x["linked_entities"] = n.linked_entities;
    x["composite_score"] = n.composite_score;
    x["grade"] = opt(n.grade);
    x["source_text"] = n.source_text;
    evi.push_back(std::move(x));
  }
  Json ent = Json::array();
  for (const auto& [id, n] : g.entities()) {
    Json x = n.extra;
    x["id"] = n.id;
    x["name"] = n.canonical_name;
    x["type"] = n.semantic_type;
    x["source_db"] = n.source_db;
    ent.push_back(std::move(x));
  }
  Json links = Json::array();
  for (const auto& l : g.links()) {
    links.push_back({{"source", l.evidence_id},
                     {"target", l.concept_id},
                     {"type", kLinkedTo},
                     {"entity_type", l.entity_type},
                     {"link_score", l.link_score}});
  }
  Json rels = Json::array();
  for (const auto& e : g.relations()) {
    rels.push_back({{"source", e.source_id},
                    {"target", e.target_id},
                    {"type", to_string(e.relation_type)},
                    {"similarity", e.similarity},
                    {"confidence", e.confidence},
                    {"rationale", e.rationale},
                    {"created_at", e.created_at},
                    {"origin", to_string(e.origin)}});
  }
  return Json{{"metadata", std::move(meta)},
              {"evi_node_attr", std::move(evi)},
              {"ent_node_attr", std::move(ent)},
              {"evi_ent_edges", std::move(links)},
              {"evi_evi_edges", std::move(rels)}};
}

EvidenceGraph graph_from_json(const Json& j, UnknownFields* unknown) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "graph file must hold a JSON object");
  EvidenceGraph g;
  std::set<std::string> unknown_set;
  for (const auto& [k, _] : j.items()) {
    if (k != "metadata" && k != "evi_node_attr" && k != "ent_node_attr" && k != "evi_ent_edges" && k != "evi_evi_edges") {
      unknown_set.insert(k);
    }
  }

  if (const Json* m = pick(j, {"metadata"})) {
    g.metadata.disease = pick_string(*m, {"disease", "disease_label"}).value_or("");
    g.metadata.version = pick_string(*m, {"version"}).value_or("");
    g.metadata.creator = pick_string(*m, {"creator"}).value_or("");
    g.metadata.updated_at = pick_string(*m, {"updated_at", "update_time"}).value_or("");
    g.metadata.extra = extra_fields(*m, {"disease", "disease_label", "version", "creator", "updated_at", "update_time"});
    collect_unknown(g.metadata.extra, "metadata", unknown_set);
  }

  static const std::initializer_list<const char*> kEvidenceKeys = {
      "id", "evidence_id", "disease", "doi", "title", "journal", "year", "study_design", "clinical_stage",
      "bio_mechanism", "phenotype", "intervention", "study_object", "linked_entities", "composite_score", "grade",
      "source_text"};
  for (const auto& x : items_of(j.value("evi_node_attr", Json()), "id")) {
    EvidenceNode n;
    auto id = pick_string(x, {"id", "evidence_id"});
    if (!id) fail(ErrorCode::SchemaMismatch, "evidence node without id");
    n.id = *id;
    n.disease = pick_string(x, {"disease"}).value_or("");
    n.doi = pick_string(x, {"doi"});
    n.title = pick_string(x, {"title"});
    n.journal = pick_string(x, {"journal"});
    if (auto y = pick_number(x, {"year"})) n.year = static_cast<int>(*y);
    n.study_design = pick_string(x, {"study_design"}).value_or("unknown");
    n.clinical_stage = pick_string(x, {"clinical_stage"}).value_or("unknown");
    n.bio_mechanism = pick_string(x, {"bio_mechanism"});
    n.phenotype = pick_string(x, {"phenotype"});
    n.intervention = pick_string(x, {"intervention"});
    n.study_object = pick_string(x, {"study_object"});
    if (const Json* le = pick(x, {"linked_entities"})) {
      if (le->is_array()) {
        for (const auto& e : *le)
          if (e.is_string()) n.linked_entities.push_back(e.get<std::string>());
      } else if (le->is_string()) {
        for (auto& part : text::split(le->get<std::string>(), ';')) {
          auto t = text::trim(part);
          if (!t.empty()) n.linked_entities.push_back(t);
        }
      }
    }
    n.composite_score = pick_number(x, {"composite_score"}).value_or(0.0);
    n.grade = pick_string(x, {"grade"});
    n.source_text = pick_string(x, {"source_text"}).value_or("");
    n.extra = extra_fields(x, kEvidenceKeys);
    collect_unknown(n.extra, "evi_node_attr", unknown_set);
    if (g.evidence_.count(n.id)) fail(ErrorCode::SchemaMismatch, "duplicate evidence node " + n.id);
    g.upsert_evidence_node(std::move(n));
  }

  for (const auto& x : items_of(j.value("ent_node_attr", Json()), "id")) {
    EntityNode n;
    auto id = pick_string(x, {"id", "concept_id", "entity_id"});
    if (!id) fail(ErrorCode::SchemaMismatch, "entity node without id");
    n.id = *id;
    n.canonical_name = pick_string(x, {"name", "canonical_name", "entity_name"}).value_or("");
    n.semantic_type = pick_string(x, {"type", "semantic_type", "entity_type"}).value_or("");
    n.source_db = pick_string(x, {"source_db"}).value_or("");
    n.extra = extra_fields(x, {"id", "concept_id", "entity_id", "name", "canonical_name", "entity_name", "type",
                               "semantic_type", "entity_type", "source_db"});
    collect_unknown(n.extra, "ent_node_attr", unknown_set);
    if (g.entities_.count(n.id)) fail(ErrorCode::SchemaMismatch, "duplicate entity node " + n.id);
    g.upsert_entity(std::move(n));
  }

  for (const auto& x : items_of(j.value("evi_ent_edges", Json()), "source")) {
    auto src = pick_string(x, {"source", "source_id", "evidence_id", "from"});
    auto dst = pick_string(x, {"target", "target_id", "concept_id", "entity_id", "to"});
    if (!src || !dst) fail(ErrorCode::SchemaMismatch, "LINKED_TO edge without endpoints");
    if (auto type = pick_string(x, {"type", "relation_type", "relation"}); type && *type != kLinkedTo) {
      fail(ErrorCode::SchemaMismatch, "evidence-entity edge of type '" + *type + "'");
    }
    if (!g.evidence_.count(*src)) fail(ErrorCode::SchemaMismatch, "LINKED_TO from unknown evidence " + *src);
    if (!g.entities_.count(*dst)) fail(ErrorCode::SchemaMismatch, "LINKED_TO to unknown entity " + *dst);
    LinkedEdge e{*src, *dst, pick_string(x, {"entity_type"}).value_or(g.entities_.at(*dst).semantic_type),
                 pick_number(x, {"link_score", "score"}).value_or(0.0)};
    g.link_index_.emplace(std::make_pair(e.evidence_id, e.concept_id), g.links_.size());
    g.links_.push_back(std::move(e));
    auto extra = extra_fields(x, {"source", "source_id", "evidence_id", "from", "target", "target_id", "concept_id",
                                  "entity_id", "to", "type", "relation_type", "relation", "entity_type", "link_score",
                                  "score"});
    collect_unknown(extra, "evi_ent_edges", unknown_set);
  }

  for (const auto& x : items_of(j.value("evi_evi_edges", Json()), "source")) {
    RelationEdge e;
    auto src = pick_string(x, {"source", "source_id", "from"});
    auto dst = pick_string(x, {"target", "target_id", "to"});
    if (!src || !dst) fail(ErrorCode::SchemaMismatch, "relation edge without endpoints");
    auto type_name = pick_string(x, {"type", "relation_type", "relation"}).value_or("");
    auto type = parse_relation_type(type_name);
    if (!type) fail(ErrorCode::SchemaMismatch, "unknown relation type '" + type_name + "'");
    if (!g.evidence_.count(*src) || !g.evidence_.count(*dst)) {
      fail(ErrorCode::SchemaMismatch, "relation edge with dangling endpoint " + *src + " -> " + *dst);
    }
    e.source_id = *src;
    e.target_id = *dst;
    e.relation_type = *type;
    e.similarity = pick_number(x, {"similarity", "similarity_score"}).value_or(0.0);
    e.confidence = pick_number(x, {"confidence"}).value_or(0.0);
    e.rationale = pick_string(x, {"rationale"}).value_or("");
    e.created_at = pick_string(x, {"created_at", "timestamp"}).value_or("");
    if (auto o = pick_string(x, {"origin"})) e.origin = parse_relation_origin(*o).value_or(RelationOrigin::Heuristic);
    g.relation_keys_.insert(std::make_tuple(e.source_id, e.target_id, e.relation_type));
    g.relations_.push_back(std::move(e));
    auto extra = extra_fields(x, {"source", "source_id", "from", "target", "target_id", "to", "type", "relation_type",
                                  "relation", "similarity", "similarity_score", "confidence", "rationale", "created_at",
                                  "timestamp", "origin"});
    collect_unknown(extra, "evi_evi_edges", unknown_set);
  }
  if (unknown) unknown->assign(unknown_set.begin(), unknown_set.end());
  return g;
}

std::string serialize_graph(const EvidenceGraph& g) { return canonical_dump(graph_to_json(g)); }

void save_graph(const EvidenceGraph& g, const std::filesystem::path& path) { write_text_file(path, serialize_graph(g)); }

EvidenceGraph load_graph(const std::filesystem::path& path, UnknownFields* unknown) {
  return graph_from_json(read_json_file(path), unknown);
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

namespace {

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double graph_density(std::size_t nodes, std::size_t edges) {
  if (nodes < 2) return 0.0;
  double n = static_cast<double>(nodes);
  return static_cast<double>(edges) / (n * (n - 1.0));
}

GraphStats compute_stats(const EvidenceGraph& g) {
  GraphStats s;
  s.evidence_count = g.evidence().size();
  s.entity_count = g.entities().size();
  s.total_nodes = g.node_count();
  s.total_edges = g.edge_count();
  s.density = graph_density(s.total_nodes, s.total_edges);
  s.edge_types[std::string(kLinkedTo)] = g.links().size();
  for (auto t : kAllRelationTypes) s.edge_types[std::string(to_string(t))] = 0;
  for (const auto& e : g.relations()) ++s.edge_types[std::string(to_string(e.relation_type))];
  for (const auto& [id, n] : g.entities()) ++s.entity_types[n.semantic_type];

  std::map<std::string, double> linked, related;
  for (const auto& [id, n] : g.evidence()) {
    linked[id] = 0.0;
    related[id] = 0.0;
    ++s.grades[n.grade.value_or("")];
    ++s.study_designs[n.study_design];
    ++s.clinical_stages[n.clinical_stage];
  }
  for (const auto& l : g.links()) linked[l.evidence_id] += 1.0;
  for (const auto& e : g.relations()) related[e.source_id] += 1.0;
  std::vector<double> lv, rv;
  for (const auto& [_, v] : linked) lv.push_back(v);
  for (const auto& [_, v] : related) rv.push_back(v);
  s.avg_linked_entities = mean(lv);
  s.median_linked_entities = median(lv);
  s.avg_relations = mean(rv);
  s.median_relations = median(rv);
  return s;
}

RecordStats compute_record_stats(std::span<const EvidenceRecord> records) {
  RecordStats s;
  s.records = records.size();
  if (records.empty()) return s;
  std::vector<double> core, linked, rels, merged, composite;
  std::size_t with_merge = 0, version_gt1 = 0, with_comparison = 0, with_p = 0;
  double merged_among = 0.0;
  for (const auto& r : records) {
    core.push_back(static_cast<double>(r.core_entities.size()));
    linked.push_back(static_cast<double>(r.linked_entities.size()));
    rels.push_back(static_cast<double>(r.evidence_relations.size()));
    merged.push_back(static_cast<double>(r.merged_from.size()));
    composite.push_back(r.score.composite);
    if (!r.merged_from.empty()) {
      ++with_merge;
      merged_among += static_cast<double>(r.merged_from.size());
    }
    if (r.version > 1) ++version_gt1;
    if (r.evidence.comparison) ++with_comparison;
    if (r.evidence.p_value) ++with_p;
    ++s.grades[std::string(to_string(r.score.grade))];
    if (grade_for(std::clamp(r.score.composite, 0.0, 1.0)) != r.score.grade) ++s.grade_mismatches;
  }
  const double n = static_cast<double>(records.size());
  s.avg_core_entities = mean(core);
  s.median_core_entities = median(core);
  s.avg_linked_entities = mean(linked);
  s.median_linked_entities = median(linked);
  s.avg_relations = mean(rels);
  s.median_relations = median(rels);
  s.avg_merged_all = mean(merged);
  s.avg_merged_among = with_merge ? merged_among / static_cast<double>(with_merge) : 0.0;
  s.share_version_gt1 = 100.0 * static_cast<double>(version_gt1) / n;
  s.avg_composite = mean(composite);
  s.median_composite = median(composite);
  s.min_composite = *std::min_element(composite.begin(), composite.end());
  s.max_composite = *std::max_element(composite.begin(), composite.end());
  s.share_with_comparison = 100.0 * static_cast<double>(with_comparison) / n;
  s.share_with_p_value = 100.0 * static_cast<double>(with_p) / n;
  return s;
}

GraphIndex::GraphIndex(const EvidenceGraph& g) {
  for (const auto& [id, _] : g.evidence()) adj_[id];
  for (const auto& [id, _] : g.entities()) adj_[id];
  for (const auto& l : g.links()) {
    adj_[l.evidence_id].insert(l.concept_id);
    adj_[l.concept_id].insert(l.evidence_id);
  }
  for (const auto& e : g.relations()) {
    adj_[e.source_id].insert(e.target_id);
    adj_[e.target_id].insert(e.source_id);
  }
}

const std::set<std::string>& GraphIndex::neighbors(std::string_view id) const {
  auto it = adj_.find(id);
  if (it == adj_.end()) fail(ErrorCode::UnknownNode, "no node " + std::string(id));
  return it->second;
}

std::set<std::string> neighborhood(const GraphIndex& index, std::string_view node_id, int depth) {
  if (depth < 1) fail(ErrorCode::PreconditionViolation, "neighborhood depth must be >= 1");
  const std::string seed(node_id);
  index.neighbors(seed);
  std::set<std::string> seen{seed};
  std::deque<std::pair<std::string, int>> queue{{seed, 0}};
  while (!queue.empty()) {
    auto [id, d] = queue.front();
    queue.pop_front();
    if (d == depth) continue;
    for (const auto& n : index.neighbors(id)) {
      if (seen.insert(n).second) queue.emplace_back(n, d + 1);
    }
  }
  seen.erase(seed);
  return seen;
}

std::set<std::string> neighborhood(const EvidenceGraph& g, std::string_view node_id, int depth) {
  return neighborhood(GraphIndex(g), node_id, depth);
}

double proximity(const GraphIndex& index, std::string_view d, std::string_view t) {
  const auto& nd = index.neighbors(d);
  const auto& nt = index.neighbors(t);
  std::size_t inter = 0;
  for (const auto& x : nd) inter += nt.count(x);
  std::size_t uni = nd.size() + nt.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double proximity(const EvidenceGraph& g, std::string_view d, std::string_view t) {
  return proximity(GraphIndex(g), d, t);
}

std::string context_text(const EvidenceNode& n) {
  std::string out;
  auto add = [&](const std::optional<std::string>& s) {
    if (!s || s->empty()) return;
    if (!out.empty()) out.push_back(' ');
    out += *s;
  };
  add(n.intervention);
  add(n.bio_mechanism);
  add(n.phenotype);
  add(n.source_text);
  return out;
}

RetrievalIndex::RetrievalIndex(const EvidenceGraph& g, const TextEncoder& encoder) : encoder_(encoder) {
  for (const auto& [id, n] : g.evidence()) {
    nodes_.push_back(&n);
    texts_.push_back(context_text(n));
    embeddings_.push_back(encoder.encode(texts_.back()));
  }
}

std::vector<RetrievedContext> RetrievalIndex::query(std::string_view text, std::size_t k,
                                                    const RetrievalFilter& filter) const {
  std::vector<RetrievedContext> out;
  if (k == 0) return out;
  auto q = encoder_.encode(text);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = *nodes_[i];
    if (filter.min_score && !(n.composite_score >= *filter.min_score)) continue;
    if (filter.study_design && n.study_design != *filter.study_design) continue;
    out.push_back(RetrievedContext{n.id, cosine(q, embeddings_[i]), texts_[i]});
  }
  auto cut = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(cut), out.end(),
                    [](const RetrievedContext& a, const RetrievedContext& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.evidence_id < b.evidence_id;
                    });
  out.resize(cut);
  return out;
}

std::vector<RetrievedContext> retrieve_context(const EvidenceGraph& g, std::string_view query, std::size_t k,
                                               const TextEncoder& encoder, const RetrievalFilter& filter) {
  return RetrievalIndex(g, encoder).query(query, k, filter);
}

}  // namespace forge
