#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "forge/encode.hpp"
#include "forge/evidence.hpp"
#include "forge/serialize.hpp"

namespace forge {

struct GraphMetadata {
  std::string disease;
  std::string version = "1";
  std::string creator;
  std::string updated_at;
  Json extra = Json::object();

  bool operator==(const GraphMetadata&) const = default;
};

/// Flattened evidence attributes. Fields the reader does not know are kept
/// in `extra` so a loaded file writes back unchanged.
struct EvidenceNode {
  std::string id;
  std::string disease;
  std::optional<std::string> doi;
  std::optional<std::string> title;
  std::optional<std::string> journal;
  std::optional<int> year;
  std::string study_design = "unknown";
  std::string clinical_stage = "unknown";
  std::optional<std::string> bio_mechanism;
  std::optional<std::string> phenotype;
  std::optional<std::string> intervention;
  std::optional<std::string> study_object;
  std::vector<std::string> linked_entities;
  double composite_score = 0.0;
  std::optional<std::string> grade;
  std::string source_text;
  Json extra = Json::object();

  bool operator==(const EvidenceNode&) const = default;
};

struct EntityNode {
  std::string id;
  std::string canonical_name;
  std::string semantic_type;
  std::string source_db;
  Json extra = Json::object();

  bool operator==(const EntityNode&) const = default;
};

struct LinkedEdge {
  std::string evidence_id;
  std::string concept_id;
  std::string entity_type;
  double link_score = 0.0;

  bool operator==(const LinkedEdge&) const = default;
};

/// G = (V_E ∪ V_T, R): evidence and entity nodes, LINKED_TO edges from
/// evidence to entities, and typed evidence-evidence relations.
class EvidenceGraph {
 public:
  GraphMetadata metadata;

  const std::map<std::string, EvidenceNode>& evidence() const noexcept { return evidence_; }
  const std::map<std::string, EntityNode>& entities() const noexcept { return entities_; }
  const std::vector<LinkedEdge>& links() const noexcept { return links_; }
  const std::vector<RelationEdge>& relations() const noexcept { return relations_; }

  std::size_t node_count() const noexcept { return evidence_.size() + entities_.size(); }
  std::size_t edge_count() const noexcept { return links_.size() + relations_.size(); }
  bool has_node(std::string_view id) const;

  void upsert_evidence(const EvidenceRecord& record);
  void upsert_evidence_node(EvidenceNode node);
  void upsert_entity(EntityNode node);
  void upsert_entity_link(std::string_view evidence_id, const EntityLink& link);
  void add_relation_edge(const RelationEdge& edge);

  /// Sorts edges into canonical order.
  void canonicalize();

  bool operator==(const EvidenceGraph&) const = default;

 private:
  friend EvidenceGraph graph_from_json(const Json& j, UnknownFields* unknown);

  std::map<std::string, EvidenceNode> evidence_;
  std::map<std::string, EntityNode> entities_;
  std::vector<LinkedEdge> links_;
  std::map<std::pair<std::string, std::string>, std::size_t> link_index_;
  std::vector<RelationEdge> relations_;
  std::set<std::tuple<std::string, std::string, RelationType>> relation_keys_;
};

EvidenceNode flatten_record(const EvidenceRecord& record);

/// Builds a graph from fused, related records.
EvidenceGraph build_graph(std::span<const EvidenceRecord> records, const GraphMetadata& metadata);

Json graph_to_json(const EvidenceGraph& g);
EvidenceGraph graph_from_json(const Json& j, UnknownFields* unknown = nullptr);

std::string serialize_graph(const EvidenceGraph& g);
void save_graph(const EvidenceGraph& g, const std::filesystem::path& path);
EvidenceGraph load_graph(const std::filesystem::path& path, UnknownFields* unknown = nullptr);

struct GraphStats {
  std::size_t evidence_count = 0;
  std::size_t entity_count = 0;
  std::size_t total_nodes = 0;
  std::size_t total_edges = 0;
  double density = 0.0;
  std::map<std::string, std::size_t> edge_types;
  std::map<std::string, std::size_t> entity_types;
  std::map<std::string, std::size_t> grades;
  std::map<std::string, std::size_t> study_designs;
  std::map<std::string, std::size_t> clinical_stages;
  double avg_linked_entities = 0.0;  // LINKED_TO out-degree per evidence node
  double median_linked_entities = 0.0;
  double avg_relations = 0.0;  // evidence-evidence out-degree per evidence node
  double median_relations = 0.0;
};

/// E / (N (N - 1)); 0 below two nodes.
double graph_density(std::size_t nodes, std::size_t edges);

GraphStats compute_stats(const EvidenceGraph& g);

/// Per-record statistics that only a record file carries.
struct RecordStats {
  std::size_t records = 0;
  double avg_core_entities = 0.0;
  double median_core_entities = 0.0;
  double avg_linked_entities = 0.0;
  double median_linked_entities = 0.0;
  double avg_relations = 0.0;
  double median_relations = 0.0;
  double avg_merged_all = 0.0;     // mean |merged_from| over all records
  double avg_merged_among = 0.0;   // mean |merged_from| over records with any merge
  double share_version_gt1 = 0.0;  // percent
  double avg_composite = 0.0;
  double median_composite = 0.0;
  double min_composite = 0.0;
  double max_composite = 0.0;
  std::map<std::string, std::size_t> grades;
  std::size_t grade_mismatches = 0;  // stored grade differs from one recomputed from composite
  double share_with_comparison = 0.0;
  double share_with_p_value = 0.0;
};

RecordStats compute_record_stats(std::span<const EvidenceRecord> records);

double median(std::vector<double> values);

/// Undirected adjacency over every edge class.
class GraphIndex {
 public:
  explicit GraphIndex(const EvidenceGraph& g);

  const std::set<std::string>& neighbors(std::string_view id) const;
  bool contains(std::string_view id) const { return adj_.find(std::string(id)) != adj_.end(); }

 private:
  std::map<std::string, std::set<std::string>, std::less<>> adj_;
};

std::set<std::string> neighborhood(const GraphIndex& index, std::string_view node_id, int depth);
std::set<std::string> neighborhood(const EvidenceGraph& g, std::string_view node_id, int depth);

/// Jaccard overlap of depth-1 neighborhoods; 0 when both are empty.
double proximity(const GraphIndex& index, std::string_view d, std::string_view t);
double proximity(const EvidenceGraph& g, std::string_view d, std::string_view t);

/// intervention, mechanism, phenotype and source text of a node.
std::string context_text(const EvidenceNode& node);

struct RetrievalFilter {
  std::optional<double> min_score;  // composite >= min_score
  std::optional<std::string> study_design;
};

struct RetrievedContext {
  std::string evidence_id;
  double similarity = 0.0;
  std::string text;
};

/// Encodes every node's context once; queries are then a linear scan.
class RetrievalIndex {
 public:
  RetrievalIndex(const EvidenceGraph& g, const TextEncoder& encoder);

  std::vector<RetrievedContext> query(std::string_view text, std::size_t k, const RetrievalFilter& filter = {}) const;

 private:
  const TextEncoder& encoder_;
  std::vector<const EvidenceNode*> nodes_;
  std::vector<std::string> texts_;
  std::vector<Embedding> embeddings_;
};

std::vector<RetrievedContext> retrieve_context(const EvidenceGraph& g, std::string_view query, std::size_t k,
                                               const TextEncoder& encoder, const RetrievalFilter& filter = {});

}  // namespace forge
