#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "forge/encode.hpp"
#include "forge/evidence.hpp"
#include "forge/graph.hpp"
#include "forge/llm.hpp"
#include "forge/serialize.hpp"

namespace forge {

// ---- QA -------------------------------------------------------------------

enum class YesNo { Yes, No };

std::string_view to_string(YesNo v) noexcept;
std::optional<YesNo> parse_yes_no(std::string_view s);

struct QaItem {
  std::string question;
  YesNo gold_class = YesNo::Yes;
  std::string gold_answer;
  std::optional<YesNo> predicted_class;
  std::optional<std::string> predicted_answer;
  std::optional<std::string> evidence_id;

  bool operator==(const QaItem&) const = default;
};

Json qa_item_to_json(const QaItem& item);
QaItem qa_item_from_json(const Json& j);
std::vector<QaItem> qa_items_from_json(const Json& j);
Json qa_items_to_json(std::span<const QaItem> items);

struct QaSampling {
  double min_composite = 0.4;    // strictly greater
  std::size_t min_source_len = 30;  // strictly longer, in code points
};

bool qa_eligible(const EvidenceRecord& record, const QaSampling& sampling = {});

/// Prompts for one yes/no question grounded in the record's source text.
QaItem generate_qa(const EvidenceRecord& record, LlmBackend& backend, const QaSampling& sampling = {});

enum class QaMode { Baseline, Evidence, EvidenceBackground };

std::string_view to_string(QaMode m) noexcept;
std::optional<QaMode> parse_qa_mode(std::string_view s);

struct QaContexts {
  std::vector<std::string> evidence;
  std::vector<std::string> background;

  bool empty() const noexcept { return evidence.empty() && background.empty(); }
};

/// Splits a CLASSIFICATION/EXPLANATION reply.
std::pair<YesNo, std::string> parse_answer(std::string_view response);

QaItem answer_question(const QaItem& item, const QaContexts& contexts, QaMode mode, LlmBackend& backend);

struct QaMetrics {
  double accuracy = 0.0;
  double semsim = 0.0;
  std::size_t n = 0;
};

QaMetrics qa_metrics(std::span<const QaItem> items, const TextEncoder& encoder);

// ---- Link prediction --------------------------------------------------------

/// Undirected simple graph over named nodes with sorted adjacency lists.
class PairGraph {
 public:
  int add_node(const std::string& name, std::string label = {});
  /// Adds u-v once; self-loops are ignored. Returns true when new.
  bool add_edge(int u, int v);
  bool remove_edge(int u, int v);

  int size() const noexcept { return static_cast<int>(names_.size()); }
  std::size_t edge_count() const noexcept { return edges_; }
  const std::string& name(int u) const { return names_.at(static_cast<std::size_t>(u)); }
  /// Text used for the semantic-similarity feature.
  const std::string& label(int u) const { return labels_.at(static_cast<std::size_t>(u)); }
  std::optional<int> find(std::string_view name) const;
  int require(std::string_view name) const;  // throws UnknownNode
  const std::vector<int>& neighbors(int u) const { return adj_.at(static_cast<std::size_t>(u)); }
  std::size_t degree(int u) const { return neighbors(u).size(); }
  bool has_edge(int u, int v) const;
  std::vector<std::pair<int, int>> edges() const;  // u < v, sorted

 private:
  std::vector<std::string> names_;
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> index_;
  std::vector<std::vector<int>> adj_;
  std::size_t edges_ = 0;
};

/// Entity nodes, joined when some evidence node links to both.
PairGraph entity_projection(const EvidenceGraph& g);

/// Growth from an (m+1)-clique, m edges per new node. Each edge after the
/// first closes a triangle with probability `triad_p` (Holme-Kim); 0 gives
/// plain Barabasi-Albert.
PairGraph preferential_attachment(int n, int m, std::uint64_t seed, double triad_p = 0.0);

using NamePair = std::pair<std::string, std::string>;  // first < second

struct HoldoutSet {
  std::vector<NamePair> train_positive;
  std::vector<NamePair> test_positive;
  std::vector<NamePair> negatives;
  std::size_t cold_start = 0;
};

/// Future co-linked entity pairs unseen in `train` are the positives;
/// negatives are sampled uniformly from remaining unseen pairs.
HoldoutSet build_temporal_holdout(const PairGraph& train, std::span<const EvidenceRecord> future,
                                  double negative_ratio, std::uint64_t seed);

struct EdgeSplit {
  PairGraph train;
  HoldoutSet holdout;
};

/// Removes a seeded `fraction` of edges as test positives.
EdgeSplit split_edges(const PairGraph& g, double fraction, double negative_ratio, std::uint64_t seed);

/// Hop distance, or nullopt when unreachable.
std::optional<int> hop_distance(const PairGraph& g, int u, int v);

/// 1/(1+d); 0 when unreachable.
double shortest_path_score(const PairGraph& g, int u, int v);
double shortest_path_score(const PairGraph& g, std::string_view u, std::string_view v);

inline constexpr int kPairFeatureCount = 6;
inline constexpr std::string_view kPairFeatureNames[kPairFeatureCount] = {
    "semantic_cosine", "degree_product", "common_neighbors", "jaccard", "adamic_adar", "inverse_distance"};

/// Precomputed label embeddings for the semantic feature.
class FeatureContext {
 public:
  FeatureContext(const PairGraph& g, const TextEncoder& encoder);
  const PairGraph& graph() const noexcept { return graph_; }
  const Embedding& embedding(int u) const { return embeddings_.at(static_cast<std::size_t>(u)); }

 private:
  const PairGraph& graph_;
  std::vector<Embedding> embeddings_;
};

Eigen::VectorXd pair_features(const FeatureContext& ctx, int u, int v);
Eigen::VectorXd pair_features(const PairGraph& g, std::string_view u, std::string_view v, const TextEncoder& encoder);

struct Node2VecParams {
  int dims = 64;
  int walk_len = 20;
  int walks_per_node = 10;
  double p = 1.0;
  double q = 1.0;
  int window = 5;
  int epochs = 3;
  int negatives = 5;
  double learning_rate = 0.025;
};

/// Biased second-order walks; one walk per row, nodes as indices.
std::vector<std::vector<int>> node2vec_walks(const PairGraph& g, const Node2VecParams& params, std::uint64_t seed);

/// Skip-gram with negative sampling over node2vec walks; one row per node.
Eigen::MatrixXd node2vec_embed(const PairGraph& g, const Node2VecParams& params, std::uint64_t seed);

enum class ClassifierKind { Logistic, Forest };

class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual double score(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
  /// Normalized to sum 1 when defined; empty otherwise.
  virtual std::vector<double> importances() const { return {}; }
};

struct LogisticParams {
  int iterations = 2000;
  double learning_rate = 0.5;
  double l2 = 1e-4;
};

class LogisticModel final : public Classifier {
 public:
  LogisticModel(const Eigen::MatrixXd& x, std::span<const int> labels, const LogisticParams& params = {});
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  const Eigen::VectorXd& weights() const noexcept { return w_; }

 private:
  Eigen::VectorXd mean_, scale_, w_;
  double b_ = 0.0;
};

struct ForestParams {
  int trees = 100;
  int max_depth = 8;
  int min_leaf = 2;
  int max_features = 0;  // 0: ceil(sqrt(features))
};

class RandomForest final : public Classifier {
 public:
  RandomForest(const Eigen::MatrixXd& x, std::span<const int> labels, std::uint64_t seed,
               const ForestParams& params = {});
  double score(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  std::vector<double> importances() const override { return importances_; }

  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
  };

 private:
  std::vector<std::vector<Node>> trees_;
  std::vector<double> importances_;
};

/// Rows of `x` are examples. Throws DegenerateLabels unless both classes occur.
std::unique_ptr<Classifier> train_classifier(const Eigen::MatrixXd& x, std::span<const int> labels,
                                             ClassifierKind kind, std::uint64_t seed);

struct RankResult {
  double auc = 0.0;
  double ap = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

/// Labels are 0/1. Tied scores count half toward AUC; AP ranks ties in input order.
RankResult rank_metrics(std::span<const double> scores, std::span<const int> labels);

enum class LinkPredMethod { ShortestPath, Features, Node2Vec };

std::string_view to_string(LinkPredMethod m) noexcept;
std::optional<LinkPredMethod> parse_link_pred_method(std::string_view s);

struct LinkPredParams {
  Node2VecParams node2vec;
  ClassifierKind feature_classifier = ClassifierKind::Forest;
  double train_hide_fraction = 0.1;  // training edges hidden to label classifier examples
};

struct LinkPredResult {
  LinkPredMethod method = LinkPredMethod::ShortestPath;
  RankResult rank;
  std::vector<double> importances;  // feature classifier only
};

/// Scores the holdout's test positives against its negatives.
LinkPredResult evaluate_link_prediction(const PairGraph& train, const HoldoutSet& holdout, LinkPredMethod method,
                                        const TextEncoder& encoder, std::uint64_t seed,
                                        const LinkPredParams& params = {});

}  // namespace forge
