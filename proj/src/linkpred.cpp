#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include "forge/error.hpp"
#include "forge/evaluate.hpp"

namespace forge {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::size_t workers = std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::pair<int, int> ordered(int u, int v) { return u < v ? std::pair{u, v} : std::pair{v, u}; }

NamePair name_pair(const PairGraph& g, int u, int v) {
  NamePair p{g.name(u), g.name(v)};
  if (p.second < p.first) std::swap(p.first, p.second);
  return p;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Uniform sample of `target` unordered non-adjacent pairs of `g` outside `excluded`.
std::vector<std::pair<int, int>> sample_non_edges(const PairGraph& g, const std::set<std::pair<int, int>>& excluded,
                                                  std::size_t target, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(g.size());
  const std::size_t all_pairs = n < 2 ? 0 : n * (n - 1) / 2;
  std::size_t blocked = g.edge_count();
  for (const auto& [u, v] : excluded)
    if (!g.has_edge(u, v)) ++blocked;
  const std::size_t pool = all_pairs > blocked ? all_pairs - blocked : 0;
  target = std::min(target, pool);
  std::vector<std::pair<int, int>> out;
  if (target == 0) return out;
  if (pool <= 4 * target) {
    std::vector<std::pair<int, int>> cand;
    for (int u = 0; u < g.size(); ++u)
      for (int v = u + 1; v < g.size(); ++v)
        if (!g.has_edge(u, v) && !excluded.count({u, v})) cand.emplace_back(u, v);
    std::shuffle(cand.begin(), cand.end(), rng);
    cand.resize(target);
    std::sort(cand.begin(), cand.end());
    return cand;
  }
  std::set<std::pair<int, int>> chosen;
  std::uniform_int_distribution<int> pick(0, g.size() - 1);
  while (chosen.size() < target) {
    int u = pick(rng), v = pick(rng);
    if (u == v) continue;
    auto p = ordered(u, v);
    if (g.has_edge(p.first, p.second) || excluded.count(p)) continue;
    chosen.insert(p);
  }
  return {chosen.begin(), chosen.end()};
}

}  // namespace

int PairGraph::add_node(const std::string& name, std::string label) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  int id = size();
  index_.emplace(name, id);
  names_.push_back(name);
  labels_.push_back(label.empty() ? name : std::move(label));
  adj_.emplace_back();
  return id;
}

bool PairGraph::add_edge(int u, int v) {
  if (u == v) return false;
  auto& a = adj_.at(static_cast<std::size_t>(u));
  auto it = std::lower_bound(a.begin(), a.end(), v);
  if (it != a.end() && *it == v) return false;
  a.insert(it, v);
  auto& b = adj_.at(static_cast<std::size_t>(v));
  b.insert(std::lower_bound(b.begin(), b.end(), u), u);
  ++edges_;
  return true;
}

bool PairGraph::remove_edge(int u, int v) {
  if (!has_edge(u, v)) return false;
  auto& a = adj_[static_cast<std::size_t>(u)];
  a.erase(std::lower_bound(a.begin(), a.end(), v));
  auto& b = adj_[static_cast<std::size_t>(v)];
  b.erase(std::lower_bound(b.begin(), b.end(), u));
  --edges_;
  return true;
}

std::optional<int> PairGraph::find(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int PairGraph::require(std::string_view name) const {
  auto id = find(name);
  if (!id) fail(ErrorCode::UnknownNode, "no node " + std::string(name));
  return *id;
}

bool PairGraph::has_edge(int u, int v) const {
  const auto& a = neighbors(u);
  return std::binary_search(a.begin(), a.end(), v);
}

std::vector<std::pair<int, int>> PairGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(edges_);
  for (int u = 0; u < size(); ++u)
    for (int v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

PairGraph entity_projection(const EvidenceGraph& g) {
  PairGraph p;
  for (const auto& [id, e] : g.entities()) p.add_node(id, e.canonical_name);
  std::map<std::string, std::vector<int>> by_evidence;
  for (const auto& l : g.links()) by_evidence[l.evidence_id].push_back(p.require(l.concept_id));
  for (const auto& [_, ids] : by_evidence)
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) p.add_edge(ids[i], ids[j]);
  return p;
}

PairGraph preferential_attachment(int n, int m, std::uint64_t seed, double triad_p) {
  if (m < 1 || n <= m) fail(ErrorCode::PreconditionViolation, "preferential attachment needs n > m >= 1");
  if (!(triad_p >= 0 && triad_p <= 1)) fail(ErrorCode::PreconditionViolation, "triad_p must be in [0,1]");
  PairGraph g;
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  std::vector<int> ends;  // one entry per edge endpoint
  auto connect = [&](int u, int v) {
    if (!g.add_edge(u, v)) return false;
    ends.push_back(u);
    ends.push_back(v);
    return true;
  };
  for (int u = 0; u <= m; ++u)
    for (int v = u + 1; v <= m; ++v) connect(u, v);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int v = m + 1; v < n; ++v) {
    int added = 0;
    int anchor = -1;
    while (added < m) {
      if (anchor >= 0 && triad_p > 0 && unit(rng) < triad_p) {
        std::vector<int> open;
        for (int w : g.neighbors(anchor))
          if (w != v && !g.has_edge(v, w)) open.push_back(w);
        if (!open.empty()) {
          std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
          connect(v, open[pick(rng)]);
          ++added;
          continue;
        }
      }
      std::uniform_int_distribution<std::size_t> pick(0, ends.size() - 1);
      int t = ends[pick(rng)];
      if (t == v || !connect(v, t)) continue;
      anchor = t;
      ++added;
    }
  }
  return g;
}

HoldoutSet build_temporal_holdout(const PairGraph& train, std::span<const EvidenceRecord> future,
                                  double negative_ratio, std::uint64_t seed) {
  if (negative_ratio < 0) fail(ErrorCode::PreconditionViolation, "negative_ratio must be >= 0");
  HoldoutSet h;
  std::set<std::pair<int, int>> test;
  std::set<NamePair> cold;
  for (const auto& r : future) {
    std::vector<std::string> ids = r.linked_entities;
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        auto u = train.find(ids[i]), v = train.find(ids[j]);
        if (!u || !v) {
          cold.insert({ids[i], ids[j]});
          continue;
        }
        if (train.has_edge(*u, *v)) continue;
        test.insert(ordered(*u, *v));
      }
    }
  }
  h.cold_start = cold.size();
  if (test.empty()) fail(ErrorCode::NoEligiblePairs, "future records contribute no unseen pair with known endpoints");
  for (const auto& [u, v] : train.edges()) h.train_positive.push_back(name_pair(train, u, v));
  for (const auto& [u, v] : test) h.test_positive.push_back(name_pair(train, u, v));
  std::mt19937_64 rng(seed);
  auto target = static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(test.size())));
  for (const auto& [u, v] : sample_non_edges(train, test, target, rng)) h.negatives.push_back(name_pair(train, u, v));
  std::sort(h.train_positive.begin(), h.train_positive.end());
  std::sort(h.test_positive.begin(), h.test_positive.end());
  std::sort(h.negatives.begin(), h.negatives.end());
  return h;
}

EdgeSplit split_edges(const PairGraph& g, double fraction, double negative_ratio, std::uint64_t seed) {
  if (!(fraction > 0 && fraction < 1)) fail(ErrorCode::PreconditionViolation, "holdout fraction must be in (0,1)");
  auto edges = g.edges();
  if (edges.size() < 2) fail(ErrorCode::NoEligiblePairs, "graph has fewer than two edges");
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(edges.size()))));
  EdgeSplit s{g, {}};
  std::set<std::pair<int, int>> test(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(k));
  for (const auto& [u, v] : test) s.train.remove_edge(u, v);
  for (const auto& [u, v] : s.train.edges()) s.holdout.train_positive.push_back(name_pair(g, u, v));
  for (const auto& [u, v] : test) s.holdout.test_positive.push_back(name_pair(g, u, v));
  auto target = static_cast<std::size_t>(std::llround(negative_ratio * static_cast<double>(k)));
  for (const auto& [u, v] : sample_non_edges(g, {}, target, rng)) s.holdout.negatives.push_back(name_pair(g, u, v));
  std::sort(s.holdout.train_positive.begin(), s.holdout.train_positive.end());
  std::sort(s.holdout.test_positive.begin(), s.holdout.test_positive.end());
  std::sort(s.holdout.negatives.begin(), s.holdout.negatives.end());
  return s;
}

std::optional<int> hop_distance(const PairGraph& g, int u, int v) {
  if (u < 0 || u >= g.size() || v < 0 || v >= g.size()) fail(ErrorCode::UnknownNode, "node index out of range");
  if (u == v) return 0;
  std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
  std::deque<int> queue{u};
  dist[static_cast<std::size_t>(u)] = 0;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    for (int y : g.neighbors(x)) {
      auto& d = dist[static_cast<std::size_t>(y)];
      if (d >= 0) continue;
      d = dist[static_cast<std::size_t>(x)] + 1;
      if (y == v) return d;
      queue.push_back(y);
    }
  }
  return std::nullopt;
}

double shortest_path_score(const PairGraph& g, int u, int v) {
  auto d = hop_distance(g, u, v);
  return d ? 1.0 / (1.0 + *d) : 0.0;
}

double shortest_path_score(const PairGraph& g, std::string_view u, std::string_view v) {
  return shortest_path_score(g, g.require(u), g.require(v));
}

FeatureContext::FeatureContext(const PairGraph& g, const TextEncoder& encoder) : graph_(g) {
  embeddings_.resize(static_cast<std::size_t>(g.size()));
  parallel_for(embeddings_.size(), [&](std::size_t i) { embeddings_[i] = encoder.encode(g.label(static_cast<int>(i))); });
}

Eigen::VectorXd pair_features(const FeatureContext& ctx, int u, int v) {
  const auto& g = ctx.graph();
  if (u < 0 || u >= g.size() || v < 0 || v >= g.size()) fail(ErrorCode::UnknownNode, "node index out of range");
  const auto& nu = g.neighbors(u);
  const auto& nv = g.neighbors(v);
  std::vector<int> common;
  std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
  const double uni = static_cast<double>(nu.size() + nv.size() - common.size());
  double aa = 0.0;
  for (int w : common) aa += 1.0 / std::log(static_cast<double>(g.degree(w)));
  auto d = hop_distance(g, u, v);
  Eigen::VectorXd f(kPairFeatureCount);
  f << cosine(ctx.embedding(u), ctx.embedding(v)), static_cast<double>(nu.size() * nv.size()),
      static_cast<double>(common.size()), uni > 0 ? static_cast<double>(common.size()) / uni : 0.0, aa,
      d && *d > 0 ? 1.0 / *d : 0.0;
  return f;
}

Eigen::VectorXd pair_features(const PairGraph& g, std::string_view u, std::string_view v, const TextEncoder& encoder) {
  int a = g.require(u), b = g.require(v);
  FeatureContext ctx(g, encoder);
  return pair_features(ctx, a, b);
}

std::vector<std::vector<int>> node2vec_walks(const PairGraph& g, const Node2VecParams& params, std::uint64_t seed) {
  if (g.size() == 0) fail(ErrorCode::PreconditionViolation, "node2vec needs a non-empty graph");
  if (params.p <= 0 || params.q <= 0 || params.walk_len < 1 || params.walks_per_node < 1) {
    fail(ErrorCode::PreconditionViolation, "node2vec needs p, q > 0 and positive walk sizes");
  }
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<std::vector<int>> walks(n * static_cast<std::size_t>(params.walks_per_node));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(seed);
  std::vector<int> starts;
  for (int r = 0; r < params.walks_per_node; ++r) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    starts.insert(starts.end(), order.begin(), order.end());
  }
  parallel_for(walks.size(), [&](std::size_t i) {
    std::mt19937_64 rng(mix_seed(seed, i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto& walk = walks[i];
    walk.push_back(starts[i]);
    std::vector<double> weights;
    while (static_cast<int>(walk.size()) < params.walk_len) {
      int cur = walk.back();
      const auto& nbrs = g.neighbors(cur);
      if (nbrs.empty()) break;
      if (walk.size() == 1) {
        std::uniform_int_distribution<std::size_t> pick(0, nbrs.size() - 1);
        walk.push_back(nbrs[pick(rng)]);
        continue;
      }
      int prev = walk[walk.size() - 2];
      weights.resize(nbrs.size());
      double total = 0.0;
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        int x = nbrs[k];
        weights[k] = x == prev ? 1.0 / params.p : g.has_edge(prev, x) ? 1.0 : 1.0 / params.q;
        total += weights[k];
      }
      double r = unit(rng) * total;
      std::size_t k = 0;
      for (; k + 1 < nbrs.size(); ++k) {
        r -= weights[k];
        if (r < 0) break;
      }
      walk.push_back(nbrs[k]);
    }
  });
  return walks;
}

Eigen::MatrixXd node2vec_embed(const PairGraph& g, const Node2VecParams& params, std::uint64_t seed) {
  if (params.dims < 1 || params.window < 1 || params.epochs < 1 || params.negatives < 0) {
    fail(ErrorCode::PreconditionViolation, "node2vec needs positive dims, window and epochs");
  }
  auto walks = node2vec_walks(g, params, seed);
  const auto n = static_cast<Eigen::Index>(g.size());
  const auto d = static_cast<Eigen::Index>(params.dims);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::mt19937_64 rng(mix_seed(seed, 0xfeed));
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
  RowMatrix in(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) in(i, k) = init(rng);
  RowMatrix out = RowMatrix::Zero(n, d);

  std::vector<double> freq(static_cast<std::size_t>(n), 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (int x : w) freq[static_cast<std::size_t>(x)] += 1.0;
    tokens += w.size();
  }
  for (auto& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<int> noise(freq.begin(), freq.end());

  const double total_steps = static_cast<double>(tokens) * params.epochs;
  double step = 0.0;
  Eigen::RowVectorXd grad(d);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (const auto& walk : walks) {
      const int len = static_cast<int>(walk.size());
      for (int i = 0; i < len; ++i, step += 1.0) {
        const double lr = params.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
        const int center = walk[static_cast<std::size_t>(i)];
        for (int j = std::max(0, i - params.window); j <= std::min(len - 1, i + params.window); ++j) {
          if (j == i) continue;
          const int context = walk[static_cast<std::size_t>(j)];
          grad.setZero();
          for (int s = 0; s <= params.negatives; ++s) {
            int target = context;
            double label = 1.0;
            if (s > 0) {
              target = noise(rng);
              if (target == context) continue;
              label = 0.0;
            }
            const double f = sigmoid(in.row(center).dot(out.row(target)));
            const double gcoef = (label - f) * lr;
            grad.noalias() += gcoef * out.row(target);
            out.row(target).noalias() += gcoef * in.row(center);
          }
          in.row(center) += grad;
        }
      }
    }
  }
  return Eigen::MatrixXd(in);
}

LogisticModel::LogisticModel(const Eigen::MatrixXd& x, std::span<const int> labels, const LogisticParams& params) {
  const auto n = x.rows();
  const auto d = x.cols();
  if (static_cast<std::size_t>(n) != labels.size()) fail(ErrorCode::DimensionMismatch, "features and labels differ in length");
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  if (y.sum() == 0.0 || y.sum() == static_cast<double>(n)) fail(ErrorCode::DegenerateLabels, "training labels hold one class");
  mean_ = x.colwise().mean().transpose();
  scale_.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double var = (x.col(k).array() - mean_(k)).square().mean();
    scale_(k) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  Eigen::MatrixXd z = (x.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
  w_ = Eigen::VectorXd::Zero(d);
  b_ = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < params.iterations; ++it) {
    Eigen::VectorXd p = ((z * w_).array() + b_).unaryExpr([](double v) { return sigmoid(v); });
    Eigen::VectorXd r = p - y;
    w_ -= params.learning_rate * ((z.transpose() * r) * inv_n + params.l2 * w_);
    b_ -= params.learning_rate * r.sum() * inv_n;
  }
}

double LogisticModel::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != w_.size()) fail(ErrorCode::DimensionMismatch, "feature vector has the wrong length");
  Eigen::VectorXd z = (x - mean_).array() / scale_.array();
  return sigmoid(z.dot(w_) + b_);
}

namespace {

double gini(double pos, double n) {
  if (n <= 0) return 0.0;
  double p = pos / n;
  return 2.0 * p * (1.0 - p);
}

}  // namespace

RandomForest::RandomForest(const Eigen::MatrixXd& x, std::span<const int> labels, std::uint64_t seed,
                           const ForestParams& params) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<int>(x.cols());
  if (n != labels.size()) fail(ErrorCode::DimensionMismatch, "features and labels differ in length");
  std::size_t npos = 0;
  for (int l : labels) npos += l ? 1 : 0;
  if (npos == 0 || npos == n) fail(ErrorCode::DegenerateLabels, "training labels hold one class");
  const int mtry = params.max_features > 0 ? std::min(params.max_features, d)
                                           : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
  importances_.assign(static_cast<std::size_t>(d), 0.0);
  std::mt19937_64 rng(seed);

  for (int t = 0; t < params.trees; ++t) {
    std::vector<std::size_t> sample(n);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (auto& s : sample) s = pick(rng);
    std::vector<Node> tree;
    struct Task {
      std::vector<std::size_t> rows;
      int node;
      int depth;
    };
    std::vector<Task> stack;
    tree.emplace_back();
    stack.push_back({std::move(sample), 0, 0});
    std::vector<int> features(static_cast<std::size_t>(d));
    std::iota(features.begin(), features.end(), 0);
    while (!stack.empty()) {
      Task task = std::move(stack.back());
      stack.pop_back();
      const auto& rows = task.rows;
      const double m = static_cast<double>(rows.size());
      double pos = 0;
      for (auto r : rows) pos += labels[r] ? 1 : 0;
      tree[static_cast<std::size_t>(task.node)].positive_fraction = pos / m;
      if (pos == 0 || pos == m || task.depth >= params.max_depth ||
          rows.size() < 2 * static_cast<std::size_t>(params.min_leaf)) {
        continue;
      }
      std::shuffle(features.begin(), features.end(), rng);
      const double parent = gini(pos, m);
      double best_gain = 1e-12;
      int best_f = -1;
      double best_thr = 0.0;
      std::vector<std::size_t> sorted = rows;
      for (int fi = 0; fi < mtry; ++fi) {
        const int f = features[static_cast<std::size_t>(fi)];
        std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
          return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
        });
        double left_pos = 0;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
          left_pos += labels[sorted[k]] ? 1 : 0;
          const double xl = x(static_cast<Eigen::Index>(sorted[k]), f);
          const double xr = x(static_cast<Eigen::Index>(sorted[k + 1]), f);
          if (!(xl < xr)) continue;
          const double nl = static_cast<double>(k + 1), nr = m - nl;
          if (nl < params.min_leaf || nr < params.min_leaf) continue;
          const double gain = parent - (nl * gini(left_pos, nl) + nr * gini(pos - left_pos, nr)) / m;
          if (gain > best_gain) {
            best_gain = gain;
            best_f = f;
            best_thr = 0.5 * (xl + xr);
          }
        }
      }
      if (best_f < 0) continue;
      importances_[static_cast<std::size_t>(best_f)] += best_gain * m;
      std::vector<std::size_t> left, right;
      for (auto r : rows) (x(static_cast<Eigen::Index>(r), best_f) <= best_thr ? left : right).push_back(r);
      auto& node = tree[static_cast<std::size_t>(task.node)];
      node.feature = best_f;
      node.threshold = best_thr;
      node.left = static_cast<int>(tree.size());
      node.right = node.left + 1;
      int li = node.left, ri = node.right;
      tree.emplace_back();
      tree.emplace_back();
      stack.push_back({std::move(right), ri, task.depth + 1});
      stack.push_back({std::move(left), li, task.depth + 1});
    }
    trees_.push_back(std::move(tree));
  }
  double total = std::accumulate(importances_.begin(), importances_.end(), 0.0);
  if (total > 0)
    for (auto& v : importances_) v /= total;
}

double RandomForest::score(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != static_cast<Eigen::Index>(importances_.size())) {
    fail(ErrorCode::DimensionMismatch, "feature vector has the wrong length");
  }
  double sum = 0.0;
  for (const auto& tree : trees_) {
    const Node* node = &tree[0];
    while (node->feature >= 0) node = &tree[static_cast<std::size_t>(x(node->feature) <= node->threshold ? node->left : node->right)];
    sum += node->positive_fraction;
  }
  return trees_.empty() ? 0.0 : sum / static_cast<double>(trees_.size());
}

std::unique_ptr<Classifier> train_classifier(const Eigen::MatrixXd& x, std::span<const int> labels,
                                             ClassifierKind kind, std::uint64_t seed) {
  if (kind == ClassifierKind::Logistic) return std::make_unique<LogisticModel>(x, labels);
  return std::make_unique<RandomForest>(x, labels, seed);
}

RankResult rank_metrics(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorCode::DimensionMismatch, "scores and labels differ in length");
  RankResult r;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) fail(ErrorCode::PreconditionViolation, "labels must be 0 or 1");
    if (std::isnan(scores[i])) fail(ErrorCode::PreconditionViolation, "score is NaN");
    (labels[i] ? r.n_pos : r.n_neg) += 1;
  }
  if (r.n_pos == 0 || r.n_neg == 0) fail(ErrorCode::DegenerateLabels, "ranking needs both classes");

  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::uint64_t concordant = 0, tied = 0, neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    std::uint64_t pos_g = 0, neg_g = 0;
    for (; j < idx.size() && scores[idx[j]] == scores[idx[i]]; ++j) (labels[idx[j]] ? pos_g : neg_g) += 1;
    concordant += pos_g * neg_below;
    tied += pos_g * neg_g;
    neg_below += neg_g;
    i = j;
  }
  r.auc = static_cast<double>(2 * concordant + tied) / (2.0 * static_cast<double>(r.n_pos) * static_cast<double>(r.n_neg));

  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t tp = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (!labels[idx[k]]) continue;
    ++tp;
    sum += static_cast<double>(tp) / static_cast<double>(k + 1);
  }
  r.ap = sum / static_cast<double>(r.n_pos);
  return r;
}

std::string_view to_string(LinkPredMethod m) noexcept {
  switch (m) {
    case LinkPredMethod::ShortestPath: return "sp";
    case LinkPredMethod::Features: return "feat";
    case LinkPredMethod::Node2Vec: return "n2v";
  }
  return "sp";
}

std::optional<LinkPredMethod> parse_link_pred_method(std::string_view s) {
  for (auto m : {LinkPredMethod::ShortestPath, LinkPredMethod::Features, LinkPredMethod::Node2Vec})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

namespace {

Eigen::MatrixXd feature_rows(const FeatureContext& ctx, const std::vector<std::pair<int, int>>& pairs) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), kPairFeatureCount);
  parallel_for(pairs.size(), [&](std::size_t i) {
    x.row(static_cast<Eigen::Index>(i)) = pair_features(ctx, pairs[i].first, pairs[i].second).transpose();
  });
  return x;
}

Eigen::MatrixXd hadamard_rows(const Eigen::MatrixXd& emb, const std::vector<std::pair<int, int>>& pairs) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.size()), emb.cols());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = emb.row(pairs[i].first).cwiseProduct(emb.row(pairs[i].second));
  }
  return x;
}

}  // namespace

LinkPredResult evaluate_link_prediction(const PairGraph& train, const HoldoutSet& holdout, LinkPredMethod method,
                                        const TextEncoder& encoder, std::uint64_t seed, const LinkPredParams& params) {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> labels;
  std::set<std::pair<int, int>> held;
  for (const auto& [a, b] : holdout.test_positive) {
    pairs.push_back(ordered(train.require(a), train.require(b)));
    labels.push_back(1);
  }
  for (const auto& [a, b] : holdout.negatives) {
    pairs.push_back(ordered(train.require(a), train.require(b)));
    labels.push_back(0);
  }
  held.insert(pairs.begin(), pairs.end());
  {
    // seeded evaluation order
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(mix_seed(seed, 0x3));
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::pair<int, int>> p2;
    std::vector<int> l2;
    for (auto i : order) {
      p2.push_back(pairs[i]);
      l2.push_back(labels[i]);
    }
    pairs.swap(p2);
    labels.swap(l2);
  }

  LinkPredResult result;
  result.method = method;
  std::vector<double> scores(pairs.size());
  switch (method) {
    case LinkPredMethod::ShortestPath:
      parallel_for(pairs.size(), [&](std::size_t i) { scores[i] = shortest_path_score(train, pairs[i].first, pairs[i].second); });
      break;
    case LinkPredMethod::Features: {
      auto edges = train.edges();
      std::mt19937_64 rng(seed);
      std::shuffle(edges.begin(), edges.end(), rng);
      auto k = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::llround(params.train_hide_fraction * static_cast<double>(edges.size()))));
      if (edges.empty()) fail(ErrorCode::NoEligiblePairs, "training graph has no edges");
      std::vector<std::pair<int, int>> hidden(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(hidden.begin(), hidden.end());
      PairGraph reduced = train;
      for (const auto& [u, v] : hidden) reduced.remove_edge(u, v);
      auto negatives = sample_non_edges(train, held, hidden.size(), rng);
      std::vector<std::pair<int, int>> train_pairs = hidden;
      train_pairs.insert(train_pairs.end(), negatives.begin(), negatives.end());
      std::vector<int> train_labels(hidden.size(), 1);
      train_labels.resize(train_pairs.size(), 0);
      FeatureContext reduced_ctx(reduced, encoder);
      auto model = train_classifier(feature_rows(reduced_ctx, train_pairs), train_labels, params.feature_classifier, seed);
      FeatureContext ctx(train, encoder);
      auto x = feature_rows(ctx, pairs);
      for (std::size_t i = 0; i < pairs.size(); ++i) scores[i] = model->score(x.row(static_cast<Eigen::Index>(i)).transpose());
      result.importances = model->importances();
      break;
    }
    case LinkPredMethod::Node2Vec: {
      auto emb = node2vec_embed(train, params.node2vec, seed);
      auto positives = train.edges();
      std::mt19937_64 rng(mix_seed(seed, 0x2));
      auto negatives = sample_non_edges(train, held, positives.size(), rng);
      std::vector<std::pair<int, int>> train_pairs = positives;
      train_pairs.insert(train_pairs.end(), negatives.begin(), negatives.end());
      std::vector<int> train_labels(positives.size(), 1);
      train_labels.resize(train_pairs.size(), 0);
      LogisticModel model(hadamard_rows(emb, train_pairs), train_labels);
      auto x = hadamard_rows(emb, pairs);
      for (std::size_t i = 0; i < pairs.size(); ++i) scores[i] = model.score(x.row(static_cast<Eigen::Index>(i)).transpose());
      break;
    }
  }
  result.rank = rank_metrics(scores, labels);
  return result;
}

}  // namespace forge
