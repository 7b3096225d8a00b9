#include <random>
#include <set>

#include "forge/evaluate.hpp"
#include "forge/graph.hpp"
#include "support.hpp"

using namespace forge;

namespace {

PairGraph path_graph(int n) {
  PairGraph g;
  for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
  for (int i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

double brute_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double num = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
      }
  return num / pairs;
}

EvidenceRecord future_record(const std::string& id, std::vector<std::string> concepts) {
  std::vector<EntityLink> links;
  for (const auto& c : concepts) links.push_back(testing::link(c, SemanticType::Gene));
  return testing::record(id, "f", "future", 0.5, links);
}

}  // namespace

TEST_SUITE("linkpred") {
  TEST_CASE("rank metric examples") {
    std::vector<int> y{1, 1, 0, 0};
    auto perfect = rank_metrics(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y);
    CHECK(perfect.auc == 1.0);
    CHECK(perfect.ap == 1.0);
    CHECK(rank_metrics(std::vector<double>{0.9, 0.2, 0.8, 0.1}, y).auc == 0.75);
    CHECK(rank_metrics(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y).auc == 0.5);
    auto ap = rank_metrics(std::vector<double>{0.9, 0.2, 0.8, 0.1}, y).ap;
    CHECK(ap == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    CHECK_CODE(rank_metrics(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ErrorCode::DegenerateLabels);
    CHECK_CODE(rank_metrics(std::vector<double>{0.1}, std::vector<int>{1, 0}), ErrorCode::DimensionMismatch);
  }

  TEST_CASE("AUC equals brute force with ties") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 100; ++t) {
      std::uniform_int_distribution<int> size(2, 300), level(0, 9), bit(0, 1);
      int n = size(rng);
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (int i = 0; i < n; ++i) {
        s[i] = level(rng) / 10.0;
        y[i] = bit(rng);
      }
      y[0] = 1;
      y[1] = 0;
      CHECK(rank_metrics(s, y).auc == brute_auc(s, y));
    }
  }

  TEST_CASE("pair graph basics") {
    auto g = path_graph(4);
    CHECK(g.edge_count() == 3);
    CHECK_FALSE(g.add_edge(0, 1));
    CHECK_FALSE(g.add_edge(2, 2));
    CHECK(g.has_edge(1, 0));
    CHECK(g.remove_edge(0, 1));
    CHECK_FALSE(g.has_edge(0, 1));
    CHECK_CODE(g.require("zz"), ErrorCode::UnknownNode);
  }

  TEST_CASE("shortest path score") {
    auto g = path_graph(4);
    g.add_node("iso");
    CHECK(shortest_path_score(g, 0, 1) == 0.5);
    CHECK(shortest_path_score(g, 0, 2) == doctest::Approx(1.0 / 3.0));
    CHECK(shortest_path_score(g, 0, 4) == 0.0);
    for (int u = 0; u < 5; ++u)
      for (int v = 0; v < 5; ++v) CHECK(shortest_path_score(g, u, v) == shortest_path_score(g, v, u));
    CHECK(shortest_path_score(g, 0, 1) > shortest_path_score(g, 0, 2));
    CHECK(shortest_path_score(g, 0, 2) > shortest_path_score(g, 0, 3));
  }

  TEST_CASE("pair features") {
    HashingEncoder enc;
    PairGraph tri;
    for (auto n : {"a", "b", "c", "d"}) tri.add_node(n);
    tri.add_edge(0, 1);
    tri.add_edge(1, 2);
    tri.add_edge(0, 2);
    tri.add_edge(2, 3);
    auto f = pair_features(tri, "a", "b", enc);
    REQUIRE(f.size() == kPairFeatureCount);
    CHECK(f[2] == 1.0);
    CHECK(f[3] == doctest::Approx(1.0 / 3.0));
    CHECK(f[1] == 4.0);
    CHECK(f[4] == doctest::Approx(1.0 / std::log(3.0)));
    CHECK(f[5] == 1.0);

    PairGraph apart;
    for (auto n : {"u", "x", "v", "y"}) apart.add_node(n);
    apart.add_edge(0, 1);
    apart.add_edge(2, 3);
    auto z = pair_features(apart, "u", "v", enc);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 1.0);
    CHECK(z[2] == 0.0);
    CHECK(z[3] == 0.0);
    CHECK(z[4] == 0.0);
    CHECK(z[5] == 0.0);
  }

  TEST_CASE("temporal holdout") {
    EvidenceGraph g;
    std::vector<std::pair<std::string, std::vector<std::string>>> seed{
        {"E1", {"A", "B"}}, {"E2", {"B", "C"}}, {"E3", {"C", "D"}}, {"E4", {"D", "E"}}, {"E5", {"E", "F"}}};
    for (const auto& [id, cs] : seed) {
      g.upsert_evidence(future_record(id, {}));
      for (const auto& c : cs) g.upsert_entity_link(id, testing::link(c, SemanticType::Gene));
    }
    auto train = entity_projection(g);
    CHECK(train.size() == 6);
    CHECK(train.edge_count() == 5);

    std::vector<EvidenceRecord> future{future_record("F1", {"A", "B"}), future_record("F2", {"A", "C"}),
                                       future_record("F3", {"B", "Z"}), future_record("F4", {"D", "F"})};
    auto h = build_temporal_holdout(train, future, 1.0, 3);
    CHECK(h.test_positive == std::vector<NamePair>{{"A", "C"}, {"D", "F"}});
    CHECK(h.cold_start == 1);
    CHECK(h.negatives.size() == 2);
    auto again = build_temporal_holdout(train, future, 1.0, 3);
    CHECK(again.negatives == h.negatives);
    for (const auto& [a, b] : h.negatives) {
      CHECK_FALSE(train.has_edge(train.require(a), train.require(b)));
      CHECK(std::find(h.test_positive.begin(), h.test_positive.end(), NamePair{a, b}) == h.test_positive.end());
    }
    std::vector<EvidenceRecord> stale{future_record("F1", {"A", "B"})};
    CHECK_CODE(build_temporal_holdout(train, stale, 1.0, 3), ErrorCode::NoEligiblePairs);
  }

  TEST_CASE("edge split hygiene") {
    auto g = preferential_attachment(120, 3, 4, 0.5);
    auto s = split_edges(g, 0.1, 1.0, 4);
    CHECK(s.holdout.test_positive.size() == static_cast<std::size_t>(std::llround(0.1 * g.edge_count())));
    CHECK(s.holdout.negatives.size() == s.holdout.test_positive.size());
    CHECK(s.train.edge_count() + s.holdout.test_positive.size() == g.edge_count());
    for (const auto& [a, b] : s.holdout.test_positive) {
      CHECK_FALSE(s.train.has_edge(s.train.require(a), s.train.require(b)));
      CHECK(g.has_edge(g.require(a), g.require(b)));
    }
    for (const auto& [a, b] : s.holdout.negatives) CHECK_FALSE(g.has_edge(g.require(a), g.require(b)));
  }

  TEST_CASE("preferential attachment") {
    auto g = preferential_attachment(50, 2, 1);
    CHECK(g.size() == 50);
    CHECK(g.edge_count() == 3 + 47 * 2);
    auto h = preferential_attachment(50, 2, 1);
    CHECK(g.edges() == h.edges());
  }

  TEST_CASE("node2vec") {
    PairGraph g;
    for (int i = 0; i < 12; ++i) g.add_node("n" + std::to_string(i));
    for (int c = 0; c < 2; ++c)
      for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) g.add_edge(c * 6 + i, c * 6 + j);
    g.add_edge(0, 6);
    Node2VecParams p;
    p.dims = 16;
    auto a = node2vec_embed(g, p, 11);
    auto b = node2vec_embed(g, p, 11);
    CHECK(a == b);

    auto cos = [&](int u, int v) { return a.row(u).dot(a.row(v)) / (a.row(u).norm() * a.row(v).norm()); };
    double within = 0, across = 0;
    int nw = 0, na = 0;
    for (int u = 0; u < 12; ++u)
      for (int v = u + 1; v < 12; ++v) {
        if ((u < 6) == (v < 6)) {
          within += cos(u, v);
          ++nw;
        } else {
          across += cos(u, v);
          ++na;
        }
      }
    CHECK(within / nw > across / na);

    PairGraph split;
    for (int i = 0; i < 6; ++i) split.add_node("s" + std::to_string(i));
    split.add_edge(0, 1);
    split.add_edge(1, 2);
    split.add_edge(3, 4);
    split.add_edge(4, 5);
    for (const auto& walk : node2vec_walks(split, p, 2)) {
      std::set<bool> side;
      for (int n : walk) side.insert(n < 3);
      CHECK(side.size() == 1);
    }
  }

  TEST_CASE("classifiers") {
    Eigen::MatrixXd x(8, 2);
    x << 0, 0, 1, 0, 0, 1, 1, 1, 3, 3, 4, 3, 3, 4, 4, 4;
    std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
    LogisticModel lr(x, y);
    for (int i = 0; i < 8; ++i) CHECK((lr.score(x.row(i).transpose()) > 0.5) == (y[i] == 1));

    RandomForest f1(x, y, 9), f2(x, y, 9);
    for (int i = 0; i < 8; ++i) CHECK(f1.score(x.row(i).transpose()) == f2.score(x.row(i).transpose()));
    auto imp = f1.importances();
    REQUIRE(imp.size() == 2);
    CHECK(imp[0] + imp[1] == doctest::Approx(1.0));

    std::vector<int> ones(8, 1);
    CHECK_CODE(train_classifier(x, ones, ClassifierKind::Logistic, 1), ErrorCode::DegenerateLabels);
    CHECK_CODE(train_classifier(x, ones, ClassifierKind::Forest, 1), ErrorCode::DegenerateLabels);
  }

  TEST_CASE("structure recovery and reproducibility") {
    HashingEncoder enc;
    auto g = preferential_attachment(300, 3, 21, 0.5);
    auto s = split_edges(g, 0.1, 1.0, 21);
    auto sp = evaluate_link_prediction(s.train, s.holdout, LinkPredMethod::ShortestPath, enc, 21);
    auto feat = evaluate_link_prediction(s.train, s.holdout, LinkPredMethod::Features, enc, 21);
    CHECK(sp.rank.auc > 0.7);
    CHECK(feat.rank.auc > 0.65);
    CHECK(feat.importances.size() == kPairFeatureCount);
    auto feat2 = evaluate_link_prediction(s.train, s.holdout, LinkPredMethod::Features, enc, 21);
    CHECK(feat2.rank.auc == feat.rank.auc);
    CHECK(feat2.rank.ap == feat.rank.ap);
  }

  TEST_CASE("method names") {
    CHECK(parse_link_pred_method("n2v") == LinkPredMethod::Node2Vec);
    CHECK(to_string(LinkPredMethod::Features) == "feat");
    CHECK_FALSE(parse_link_pred_method("gnn"));
  }
}
