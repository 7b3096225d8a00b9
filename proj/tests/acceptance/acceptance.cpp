#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <mutex>
#include <random>
#include <set>

#include "../fixtures.hpp"
#include "forge/config.hpp"
#include "forge/corpus.hpp"
#include "forge/evaluate.hpp"
#include "forge/extract.hpp"
#include "forge/fuse.hpp"
#include "forge/graph.hpp"
#include "forge/pipeline.hpp"
#include "forge/relate.hpp"
#include "forge/score.hpp"

using namespace forge;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kData = FORGE_TEST_DATA;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void expect(bool ok, std::string what) {
    if (!ok) {
      pass = false;
      notes.push_back(std::move(what));
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("forge-acceptance-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// ---- 1 --------------------------------------------------------------------

struct ReleaseTarget {
  std::string disease;
  std::size_t evidence, entities, nodes, edges;
  std::string density;
  std::map<std::string, std::size_t> edge_types;
  std::map<std::string, std::size_t> grades;
};

Outcome release_statistics() {
  Outcome o;
  const char* dir = std::getenv("FORGE_RELEASE_DIR");
  if (!dir || !*dir) {
    o.expect(false, "FORGE_RELEASE_DIR is not set; the released HCC/CRC graph files are not available");
    return o;
  }
  std::vector<ReleaseTarget> targets{
      {"HCC", 7872, 2456, 10328, 49756, "0.000467",
       {{"LINKED_TO", 17849}, {"SUPPORTS", 13861}, {"EXTENDS", 9263}, {"REFINES", 6115},
        {"CONTRADICTS", 1111}, {"CAUSAL_CHAIN", 856}, {"REPLICATES", 701}},
       {{"A", 60}, {"B", 1732}, {"C", 5886}, {"D", 194}}},
      {"CRC", 6622, 2173, 8795, 39361, "0.000509", {}, {}}};
  auto t0 = Clock::now();
  for (const auto& t : targets) {
    auto path = fs::path(dir) / fmt::format("EvidenceNet-{}.json", t.disease);
    if (!fs::exists(path)) {
      o.expect(false, "missing " + path.string());
      continue;
    }
    auto s = compute_stats(load_graph(path));
    auto tag = [&](const char* what) { return fmt::format("{} {}", t.disease, what); };
    o.expect(s.evidence_count == t.evidence, tag("evidence count"));
    o.expect(s.entity_count == t.entities, tag("entity count"));
    o.expect(s.total_nodes == t.nodes, tag("node count"));
    o.expect(s.total_edges == t.edges, tag("edge count"));
    o.expect(fmt::format("{:.3g}", s.density) == fmt::format("{:.3g}", std::stod(t.density)), tag("density"));
    for (const auto& [type, n] : t.edge_types) o.expect(s.edge_types[type] == n, tag(type.c_str()));
    for (const auto& [grade, n] : t.grades) o.expect(s.grades[grade] == n, tag(("grade " + grade).c_str()));
  }
  o.expect(seconds_since(t0) < 30.0, "runtime over 30 s");
  return o;
}

// ---- 2 --------------------------------------------------------------------

Outcome scoring() {
  Outcome o;
  const double tol = 1e-12;
  auto one = composite_score(1, 1, 1, 1, 1);
  o.expect(std::abs(one.composite - 1.0) <= tol, "all-ones composite");
  auto ex = composite_score(0.9, 0.5, 0.5, 0.5, 0.8);
  const double hand = (0.35 * 0.9 + 0.25 * 0.5 + 0.25 * 0.5 + 0.15 * 0.5) * 0.85 + 0.15 * 0.8;
  o.expect(std::abs(ex.composite - 0.664) <= tol, "worked example 0.664");
  o.expect(std::abs(ex.composite - hand) <= tol, "worked example against hand arithmetic");
  o.expect(ex.grade == Grade::B, "worked example grade");
  o.expect(grade_for(0.8) == Grade::A && grade_for(std::nextafter(0.8, 0.0)) == Grade::B, "A/B boundary");
  o.expect(grade_for(0.6) == Grade::B && grade_for(std::nextafter(0.6, 0.0)) == Grade::C, "B/C boundary");
  o.expect(grade_for(0.4) == Grade::C && grade_for(std::nextafter(0.4, 0.0)) == Grade::D, "C/D boundary");
  return o;
}

// ---- 3 --------------------------------------------------------------------

Section section_of(std::size_t n) {
  Section s;
  s.label = SectionLabel::Results;
  s.text.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.text.push_back(static_cast<char>('a' + i % 26));
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> spans_for(std::size_t n) {
  std::vector<Section> one{section_of(n)};
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : chunk_sections("d", one)) out.emplace_back(c.start_offset, c.end_offset);
  return out;
}

Outcome chunker() {
  Outcome o;
  auto t0 = Clock::now();
  using Spans = std::vector<std::pair<std::size_t, std::size_t>>;
  o.expect(spans_for(3500) == Spans{{0, 3000}, {2700, 3500}}, "3500-character example");
  o.expect(spans_for(7000) == Spans{{0, 3000}, {2700, 5700}, {5400, 7000}}, "7000-character example");
  o.expect(spans_for(499).empty(), "499-character section dropped");
  o.expect(spans_for(500) == Spans{{0, 500}}, "500-character section kept");

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> len(1, 20000);
  std::size_t bad_coverage = 0, bad_overlap = 0, short_chunks = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto n = len(rng);
    auto spans = spans_for(n);
    if (n < 500) {
      if (!spans.empty()) ++short_chunks;
      continue;
    }
    if (spans.empty() || spans.front().first != 0) ++bad_coverage;
    for (std::size_t i = 0; i < spans.size(); ++i) {
      if (spans[i].second - spans[i].first < 500 || spans[i].second > n) ++short_chunks;
      if (i > 0 && (spans[i].first > spans[i - 1].second || spans[i - 1].second - spans[i].first != 300)) {
        ++bad_overlap;
      }
    }
  }
  o.expect(bad_coverage == 0, fmt::format("{} coverage failures", bad_coverage));
  o.expect(bad_overlap == 0, fmt::format("{} overlap failures", bad_overlap));
  o.expect(short_chunks == 0, fmt::format("{} chunks shorter than min_len or out of range", short_chunks));
  o.expect(seconds_since(t0) < 5.0, "runtime over 5 s");
  return o;
}

// ---- 4 --------------------------------------------------------------------

/// Adds one ungrounded copy of the first extracted item to the first
/// non-empty extraction reply.
class InjectingBackend final : public LlmBackend {
 public:
  std::string name() const override { return "inject"; }
  std::string complete(const std::string& system, const std::string& user) override {
    auto reply = inner_.complete(system, user);
    std::lock_guard lock(mutex_);
    if (injected_ || system != prompts::get(prompts::Id::Extract).system) return reply;
    auto j = Json::parse(strip_code_fence(reply));
    auto& items = j["evidence"];
    if (!items.is_array() || items.empty()) return reply;
    auto extra = items[0];
    extra["source_text"] = "Telomerase reactivation doubled survival in every cohort ever studied.";
    items.push_back(extra);
    injected_ = true;
    return j.dump();
  }
  bool injected() const { return injected_; }

 private:
  MockBackend inner_;
  std::mutex mutex_;
  bool injected_ = false;
};

Outcome grounding() {
  Outcome o;
  auto docs = load_corpus_directory(kData / "mini");
  ExtractOptions opt;
  MockBackend mock;
  ExtractionReport clean;
  auto out = extract_documents(docs, "HCC", mock, opt, &clean);
  std::size_t checked = 0, grounded = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto chunks = chunk_sections(docs[i].doc_id, segment_sections(docs[i]));
    for (const auto& e : out[i].evidence) {
      ++checked;
      if (e.origin.chunk_index < chunks.size() && is_grounded(e.source_text, chunks[e.origin.chunk_index].text)) {
        ++grounded;
      }
    }
  }
  o.expect(checked > 0, "mini corpus produced no records");
  o.expect(grounded == checked, fmt::format("{}/{} records grounded", grounded, checked));
  o.expect(clean.grounding_violations.empty(), "violations on the clean run");

  InjectingBackend inject;
  ExtractionReport dirty;
  auto out2 = extract_documents(docs, "HCC", inject, opt, &dirty);
  o.expect(inject.injected(), "no extraction reply to inject into");
  o.expect(dirty.grounding_violations.size() == 1,
           fmt::format("{} GroundingViolations after one injection", dirty.grounding_violations.size()));
  std::size_t emitted = 0;
  for (const auto& d : out2) emitted += d.evidence.size();
  o.expect(emitted == checked, "injected item leaked into the output");
  return o;
}

// ---- 5 --------------------------------------------------------------------

Outcome fusion() {
  Outcome o;
  HashingEncoder enc;
  auto input = fixtures::fusion_records();
  fixtures::FusionExpectation want;
  auto out = fuse_records(input, enc, {}, "2025-01-01T00:00:00Z");
  o.expect(out.records.size() == want.survivors, fmt::format("{} survivors", out.records.size()));
  o.expect(out.log.size() == want.merges, fmt::format("{} merges", out.log.size()));

  std::map<std::string, const EvidenceRecord*> by_id;
  for (const auto& r : out.records) by_id[r.evidence_id] = &r;
  std::map<std::string, const EvidenceRecord*> before;
  for (const auto& r : input) before[r.evidence_id] = &r;

  for (const auto& [canon, absorbed] : want.merged) {
    auto it = by_id.find(canon);
    if (it == by_id.end()) {
      o.expect(false, canon + " is not canonical");
      continue;
    }
    o.expect(it->second->merged_from == absorbed, canon + " provenance");
    o.expect(it->second->version > before[canon]->version, canon + " version did not increase");
    for (const auto& gone : absorbed) o.expect(!by_id.count(gone), gone + " survived");
  }
  for (const auto& r : out.records) {
    o.expect(r.version >= before[r.evidence_id]->version, r.evidence_id + " version decreased");
    o.expect(r.score.composite == before[r.evidence_id]->score.composite, r.evidence_id + " score changed");
  }
  for (const auto& id : want.untouched_pair) o.expect(by_id.count(id) && by_id[id]->version == 1, id + " touched");

  auto again = fuse_records(out.records, enc, {}, "2025-01-02T00:00:00Z");
  o.expect(again.log.empty(), fmt::format("second pass merged {}", again.log.size()));
  o.expect(again.records == out.records, "second pass changed records");
  return o;
}

// ---- 6 --------------------------------------------------------------------

Outcome relations() {
  Outcome o;
  auto lex = PolarityLexicon::defaults();
  auto cases = fixtures::relation_cases();
  o.expect(cases.size() == 12, "fixture size");
  for (const auto& c : cases) {
    for (bool swap : {false, true}) {
      const auto& x = swap ? c.b : c.a;
      const auto& y = swap ? c.a : c.b;
      auto p = heuristic_relation(x, y, c.similarity, lex);
      o.expect(p.relation_type == c.expected, c.name + ": type " + std::string(to_string(p.relation_type)));
      o.expect(p.source_id == c.expected_source, c.name + ": direction");
    }
  }
  std::set<std::string> names;
  for (auto t : kAllRelationTypes) names.insert(std::string(to_string(t)));
  o.expect(names == std::set<std::string>{"SUPPORTS", "CONTRADICTS", "REFINES", "EXTENDS", "REPLICATES", "CAUSAL_CHAIN"},
           "relation type set");
  auto j = relation_to_json(to_edge(RelationProposal{"A", "B", RelationType::Supports, 0.5, "r"}, 0.7, "t"));
  for (const char* bad : {"LINKED_TO", "RELATED", "INHIBITS", ""}) {
    j["relation_type"] = bad;
    bool rejected = false;
    try {
      relation_from_json(j);
    } catch (const Error&) {
      rejected = true;
    }
    o.expect(rejected, std::string("accepted relation type ") + bad);
  }
  return o;
}

// ---- 7 --------------------------------------------------------------------

Outcome auc_oracle() {
  Outcome o;
  std::vector<int> y{1, 1, 0, 0};
  o.expect(rank_metrics(std::vector<double>{0.9, 0.2, 0.8, 0.1}, y).auc == 0.75, "worked 0.75 example");
  std::mt19937_64 rng(11);
  std::size_t mismatches = 0;
  for (int t = 0; t < 200; ++t) {
    std::uniform_int_distribution<int> size(2, 400), levels(2, 20);
    int n = size(rng);
    std::uniform_int_distribution<int> level(0, levels(rng));
    std::bernoulli_distribution coin(0.4);
    std::vector<double> s(n);
    std::vector<int> lab(n);
    for (int i = 0; i < n; ++i) {
      s[i] = level(rng) * 0.05;
      lab[i] = coin(rng) ? 1 : 0;
    }
    lab[0] = 1;
    lab[1] = 0;
    double num = 0, pairs = 0;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (lab[i] == 1 && lab[k] == 0) {
          pairs += 1;
          num += s[i] > s[k] ? 1.0 : s[i] == s[k] ? 0.5 : 0.0;
        }
    if (rank_metrics(s, lab).auc != num / pairs) ++mismatches;
  }
  o.expect(mismatches == 0, fmt::format("{} of 200 sets differ from brute force", mismatches));
  return o;
}

// ---- 8 --------------------------------------------------------------------

Outcome structure_recovery(std::string& detail) {
  Outcome o;
  auto t0 = Clock::now();
  const std::uint64_t seed = 7;
  HashingEncoder enc;
  auto run = [&] {
    auto g = preferential_attachment(300, 3, seed, 0.5);
    auto split = split_edges(g, 0.1, 1.0, seed);
    std::vector<LinkPredResult> r;
    for (auto m : {LinkPredMethod::ShortestPath, LinkPredMethod::Features, LinkPredMethod::Node2Vec}) {
      r.push_back(evaluate_link_prediction(split.train, split.holdout, m, enc, seed));
    }
    return r;
  };
  auto first = run();
  auto second = run();
  const double floor[] = {0.7, 0.65, 0.6};
  for (std::size_t i = 0; i < first.size(); ++i) {
    auto name = std::string(to_string(first[i].method));
    o.expect(first[i].rank.auc > floor[i], fmt::format("{} AUC {:.4f} <= {}", name, first[i].rank.auc, floor[i]));
    o.expect(first[i].rank.auc == second[i].rank.auc && first[i].rank.ap == second[i].rank.ap &&
                 first[i].importances == second[i].importances,
             name + " not reproducible");
  }
  double secs = seconds_since(t0);
  o.expect(secs < 60.0, fmt::format("runtime {:.1f} s", secs));
  detail = fmt::format("sp {:.3f}, feat {:.3f}, n2v {:.3f}", first[0].rank.auc, first[1].rank.auc, first[2].rank.auc);
  return o;
}

// ---- 9 / 10 ---------------------------------------------------------------

RunConfig mini_config(const std::string& name) {
  auto c = load_config(kData / "config.ini");
  c.workdir = scratch(name);
  return c;
}

EntityLink entity(const std::string& id) {
  EntityLink l;
  l.raw_name = id;
  l.semantic_type = SemanticType::Gene;
  l.concept_id = id;
  l.canonical_name = id;
  l.link_score = 1.0;
  l.method = LinkMethod::Exact;
  return l;
}

Outcome proximity_checks(const fs::path& graph_file) {
  Outcome o;
  EvidenceGraph g;
  auto add = [&](const std::string& id, std::vector<std::string> ents) {
    EvidenceRecord r;
    r.evidence_id = id;
    r.evidence.source_text = id;
    g.upsert_evidence(r);
    for (const auto& e : ents) g.upsert_entity_link(id, entity(e));
  };
  add("d", {"a", "b", "c"});
  add("t", {"b", "c", "x"});
  add("u", {"a", "b", "c"});
  add("v", {"y", "z"});
  o.expect(proximity(g, "d", "t") == 0.5, "overlap example 0.5");
  o.expect(proximity(g, "d", "u") == 1.0, "identical neighborhoods");
  o.expect(proximity(g, "d", "v") == 0.0, "disjoint neighborhoods");

  auto mini = load_graph(graph_file);
  GraphIndex index(mini);
  std::vector<std::string> ids;
  for (const auto& [id, n] : mini.evidence()) ids.push_back(id);
  for (const auto& [id, n] : mini.entities()) ids.push_back(id);
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, ids.size() - 1);
  std::size_t asym = 0, nonzero = 0;
  for (int i = 0; i < 100; ++i) {
    const auto& a = ids[pick(rng)];
    const auto& b = ids[pick(rng)];
    double ab = proximity(index, a, b);
    if (ab != proximity(index, b, a) || ab < 0.0 || ab > 1.0) ++asym;
    if (ab > 0) ++nonzero;
  }
  o.expect(asym == 0, fmt::format("{} asymmetric or out-of-range pairs", asym));
  o.expect(nonzero > 0, "every sampled pair scored 0");
  return o;
}

Outcome determinism(fs::path& graph_out) {
  Outcome o;
  auto a = mini_config("run-a");
  auto b = mini_config("run-b");
  auto ra = run_pipeline(a);
  auto rb = run_pipeline(b);
  o.expect(read_text_file(ra.graph) == read_text_file(rb.graph), "graph files differ");
  o.expect(read_text_file(ra.manifest) == read_text_file(rb.manifest), "manifests differ");
  o.expect(load_graph(ra.graph).node_count() > 0, "empty graph");
  graph_out = ra.graph;
  return o;
}

// ---- 11 -------------------------------------------------------------------

Outcome qa_harness() {
  Outcome o;
  HashingEncoder enc;
  auto items = fixtures::qa_items();
  std::size_t correct = 0;
  for (const auto& i : items) correct += i.predicted_class == i.gold_class;
  o.expect(correct == 5, "fixture hand count");
  auto m = qa_metrics(items, enc);
  fixtures::QaExpectation want;
  o.expect(std::abs(m.accuracy - want.accuracy) <= 1e-12, fmt::format("accuracy {}", m.accuracy));
  o.expect(std::abs(m.semsim - want.semsim) <= 1e-12, fmt::format("semsim {}", m.semsim));

  MockBackend mock;
  auto base = fixtures::make("Q-1", "d", "Sorafenib prolonged overall survival in advanced HCC.", 0.41, {"DRUG"});
  base.evidence.intervention = "sorafenib";
  auto rejected = [&](const EvidenceRecord& r) {
    try {
      generate_qa(r, mock);
    } catch (const Error& e) {
      return e.code() == ErrorCode::PreconditionViolation;
    }
    return false;
  };
  o.expect(!rejected(base), "eligible record rejected");
  auto low = base;
  low.score.composite = 0.4;
  o.expect(rejected(low), "composite 0.4 accepted");
  auto shortish = base;
  shortish.evidence.source_text = std::string(30, 's');
  o.expect(rejected(shortish), "30-character source accepted");
  shortish.evidence.source_text = std::string(31, 's');
  o.expect(!rejected(shortish), "31-character source rejected");
  return o;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome(std::string&)> run;
};

bool report(const Criterion& c) {
  auto t0 = Clock::now();
  Outcome o;
  std::string detail;
  try {
    o = c.run(detail);
  } catch (const std::exception& e) {
    o.expect(false, std::string("exception: ") + e.what());
  }
  std::string notes;
  for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
  if (!detail.empty()) notes = notes.empty() ? detail : detail + "; " + notes;
  fmt::print("[{}] {:>2} {} ({:.2f} s){}{}\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds_since(t0),
             notes.empty() ? "" : ": ", notes);
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::err);
  const bool release = argc > 1 && std::strcmp(argv[1], "--release") == 0;
  if (release) return report({1, "released-data statistics", [](std::string&) { return release_statistics(); }}) ? 0 : 1;

  fs::path mini_graph;
  std::vector<Criterion> all{
      {2, "scoring arithmetic and grade boundaries", [](std::string&) { return scoring(); }},
      {3, "chunker examples and invariants", [](std::string&) { return chunker(); }},
      {4, "grounding property", [](std::string&) { return grounding(); }},
      {5, "fusion properties", [](std::string&) { return fusion(); }},
      {6, "relation typing", [](std::string&) { return relations(); }},
      {7, "rank-metric oracle", [](std::string&) { return auc_oracle(); }},
      {8, "structure recovery", [](std::string& d) { return structure_recovery(d); }},
      {10, "end-to-end determinism", [&](std::string&) { return determinism(mini_graph); }},
      {9, "proximity", [&](std::string&) { return proximity_checks(mini_graph); }},
      {11, "QA harness", [](std::string&) { return qa_harness(); }},
  };
  fmt::print("[SKIP]  1 released-data statistics: run with --release\n");
  int failed = 0;
  for (const auto& c : all) failed += report(c) ? 0 : 1;
  fmt::print("{} of {} criteria passed\n", all.size() - failed, all.size());
  return failed == 0 ? 0 : 1;
}
