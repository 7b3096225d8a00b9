#include "forge/corpus.hpp"
#include "forge/pipeline.hpp"
#include "forge/serialize.hpp"
#include "support.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

RunConfig mini_config(const std::string& name) {
  auto c = load_config(testing::data_dir() / "config.ini");
  c.workdir = testing::scratch_dir(name);
  return c;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("stage names") {
    for (auto s : kAllStages) CHECK(parse_stage(to_string(s)) == s);
    CHECK_FALSE(parse_stage("train"));
  }

  TEST_CASE("two runs are byte-identical") {
    auto a = mini_config("pipe-a");
    auto b = mini_config("pipe-b");
    b.extract.workers = 1;
    auto ra = run_pipeline(a);
    auto rb = run_pipeline(b);
    CHECK(read_text_file(ra.graph) == read_text_file(rb.graph));
    CHECK(read_text_file(ra.manifest) == read_text_file(rb.manifest));
    REQUIRE(ra.stages.size() == std::size(kAllStages));
    auto manifest = read_json_file(ra.manifest);
    CHECK(manifest["stages"].size() == std::size(kAllStages));
    CHECK(manifest["grounding_violations"].empty());
    CHECK(manifest["config_digest"] == config_digest(a));
    CHECK(ra.stages.back().counts["nodes"].get<int>() > 0);
  }

  TEST_CASE("empty corpus gives an empty graph") {
    auto c = mini_config("pipe-empty");
    c.corpus = c.workdir / "corpus-in";
    fs::create_directories(c.corpus);
    auto r = run_pipeline(c);
    auto g = load_graph(r.graph);
    CHECK(g.node_count() == 0);
    CHECK(g.edge_count() == 0);
    for (const auto& s : r.stages)
      for (const auto& [k, v] : s.counts.items())
        if (v.is_number()) CHECK_MESSAGE(v.get<int>() == 0, to_string(s.stage), ".", k);
  }

  TEST_CASE("invalid config is rejected before any stage") {
    auto dir = testing::scratch_dir("pipe-invalid");
    auto ini = "[run]\ncorpus = " + (testing::data_dir() / "mini").string() + "\nworkdir = " +
               (dir / "out").string() + "\n[scoring]\nw_type = 0.5\n";
    CHECK_CODE(parse_config(ini, dir), ErrorCode::InvariantViolation);
    CHECK_FALSE(fs::exists(dir / "out"));
  }

  TEST_CASE("a stage reruns from its own input") {
    auto c = mini_config("pipe-isolated");
    auto full = run_pipeline(c);
    auto fused = read_text_file(c.workdir / "fused.json");
    auto io = default_io(Stage::Fuse, c);
    io.output = c.workdir / "fused-again.json";
    io.side_output = c.workdir / "fusion_log-again.csv";
    auto r = run_stage(Stage::Fuse, c, io);
    CHECK(read_text_file(io.output) == fused);
    CHECK(r.counts == full.stages[static_cast<int>(Stage::Fuse)].counts);
    CHECK(r.inputs["scored.json"] == path_digest(c.workdir / "scored.json"));
  }

  TEST_CASE("missing input names the stage") {
    auto c = mini_config("pipe-missing");
    try {
      run_stage(Stage::Score, c, default_io(Stage::Score, c));
      FAIL("ran without input");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::IoError);
      CHECK(std::string(e.what()).rfind("score:", 0) == 0);
    }
  }

  TEST_CASE("manifest keeps one entry per stage") {
    auto c = mini_config("pipe-manifest");
    run_pipeline(c);
    auto r = run_stage(Stage::Score, c, default_io(Stage::Score, c));
    record_stage(c, r);
    auto m = read_json_file(c.workdir / "manifest.json");
    CHECK(m["stages"].size() == std::size(kAllStages));
    CHECK(m["stages"]["score"]["counts"] == r.counts);
  }

  TEST_CASE("directory digests ignore traversal order") {
    auto d = testing::scratch_dir("pipe-digest");
    write_text_file(d / "b.txt", "two");
    write_text_file(d / "a.txt", "one");
    auto first = path_digest(d);
    CHECK(first == path_digest(d));
    write_text_file(d / "a.txt", "uno");
    CHECK(first != path_digest(d));
  }
}
