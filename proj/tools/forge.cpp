#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "forge/config.hpp"
#include "forge/error.hpp"
#include "forge/evaluate.hpp"
#include "forge/graph.hpp"
#include "forge/pipeline.hpp"
#include "forge/serialize.hpp"

namespace fs = std::filesystem;
using namespace forge;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

Globals g_opts;

RunConfig base_config() {
  if (g_opts.verbose) spdlog::set_level(spdlog::level::info);
  RunConfig c = g_opts.config.empty() ? RunConfig{} : load_config(g_opts.config);
  if (g_opts.seed) c.seed = *g_opts.seed;
  return c;
}

fs::path or_default(const std::string& flag, const fs::path& fallback) { return flag.empty() ? fallback : fs::path(flag); }

void print_counts(const StageResult& r) {
  std::cout << canonical_dump(Json{{"stage", std::string(to_string(r.stage))}, {"counts", r.counts}});
}

void finish_stage(RunConfig c, const StageResult& r, const fs::path& out) {
  c.workdir = out.parent_path().empty() ? fs::path(".") : out.parent_path();
  record_stage(c, r);
  print_counts(r);
}

struct BackendFlags {
  std::string name;
  std::string fixtures;

  void add(CLI::App* cmd) {
    cmd->add_option("--backend", name, "LLM backend: mock or http");
    cmd->add_option("--fixtures", fixtures, "mock backend fixture directory");
  }
  void apply(RunConfig& c) const {
    if (!name.empty()) c.backend.name = name;
    if (!fixtures.empty()) c.backend.fixtures = fixtures;
  }
};

EvidenceGraph open_graph(const std::string& flag, const RunConfig& c) {
  return load_graph(or_default(flag, default_io(Stage::Build, c).output));
}

void emit_error(std::string_view code, std::string_view message) {
  std::cerr << Json{{"error", code}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_st("forge"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Evidence graph construction and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", g_opts.config, "run configuration (INI)");
  app.add_option("--seed", g_opts.seed, "global seed");
  app.add_flag("-v,--verbose", g_opts.verbose, "log progress to stderr");

  // ingest
  std::string ingest_corpus, ingest_out;
  auto* ingest = app.add_subcommand("ingest", "load a corpus directory");
  ingest->add_option("--corpus", ingest_corpus, "corpus directory");
  ingest->add_option("--out", ingest_out, "corpus JSON");
  ingest->callback([&] {
    auto c = base_config();
    StageIo io = default_io(Stage::Ingest, c);
    io.input = or_default(ingest_corpus, io.input);
    io.output = or_default(ingest_out, io.output);
    if (io.input.empty()) fail(ErrorCode::PreconditionViolation, "no corpus given");
    finish_stage(c, run_stage(Stage::Ingest, c, io), io.output);
  });

  // extract
  std::string extract_corpus, extract_out, extract_disease;
  std::optional<std::size_t> extract_workers;
  BackendFlags extract_backend;
  auto* extract = app.add_subcommand("extract", "extract candidate evidence with an LLM backend");
  extract->add_option("--corpus", extract_corpus, "corpus JSON or corpus directory");
  extract->add_option("--out", extract_out, "candidates JSON");
  extract->add_option("--disease", extract_disease, "disease label");
  extract->add_option("--workers", extract_workers, "concurrent chunk requests");
  extract_backend.add(extract);
  extract->callback([&] {
    auto c = base_config();
    if (!extract_disease.empty()) c.disease = extract_disease;
    if (extract_workers) c.extract.workers = *extract_workers;
    extract_backend.apply(c);
    StageIo io = default_io(Stage::Extract, c);
    io.output = or_default(extract_out, io.output);
    io.input = or_default(extract_corpus, io.input);
    if (fs::is_directory(io.input)) {
      StageIo pre{io.input, io.output.parent_path() / "corpus.json", std::nullopt};
      finish_stage(c, run_stage(Stage::Ingest, c, pre), pre.output);
      std::cout << '\n';
      io.input = pre.output;
    }
    finish_stage(c, run_stage(Stage::Extract, c, io), io.output);
  });

  // normalize
  std::string norm_vocab, norm_in, norm_out;
  auto* normalize = app.add_subcommand("normalize", "link entities and assign evidence ids");
  normalize->add_option("--vocab", norm_vocab, "vocabulary TSV");
  normalize->add_option("--in", norm_in, "candidates JSON");
  normalize->add_option("--out", norm_out, "records JSON");
  normalize->callback([&] {
    auto c = base_config();
    if (!norm_vocab.empty()) c.vocabulary = norm_vocab;
    if (c.vocabulary.empty()) fail(ErrorCode::PreconditionViolation, "no vocabulary given");
    StageIo io = default_io(Stage::Normalize, c);
    io.input = or_default(norm_in, io.input);
    io.output = or_default(norm_out, io.output);
    finish_stage(c, run_stage(Stage::Normalize, c, io), io.output);
  });

  // score
  std::string score_in, score_out;
  auto* score = app.add_subcommand("score", "compute composite scores and grades");
  score->add_option("--in", score_in, "records JSON");
  score->add_option("--out", score_out, "records JSON");
  score->callback([&] {
    auto c = base_config();
    StageIo io = default_io(Stage::Score, c);
    io.input = or_default(score_in, io.input);
    io.output = or_default(score_out, io.output);
    finish_stage(c, run_stage(Stage::Score, c, io), io.output);
  });

  // fuse
  std::string fuse_in, fuse_out, fuse_report;
  auto* fuse = app.add_subcommand("fuse", "merge duplicate evidence");
  fuse->add_option("--in", fuse_in, "records JSON");
  fuse->add_option("--out", fuse_out, "records JSON");
  fuse->add_option("--report", fuse_report, "merge log CSV");
  fuse->callback([&] {
    auto c = base_config();
    StageIo io = default_io(Stage::Fuse, c);
    io.input = or_default(fuse_in, io.input);
    io.output = or_default(fuse_out, io.output);
    io.side_output = fuse_report.empty() ? io.output.parent_path() / "fusion_log.csv" : fs::path(fuse_report);
    finish_stage(c, run_stage(Stage::Fuse, c, io), io.output);
  });

  // relate
  std::string relate_in, relate_out, relate_records_out;
  bool relate_verify = false, relate_no_verify = false;
  BackendFlags relate_backend;
  auto* relate = app.add_subcommand("relate", "type relations between evidence records");
  relate->add_option("--in", relate_in, "records JSON");
  relate->add_option("--out", relate_out, "edge list JSON");
  relate->add_option("--records-out", relate_records_out, "records JSON with relations attached");
  relate->add_flag("--verify", relate_verify, "confirm candidate relations with the backend");
  relate->add_flag("--no-verify", relate_no_verify, "heuristic typing only");
  relate_backend.add(relate);
  relate->callback([&] {
    auto c = base_config();
    relate_backend.apply(c);
    if (relate_verify) c.verify_relations = true;
    if (relate_no_verify) c.verify_relations = false;
    StageIo io = default_io(Stage::Relate, c);
    io.input = or_default(relate_in, io.input);
    if (!relate_out.empty()) {
      io.side_output = relate_out;
      io.output = relate_records_out.empty() ? io.side_output->parent_path() / "related.json" : fs::path(relate_records_out);
    } else if (!relate_records_out.empty()) {
      io.output = relate_records_out;
    }
    finish_stage(c, run_stage(Stage::Relate, c, io), io.output);
  });

  // build
  std::string build_in, build_edges, build_out;
  auto* build = app.add_subcommand("build", "assemble the evidence graph");
  build->add_option("--in", build_in, "records JSON");
  build->add_option("--edges", build_edges, "edge list JSON replacing the records' relations");
  build->add_option("--out", build_out, "graph JSON");
  build->callback([&] {
    auto c = base_config();
    StageIo io = default_io(Stage::Build, c);
    io.input = or_default(build_in, io.input);
    io.output = or_default(build_out, io.output);
    if (build_edges.empty()) {
      finish_stage(c, run_stage(Stage::Build, c, io), io.output);
      return;
    }
    auto records = records_from_json(read_json_file(io.input));
    std::map<std::string, EvidenceRecord*> by_id;
    for (auto& r : records) {
      r.evidence_relations.clear();
      by_id[r.evidence_id] = &r;
    }
    for (const auto& e : read_json_file(build_edges)) {
      auto edge = relation_from_json(e);
      auto it = by_id.find(edge.source_id);
      if (it == by_id.end()) fail(ErrorCode::UnknownEndpoint, "build: edge source " + edge.source_id);
      it->second->evidence_relations.push_back(edge);
    }
    GraphMetadata meta;
    meta.disease = c.disease;
    meta.creator = c.creator;
    meta.updated_at = c.timestamp;
    auto graph = build_graph(records, meta);
    save_graph(graph, io.output);
    StageResult r;
    r.stage = Stage::Build;
    r.inputs = {{io.input.filename().string(), path_digest(io.input)},
                {fs::path(build_edges).filename().string(), path_digest(build_edges)}};
    r.outputs = {{io.output.filename().string(), path_digest(io.output)}};
    r.counts = {{"evidence_nodes", graph.evidence().size()},
                {"entity_nodes", graph.entities().size()},
                {"nodes", graph.node_count()},
                {"edges", graph.edge_count()}};
    finish_stage(c, r, io.output);
  });

  // stats
  std::string stats_graph, stats_records, stats_format = "table";
  auto* stats = app.add_subcommand("stats", "graph and record statistics");
  stats->add_option("--graph", stats_graph, "graph JSON");
  stats->add_option("--records", stats_records, "records JSON for per-record statistics");
  stats->add_option("--format", stats_format, "table or csv")->check(CLI::IsMember({"table", "csv"}));
  stats->callback([&] {
    auto c = base_config();
    std::vector<std::pair<std::string, std::string>> rows;
    auto num = [](double v) { return fmt::format("{:.6g}", v); };
    auto add_hist = [&](const std::string& prefix, const std::map<std::string, std::size_t>& h) {
      for (const auto& [k, v] : h) rows.emplace_back(prefix + "." + k, std::to_string(v));
    };
    auto s = compute_stats(open_graph(stats_graph, c));
    rows.emplace_back("evidence_nodes", std::to_string(s.evidence_count));
    rows.emplace_back("entity_nodes", std::to_string(s.entity_count));
    rows.emplace_back("total_nodes", std::to_string(s.total_nodes));
    rows.emplace_back("total_edges", std::to_string(s.total_edges));
    rows.emplace_back("density", fmt::format("{:.3g}", s.density));
    add_hist("edge_type", s.edge_types);
    add_hist("entity_type", s.entity_types);
    add_hist("grade", s.grades);
    add_hist("study_design", s.study_designs);
    add_hist("clinical_stage", s.clinical_stages);
    rows.emplace_back("avg_linked_entities", num(s.avg_linked_entities));
    rows.emplace_back("median_linked_entities", num(s.median_linked_entities));
    rows.emplace_back("avg_relations", num(s.avg_relations));
    rows.emplace_back("median_relations", num(s.median_relations));
    if (!stats_records.empty()) {
      auto records = records_from_json(read_json_file(stats_records));
      auto r = compute_record_stats(records);
      rows.emplace_back("records", std::to_string(r.records));
      rows.emplace_back("record.avg_core_entities", num(r.avg_core_entities));
      rows.emplace_back("record.median_core_entities", num(r.median_core_entities));
      rows.emplace_back("record.avg_linked_entities", num(r.avg_linked_entities));
      rows.emplace_back("record.median_linked_entities", num(r.median_linked_entities));
      rows.emplace_back("record.avg_relations", num(r.avg_relations));
      rows.emplace_back("record.median_relations", num(r.median_relations));
      rows.emplace_back("record.avg_merged_all", num(r.avg_merged_all));
      rows.emplace_back("record.avg_merged_among_merged", num(r.avg_merged_among));
      rows.emplace_back("record.pct_version_gt1", num(r.share_version_gt1));
      rows.emplace_back("record.avg_composite", num(r.avg_composite));
      rows.emplace_back("record.median_composite", num(r.median_composite));
      rows.emplace_back("record.min_composite", num(r.min_composite));
      rows.emplace_back("record.max_composite", num(r.max_composite));
      add_hist("record.grade", r.grades);
      rows.emplace_back("record.grade_mismatches", std::to_string(r.grade_mismatches));
      rows.emplace_back("record.pct_with_comparison", num(r.share_with_comparison));
      rows.emplace_back("record.pct_with_p_value", num(r.share_with_p_value));
    }
    if (stats_format == "csv") {
      std::cout << "metric,value\n";
      for (const auto& [k, v] : rows) std::cout << k << ',' << v << '\n';
    } else {
      std::size_t width = 0;
      for (const auto& row : rows) width = std::max(width, row.first.size());
      for (const auto& [k, v] : rows) std::cout << fmt::format("{:<{}}  {}\n", k, width, v);
    }
  });

  // query
  std::string query_graph, query_text, query_design;
  std::optional<std::size_t> query_k;
  std::optional<double> query_min;
  auto* query = app.add_subcommand("query", "retrieve evidence by text similarity");
  query->add_option("--graph", query_graph, "graph JSON");
  query->add_option("--text", query_text, "query text")->required();
  query->add_option("-k", query_k, "number of results");
  query->add_option("--min-score", query_min, "minimum composite score");
  query->add_option("--design", query_design, "study design filter");
  query->callback([&] {
    auto c = base_config();
    auto graph = open_graph(query_graph, c);
    auto encoder = make_encoder(c.encoder);
    RetrievalFilter filter;
    filter.min_score = query_min;
    if (!query_design.empty()) filter.study_design = query_design;
    Json out = Json::array();
    for (const auto& hit : retrieve_context(graph, query_text, query_k.value_or(c.eval.top_k), *encoder, filter))
      out.push_back({{"evidence_id", hit.evidence_id}, {"similarity", hit.similarity}, {"text", hit.text}});
    std::cout << canonical_dump(out);
  });

  // proximity
  std::string prox_graph, prox_a;
  std::vector<std::string> prox_b;
  auto* prox = app.add_subcommand("proximity", "neighborhood overlap between a node and targets");
  prox->add_option("--graph", prox_graph, "graph JSON");
  prox->add_option("--a", prox_a, "node id")->required();
  prox->add_option("--b", prox_b, "target node id (repeatable)")->required();
  prox->callback([&] {
    auto c = base_config();
    auto graph = open_graph(prox_graph, c);
    GraphIndex index(graph);
    std::string out = "a,b,proximity\n";
    for (const auto& b : prox_b) out += fmt::format("{},{},{:.6g}\n", prox_a, b, proximity(index, prox_a, b));
    std::cout << out;
  });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluation harnesses");
  eval->require_subcommand(1);

  std::string lp_graph, lp_future;
  std::vector<std::string> lp_methods;
  std::optional<int> lp_synthetic;
  auto* linkpred = eval->add_subcommand("linkpred", "link prediction on entity pairs");
  linkpred->add_option("--graph", lp_graph, "training graph JSON");
  linkpred->add_option("--future", lp_future, "records JSON from a later period");
  linkpred->add_option("--method", lp_methods, "sp, feat or n2v (repeatable; default all)");
  linkpred->add_option("--synthetic", lp_synthetic, "use a seeded preferential-attachment graph with this many nodes");
  linkpred->callback([&] {
    auto c = base_config();
    auto encoder = make_encoder(c.encoder);
    std::vector<LinkPredMethod> methods;
    for (const auto& m : lp_methods) {
      auto parsed = parse_link_pred_method(m);
      if (!parsed) fail(ErrorCode::PreconditionViolation, "unknown method " + m);
      methods.push_back(*parsed);
    }
    if (methods.empty()) methods = {LinkPredMethod::ShortestPath, LinkPredMethod::Features, LinkPredMethod::Node2Vec};

    PairGraph train;
    HoldoutSet holdout;
    if (lp_synthetic) {
      auto split = split_edges(preferential_attachment(*lp_synthetic, 3, c.seed, 0.5), c.eval.holdout_fraction,
                               c.eval.negative_ratio, c.seed);
      train = std::move(split.train);
      holdout = std::move(split.holdout);
    } else {
      auto projected = entity_projection(open_graph(lp_graph, c));
      if (!lp_future.empty()) {
        auto future = records_from_json(read_json_file(lp_future));
        holdout = build_temporal_holdout(projected, future, c.eval.negative_ratio, c.seed);
        train = std::move(projected);
      } else {
        auto split = split_edges(projected, c.eval.holdout_fraction, c.eval.negative_ratio, c.seed);
        train = std::move(split.train);
        holdout = std::move(split.holdout);
      }
    }
    if (holdout.cold_start > 0) spdlog::warn("{} future pairs involve entities absent from the graph", holdout.cold_start);
    std::cout << "method,AUC,AP,n_pos,n_neg\n";
    for (auto m : methods) {
      auto r = evaluate_link_prediction(train, holdout, m, *encoder, c.seed, c.eval.linkpred);
      std::cout << fmt::format("{},{:.6f},{:.6f},{},{}\n", to_string(m), r.rank.auc, r.rank.ap, r.rank.n_pos, r.rank.n_neg);
    }
  });

  std::string qa_graph, qa_file, qa_background, qa_predictions;
  std::vector<std::string> qa_modes;
  BackendFlags qa_backend;
  auto* qa = eval->add_subcommand("qa", "yes/no question answering with graph context");
  qa->add_option("--graph", qa_graph, "graph JSON");
  qa->add_option("--qa", qa_file, "QA items JSON")->required();
  qa->add_option("--mode", qa_modes, "baseline, evidence or evidence+background (repeatable; default all)");
  qa->add_option("--background", qa_background, "JSON object: question -> list of background passages");
  qa->add_option("--predictions", qa_predictions, "write answered items to this file");
  qa_backend.add(qa);
  qa->callback([&] {
    auto c = base_config();
    qa_backend.apply(c);
    std::vector<QaMode> modes;
    for (const auto& m : qa_modes) {
      auto parsed = parse_qa_mode(m);
      if (!parsed) fail(ErrorCode::PreconditionViolation, "unknown mode " + m);
      modes.push_back(*parsed);
    }
    if (modes.empty()) modes = {QaMode::Baseline, QaMode::Evidence, QaMode::EvidenceBackground};

    auto items = qa_items_from_json(read_json_file(qa_file));
    auto encoder = make_encoder(c.encoder);
    auto backend = make_backend(c.backend);
    Json background = qa_background.empty() ? Json::object() : read_json_file(qa_background);
    std::optional<EvidenceGraph> graph;
    std::optional<RetrievalIndex> index;
    auto needs_graph = std::any_of(modes.begin(), modes.end(), [](QaMode m) { return m != QaMode::Baseline; });
    if (needs_graph) {
      graph = open_graph(qa_graph, c);
      index.emplace(*graph, *encoder);
    }

    Json predictions = Json::object();
    std::cout << "mode,accuracy,semsim\n";
    for (auto mode : modes) {
      std::vector<QaItem> answered;
      for (const auto& item : items) {
        QaContexts ctx;
        if (mode != QaMode::Baseline) {
          for (const auto& hit : index->query(item.question, c.eval.top_k)) ctx.evidence.push_back(hit.text);
        }
        if (mode == QaMode::EvidenceBackground && background.contains(item.question)) {
          ctx.background = background.at(item.question).get<std::vector<std::string>>();
        }
        if (mode != QaMode::Baseline && ctx.empty()) ctx.background.push_back("(none)");
        answered.push_back(answer_question(item, ctx, mode, *backend));
      }
      auto m = qa_metrics(answered, *encoder);
      std::cout << fmt::format("{},{:.6f},{:.6f}\n", to_string(mode), m.accuracy, m.semsim);
      predictions[std::string(to_string(mode))] = qa_items_to_json(answered);
    }
    if (!qa_predictions.empty()) write_text_file(qa_predictions, canonical_dump(predictions));
  });

  std::string gen_records, gen_out;
  std::size_t gen_n = 50;
  BackendFlags gen_backend;
  auto* gen = eval->add_subcommand("gen-qa", "generate yes/no questions from eligible records");
  gen->add_option("--records", gen_records, "records JSON")->required();
  gen->add_option("--out", gen_out, "QA items JSON")->required();
  gen->add_option("-n", gen_n, "maximum number of items");
  gen_backend.add(gen);
  gen->callback([&] {
    auto c = base_config();
    gen_backend.apply(c);
    auto records = records_from_json(read_json_file(gen_records));
    std::vector<const EvidenceRecord*> eligible;
    for (const auto& r : records)
      if (qa_eligible(r, c.eval.qa)) eligible.push_back(&r);
    std::mt19937_64 rng(c.seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    if (eligible.size() > gen_n) eligible.resize(gen_n);
    auto backend = make_backend(c.backend);
    std::vector<QaItem> items;
    for (const auto* r : eligible) items.push_back(generate_qa(*r, *backend, c.eval.qa));
    write_text_file(gen_out, canonical_dump(qa_items_to_json(items)));
    std::cout << canonical_dump(Json{{"eligible", eligible.size()}, {"items", items.size()}});
  });

  // run
  std::string run_workdir;
  auto* run = app.add_subcommand("run", "every stage from corpus to graph");
  run->add_option("--workdir", run_workdir, "output directory");
  run->callback([&] {
    if (g_opts.config.empty()) fail(ErrorCode::PreconditionViolation, "run needs --config");
    auto c = base_config();
    if (!run_workdir.empty()) c.workdir = run_workdir;
    auto result = run_pipeline(c);
    Json stages = Json::object();
    for (const auto& s : result.stages) stages[std::string(to_string(s.stage))] = s.counts;
    std::cout << canonical_dump(
        Json{{"graph", result.graph.string()}, {"manifest", result.manifest.string()}, {"stages", stages}});
  });

  // validate
  auto* validate = app.add_subcommand("validate", "check a configuration and print resolved settings");
  validate->callback([&] {
    if (g_opts.config.empty()) fail(ErrorCode::PreconditionViolation, "validate needs --config");
    auto c = base_config();
    std::cout << canonical_dump(Json{{"config", config_to_json(c)}, {"digest", config_digest(c)}, {"warnings", c.warnings}});
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error("UsageError", e.what());
    return 2;
  } catch (const Error& e) {
    emit_error(to_string(e.code()), e.what());
    return 1;
  } catch (const Json::exception& e) {
    emit_error("SchemaMismatch", e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error("InternalError", e.what());
    return 1;
  }
  return 0;
}
