#include "forge/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <charconv>
#include <functional>
#include <map>
#include <sstream>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

namespace pt = boost::property_tree;

struct Setter {
  std::function<void(RunConfig&, const std::string&)> apply;
};

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

long long to_int(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not an integer");
  return v;
}

bool to_bool(const std::string& s) {
  auto t = text::to_lower(s);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw std::invalid_argument("not a boolean");
}

std::vector<ScoringConfig::PBucket> to_ladder(const std::string& s) {
  std::vector<ScoringConfig::PBucket> out;
  for (const auto& part : text::split(s, ',')) {
    auto item = text::trim(part);
    if (item.empty()) continue;
    auto colon = item.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("expected max_p:score pairs");
    out.push_back({to_double(text::trim(item.substr(0, colon))), to_double(text::trim(item.substr(colon + 1)))});
  }
  return out;
}

using Table = std::map<std::string, Setter>;

Table make_table() {
  Table t;
  auto str = [&](std::string key, std::string RunConfig::*field) {
    t[key] = {[field](RunConfig& c, const std::string& v) { c.*field = v; }};
  };
  auto num = [&](std::string key, std::function<double&(RunConfig&)> ref) {
    t[key] = {[ref](RunConfig& c, const std::string& v) { ref(c) = to_double(v); }};
  };
  auto count = [&](std::string key, std::function<void(RunConfig&, long long)> set) {
    t[key] = {[set](RunConfig& c, const std::string& v) { set(c, to_int(v)); }};
  };

  str("run.disease", &RunConfig::disease);
  str("run.corpus", &RunConfig::corpus_raw);
  str("run.vocabulary", &RunConfig::vocabulary_raw);
  str("run.lexicon", &RunConfig::lexicon_raw);
  t["run.workdir"] = {[](RunConfig& c, const std::string& v) { c.workdir = v; }};
  t["run.seed"] = {[](RunConfig& c, const std::string& v) {
    auto n = to_int(v);
    if (n < 0) throw std::invalid_argument("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(n);
  }};
  str("run.timestamp", &RunConfig::timestamp);
  str("run.creator", &RunConfig::creator);
  str("encoder.name", &RunConfig::encoder);

  t["backend.name"] = {[](RunConfig& c, const std::string& v) { c.backend.name = v; }};
  t["backend.fixtures"] = {[](RunConfig& c, const std::string& v) { c.backend.fixtures = v; }};
  t["backend.endpoint"] = {[](RunConfig& c, const std::string& v) { c.backend.endpoint = v; }};
  t["backend.model"] = {[](RunConfig& c, const std::string& v) { c.backend.model = v; }};
  t["backend.api_key_env"] = {[](RunConfig& c, const std::string& v) { c.backend.api_key_env = v; }};

  count("chunking.window", [](RunConfig& c, long long v) { c.extract.chunking.window = static_cast<long>(v); });
  count("chunking.overlap", [](RunConfig& c, long long v) { c.extract.chunking.overlap = static_cast<long>(v); });
  count("chunking.min_len", [](RunConfig& c, long long v) { c.extract.chunking.min_len = static_cast<long>(v); });
  count("extract.workers", [](RunConfig& c, long long v) {
    if (v < 1) throw std::invalid_argument("workers must be >= 1");
    c.extract.workers = static_cast<std::size_t>(v);
  });
  t["extract.enrich"] = {[](RunConfig& c, const std::string& v) { c.extract.enrich = to_bool(v); }};

  num("fuzzy.threshold", [](RunConfig& c) -> double& { return c.fuzzy.threshold; });
  num("fuzzy.margin", [](RunConfig& c) -> double& { return c.fuzzy.margin; });

  const char* weight_names[] = {"w_type", "w_impact", "w_stat", "w_sample"};
  for (std::size_t i = 0; i < 4; ++i) {
    num(fmt::format("scoring.{}", weight_names[i]), [i](RunConfig& c) -> double& { return c.scoring.weights[i]; });
  }
  for (std::size_t i = 0; i < 4; ++i) {
    num(fmt::format("scoring.quartile.q{}", i + 1), [i](RunConfig& c) -> double& { return c.scoring.quartile_values[i]; });
  }
  for (auto d : kAllStudyDesigns) {
    num(fmt::format("scoring.design.{}", to_string(d)), [d](RunConfig& c) -> double& { return c.scoring.design_ladder[d]; });
  }
  num("scoring.llm_lambda", [](RunConfig& c) -> double& { return c.scoring.llm_lambda; });
  num("scoring.grade_a", [](RunConfig& c) -> double& { return c.scoring.grade_a; });
  num("scoring.grade_b", [](RunConfig& c) -> double& { return c.scoring.grade_b; });
  num("scoring.grade_c", [](RunConfig& c) -> double& { return c.scoring.grade_c; });
  num("scoring.impact_factor_cap", [](RunConfig& c) -> double& { return c.scoring.impact_factor_cap; });
  num("scoring.citation_cap", [](RunConfig& c) -> double& { return c.scoring.citation_cap; });
  num("scoring.impact_neutral", [](RunConfig& c) -> double& { return c.scoring.impact_neutral; });
  num("scoring.p_floor", [](RunConfig& c) -> double& { return c.scoring.p_floor; });
  num("scoring.stat_neutral", [](RunConfig& c) -> double& { return c.scoring.stat_neutral; });
  num("scoring.sample_cap", [](RunConfig& c) -> double& { return c.scoring.sample_cap; });
  num("scoring.sample_absent", [](RunConfig& c) -> double& { return c.scoring.sample_absent; });
  t["scoring.p_ladder"] = {[](RunConfig& c, const std::string& v) { c.scoring.p_ladder = to_ladder(v); }};

  num("fusion.dup_threshold", [](RunConfig& c) -> double& { return c.fusion.dup_threshold; });
  num("fusion.entity_overlap_min", [](RunConfig& c) -> double& { return c.fusion.entity_overlap_min; });

  num("relation.sim_min", [](RunConfig& c) -> double& { return c.relation.sim_min; });
  num("relation.overlap_min", [](RunConfig& c) -> double& { return c.relation.overlap_min; });
  num("relation.refine_cut", [](RunConfig& c) -> double& { return c.relation.refine_cut; });
  num("relation.verify_cut", [](RunConfig& c) -> double& { return c.relation.verify_cut; });
  num("relation.high_sim_cut", [](RunConfig& c) -> double& { return c.relation.high_sim_cut; });
  num("relation.same_term_min", [](RunConfig& c) -> double& { return c.relation.same_term_min; });
  t["relation.verify"] = {[](RunConfig& c, const std::string& v) { c.verify_relations = to_bool(v); }};

  num("eval.negative_ratio", [](RunConfig& c) -> double& { return c.eval.negative_ratio; });
  num("eval.holdout_fraction", [](RunConfig& c) -> double& { return c.eval.holdout_fraction; });
  count("eval.top_k", [](RunConfig& c, long long v) {
    if (v < 1) throw std::invalid_argument("top_k must be >= 1");
    c.eval.top_k = static_cast<std::size_t>(v);
  });
  num("eval.qa_min_composite", [](RunConfig& c) -> double& { return c.eval.qa.min_composite; });
  count("eval.qa_min_source_len", [](RunConfig& c, long long v) {
    if (v < 0) throw std::invalid_argument("must be >= 0");
    c.eval.qa.min_source_len = static_cast<std::size_t>(v);
  });
  t["eval.classifier"] = {[](RunConfig& c, const std::string& v) {
    if (v == "forest") c.eval.linkpred.feature_classifier = ClassifierKind::Forest;
    else if (v == "logistic") c.eval.linkpred.feature_classifier = ClassifierKind::Logistic;
    else throw std::invalid_argument("expected forest or logistic");
  }};
  num("eval.train_hide_fraction", [](RunConfig& c) -> double& { return c.eval.linkpred.train_hide_fraction; });
  count("eval.n2v_dims", [](RunConfig& c, long long v) { c.eval.linkpred.node2vec.dims = static_cast<int>(v); });
  count("eval.n2v_walk_len", [](RunConfig& c, long long v) { c.eval.linkpred.node2vec.walk_len = static_cast<int>(v); });
  count("eval.n2v_walks_per_node",
        [](RunConfig& c, long long v) { c.eval.linkpred.node2vec.walks_per_node = static_cast<int>(v); });
  count("eval.n2v_window", [](RunConfig& c, long long v) { c.eval.linkpred.node2vec.window = static_cast<int>(v); });
  count("eval.n2v_epochs", [](RunConfig& c, long long v) { c.eval.linkpred.node2vec.epochs = static_cast<int>(v); });
  num("eval.n2v_p", [](RunConfig& c) -> double& { return c.eval.linkpred.node2vec.p; });
  num("eval.n2v_q", [](RunConfig& c) -> double& { return c.eval.linkpred.node2vec.q; });
  return t;
}

const Table& table() {
  static const Table t = make_table();
  return t;
}

std::filesystem::path resolve(const std::string& raw, const std::filesystem::path& base) {
  if (raw.empty()) return {};
  std::filesystem::path p(raw);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::vector<std::string> config_problems(const RunConfig& c, bool check_paths) {
  std::vector<std::string> out;
  auto unit = [&](const char* name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) out.push_back(fmt::format("{} = {} is outside [0, 1]", name, v));
  };
  if (text::trim(c.disease).empty()) out.push_back("run.disease is empty");
  if (c.timestamp.empty()) out.push_back("run.timestamp is empty");
  if (c.corpus_raw.empty()) out.push_back("run.corpus is required");
  if (c.vocabulary_raw.empty()) out.push_back("run.vocabulary is required");
  if (check_paths) {
    if (!c.corpus_raw.empty() && !std::filesystem::is_directory(c.corpus)) {
      out.push_back("run.corpus: no directory " + c.corpus.string());
    }
    if (!c.vocabulary_raw.empty() && !std::filesystem::is_regular_file(c.vocabulary)) {
      out.push_back("run.vocabulary: no file " + c.vocabulary.string());
    }
    if (!c.lexicon_raw.empty() && !std::filesystem::is_regular_file(c.lexicon)) {
      out.push_back("run.lexicon: no file " + c.lexicon.string());
    }
    if (!c.backend.fixtures.empty() && !std::filesystem::is_directory(c.backend.fixtures)) {
      out.push_back("backend.fixtures: no directory " + c.backend.fixtures);
    }
  }
  try {
    make_encoder(c.encoder);
  } catch (const std::exception& e) {
    out.push_back(std::string("encoder.name: ") + e.what());
  }
  if (c.backend.name != "mock" && c.backend.name != "http") out.push_back("backend.name must be mock or http");
  if (c.backend.name == "http" && c.backend.endpoint.empty()) out.push_back("backend.endpoint is required for http");

  const auto& ch = c.extract.chunking;
  if (ch.window <= 0) out.push_back("chunking.window must be positive");
  if (ch.overlap < 0 || ch.overlap >= ch.window) out.push_back("chunking.overlap must be in [0, window)");
  if (ch.min_len < 0 || ch.min_len > ch.window) out.push_back("chunking.min_len must be in [0, window]");

  unit("fuzzy.threshold", c.fuzzy.threshold);
  unit("fuzzy.margin", c.fuzzy.margin);
  for (auto& p : c.scoring.problems()) out.push_back(p);
  unit("fusion.dup_threshold", c.fusion.dup_threshold);
  unit("fusion.entity_overlap_min", c.fusion.entity_overlap_min);
  unit("relation.sim_min", c.relation.sim_min);
  unit("relation.overlap_min", c.relation.overlap_min);
  unit("relation.refine_cut", c.relation.refine_cut);
  unit("relation.verify_cut", c.relation.verify_cut);
  unit("relation.high_sim_cut", c.relation.high_sim_cut);
  unit("relation.same_term_min", c.relation.same_term_min);

  if (!(c.eval.negative_ratio > 0)) out.push_back("eval.negative_ratio must be positive");
  if (!(c.eval.holdout_fraction > 0 && c.eval.holdout_fraction < 1)) out.push_back("eval.holdout_fraction must be in (0, 1)");
  unit("eval.qa_min_composite", c.eval.qa.min_composite);
  if (!(c.eval.linkpred.train_hide_fraction > 0 && c.eval.linkpred.train_hide_fraction < 1)) {
    out.push_back("eval.train_hide_fraction must be in (0, 1)");
  }
  const auto& n2v = c.eval.linkpred.node2vec;
  if (n2v.dims < 1 || n2v.walk_len < 1 || n2v.walks_per_node < 1 || n2v.window < 1 || n2v.epochs < 1) {
    out.push_back("eval.n2v_* sizes must be positive");
  }
  if (!(n2v.p > 0 && n2v.q > 0)) out.push_back("eval.n2v_p and eval.n2v_q must be positive");
  return out;
}

RunConfig parse_config(std::string_view ini, const std::filesystem::path& base_dir, bool check_paths) {
  // '#' comments are accepted alongside ';'.
  std::string cleaned;
  for (const auto& line : text::split(ini, '\n')) {
    auto t = text::trim(line);
    if (!t.empty() && t[0] == '#') continue;
    cleaned += line;
    cleaned += '\n';
  }
  pt::ptree tree;
  try {
    std::istringstream in(cleaned);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::ParseError, fmt::format("config line {}: {}", e.line(), e.message()));
  }

  RunConfig c;
  std::vector<std::string> problems;
  for (const auto& [section, child] : tree) {
    if (child.empty()) {
      c.warnings.push_back("key outside any section ignored: " + section);
      continue;
    }
    for (const auto& [key, value] : child) {
      auto full = section + "." + key;
      auto it = table().find(full);
      if (it == table().end()) {
        c.warnings.push_back("unknown config key ignored: " + full);
        continue;
      }
      try {
        it->second.apply(c, text::trim(value.data()));
      } catch (const std::exception& e) {
        problems.push_back(fmt::format("{} = '{}': {}", full, value.data(), e.what()));
      }
    }
  }
  for (const auto& w : c.warnings) spdlog::warn("{}", w);

  c.corpus = resolve(c.corpus_raw, base_dir);
  c.vocabulary = resolve(c.vocabulary_raw, base_dir);
  c.lexicon = resolve(c.lexicon_raw, base_dir);
  if (!c.backend.fixtures.empty()) c.backend.fixtures = resolve(c.backend.fixtures, base_dir).string();
  if (c.workdir.is_relative() && !base_dir.empty()) c.workdir = base_dir / c.workdir;

  for (auto& p : config_problems(c, check_paths)) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    fail(ErrorCode::InvariantViolation, msg);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool check_paths) {
  if (!std::filesystem::is_regular_file(path)) fail(ErrorCode::IoError, "no config file " + path.string());
  return parse_config(read_text_file(path), path.parent_path(), check_paths);
}

Json config_to_json(const RunConfig& c) {
  Json design = Json::object();
  for (const auto& [d, v] : c.scoring.design_ladder) design[std::string(to_string(d))] = v;
  Json ladder = Json::array();
  for (const auto& b : c.scoring.p_ladder) ladder.push_back({b.max_p, b.score});
  const auto& n2v = c.eval.linkpred.node2vec;
  return Json{
      {"run",
       {{"disease", c.disease},
        {"corpus", c.corpus_raw},
        {"vocabulary", c.vocabulary_raw},
        {"lexicon", c.lexicon_raw},
        {"seed", c.seed},
        {"timestamp", c.timestamp},
        {"creator", c.creator}}},
      {"encoder", {{"name", c.encoder}}},
      {"backend", {{"name", c.backend.name}, {"endpoint", c.backend.endpoint}, {"model", c.backend.model}}},
      {"chunking",
       {{"window", c.extract.chunking.window},
        {"overlap", c.extract.chunking.overlap},
        {"min_len", c.extract.chunking.min_len}}},
      {"extract", {{"enrich", c.extract.enrich}}},
      {"fuzzy", {{"threshold", c.fuzzy.threshold}, {"margin", c.fuzzy.margin}}},
      {"scoring",
       {{"weights", c.scoring.weights},
        {"quartile_values", c.scoring.quartile_values},
        {"design", design},
        {"p_ladder", ladder},
        {"llm_lambda", c.scoring.llm_lambda},
        {"grades", {c.scoring.grade_a, c.scoring.grade_b, c.scoring.grade_c}},
        {"impact_factor_cap", c.scoring.impact_factor_cap},
        {"citation_cap", c.scoring.citation_cap},
        {"impact_neutral", c.scoring.impact_neutral},
        {"p_floor", c.scoring.p_floor},
        {"stat_neutral", c.scoring.stat_neutral},
        {"sample_cap", c.scoring.sample_cap},
        {"sample_absent", c.scoring.sample_absent}}},
      {"fusion", {{"dup_threshold", c.fusion.dup_threshold}, {"entity_overlap_min", c.fusion.entity_overlap_min}}},
      {"relation",
       {{"sim_min", c.relation.sim_min},
        {"overlap_min", c.relation.overlap_min},
        {"refine_cut", c.relation.refine_cut},
        {"verify_cut", c.relation.verify_cut},
        {"high_sim_cut", c.relation.high_sim_cut},
        {"same_term_min", c.relation.same_term_min},
        {"verify", c.verify_relations}}},
      {"eval",
       {{"negative_ratio", c.eval.negative_ratio},
        {"holdout_fraction", c.eval.holdout_fraction},
        {"top_k", c.eval.top_k},
        {"qa_min_composite", c.eval.qa.min_composite},
        {"qa_min_source_len", c.eval.qa.min_source_len},
        {"classifier", c.eval.linkpred.feature_classifier == ClassifierKind::Forest ? "forest" : "logistic"},
        {"train_hide_fraction", c.eval.linkpred.train_hide_fraction},
        {"node2vec",
         {{"dims", n2v.dims},
          {"walk_len", n2v.walk_len},
          {"walks_per_node", n2v.walks_per_node},
          {"p", n2v.p},
          {"q", n2v.q},
          {"window", n2v.window},
          {"epochs", n2v.epochs}}}}}};
}

std::string config_digest(const RunConfig& c) { return text::sha256_hex(config_to_json(c).dump()); }

}  // namespace forge
