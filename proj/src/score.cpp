#include "forge/score.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {

ScoringConfig ScoringConfig::defaults() {
  ScoringConfig c;
  c.design_ladder = {{StudyDesign::MetaAnalysis, 1.0}, {StudyDesign::Rct, 0.9},     {StudyDesign::Cohort, 0.7},
                     {StudyDesign::CaseControl, 0.6},  {StudyDesign::InVivo, 0.5},  {StudyDesign::InVitro, 0.4},
                     {StudyDesign::Computational, 0.3}, {StudyDesign::Unknown, 0.2}};
  c.p_ladder = {{0.001, 1.0}, {0.01, 0.85}, {0.05, 0.7}, {0.1, 0.4}};
  return c;
}

std::vector<std::string> ScoringConfig::problems() const {
  std::vector<std::string> out;
  auto unit = [&](const std::string& name, double v) {
    if (!(v >= 0.0 && v <= 1.0)) out.push_back(fmt::format("scoring.{} = {} is outside [0, 1]", name, v));
  };
  for (auto d : kAllStudyDesigns) {
    auto it = design_ladder.find(d);
    if (it == design_ladder.end()) out.push_back(fmt::format("scoring.design.{} is missing", to_string(d)));
    else unit(fmt::format("design.{}", to_string(d)), it->second);
  }
  for (std::size_t i = 0; i < quartile_values.size(); ++i) unit(fmt::format("quartile.q{}", i + 1), quartile_values[i]);
  if (!(impact_factor_cap > 0.0)) out.push_back("scoring.impact_factor_cap must be positive");
  if (!(citation_cap > 0.0)) out.push_back("scoring.citation_cap must be positive");
  unit("impact_neutral", impact_neutral);
  for (std::size_t i = 0; i < p_ladder.size(); ++i) {
    unit(fmt::format("p_ladder[{}].score", i), p_ladder[i].score);
    if (!(p_ladder[i].max_p > 0.0 && p_ladder[i].max_p <= 1.0)) {
      out.push_back(fmt::format("scoring.p_ladder[{}].max_p is outside (0, 1]", i));
    }
    if (i > 0 && !(p_ladder[i].max_p > p_ladder[i - 1].max_p)) {
      out.push_back("scoring.p_ladder cut-offs must be strictly increasing");
    }
  }
  unit("p_floor", p_floor);
  unit("stat_neutral", stat_neutral);
  if (!(sample_cap > 0.0)) out.push_back("scoring.sample_cap must be positive");
  unit("sample_absent", sample_absent);
  double sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    unit(fmt::format("weights[{}]", i), weights[i]);
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) out.push_back(fmt::format("scoring weights sum to {} instead of 1", sum));
  unit("llm_lambda", llm_lambda);
  unit("grade_a", grade_a);
  unit("grade_b", grade_b);
  unit("grade_c", grade_c);
  if (!(grade_a > grade_b && grade_b > grade_c)) out.push_back("scoring grade thresholds must satisfy a > b > c");
  return out;
}

double score_study_type(StudyDesign design, const ScoringConfig& cfg) {
  auto it = cfg.design_ladder.find(design);
  return it == cfg.design_ladder.end() ? 0.0 : it->second;
}

double score_impact(std::optional<double> impact_factor, std::optional<Quartile> quartile,
                    std::optional<long long> citation_count, const ScoringConfig& cfg) {
  double sum = 0.0;
  int n = 0;
  if (quartile) {
    sum += cfg.quartile_values[static_cast<std::size_t>(*quartile)];
    ++n;
  }
  if (impact_factor) {
    if (*impact_factor < 0.0) fail(ErrorCode::OutOfRange, "negative impact factor");
    sum += std::min(*impact_factor, cfg.impact_factor_cap) / cfg.impact_factor_cap;
    ++n;
  }
  if (citation_count) {
    if (*citation_count < 0) fail(ErrorCode::OutOfRange, "negative citation count");
    sum += std::min(1.0, std::log1p(static_cast<double>(*citation_count)) / std::log1p(cfg.citation_cap));
    ++n;
  }
  return n == 0 ? cfg.impact_neutral : sum / n;
}

double score_statistics(std::optional<double> p_value, const ScoringConfig& cfg) {
  if (!p_value) return cfg.stat_neutral;
  if (!(*p_value > 0.0 && *p_value <= 1.0)) fail(ErrorCode::OutOfRange, "p_value outside (0, 1]");
  for (const auto& b : cfg.p_ladder)
    if (*p_value <= b.max_p) return b.score;
  return cfg.p_floor;
}

double score_sample(std::optional<long long> sample_size, const ScoringConfig& cfg) {
  if (!sample_size) return cfg.sample_absent;
  if (*sample_size < 1) fail(ErrorCode::OutOfRange, "sample_size below 1");
  return std::min(1.0, std::log1p(static_cast<double>(*sample_size)) / std::log1p(cfg.sample_cap));
}

Grade grade_for(double composite, const ScoringConfig& cfg) {
  if (composite >= cfg.grade_a) return Grade::A;
  if (composite >= cfg.grade_b) return Grade::B;
  if (composite >= cfg.grade_c) return Grade::C;
  return Grade::D;
}

QualityScore composite_score(double s_type, double s_impact, double s_stat, double s_sample, double llm_confidence,
                             const ScoringConfig& cfg) {
  for (double v : {s_type, s_impact, s_stat, s_sample, llm_confidence}) {
    if (!(v >= 0.0 && v <= 1.0)) fail(ErrorCode::OutOfRange, fmt::format("score component {} outside [0, 1]", v));
  }
  const auto& w = cfg.weights;
  double base = w[0] * s_type + w[1] * s_impact + w[2] * s_stat + w[3] * s_sample;
  double composite = std::clamp(base * (1.0 - cfg.llm_lambda) + cfg.llm_lambda * llm_confidence, 0.0, 1.0);
  return QualityScore{s_type, s_impact, s_stat, s_sample, llm_confidence, composite, grade_for(composite, cfg)};
}

QualityScore score_evidence(const CandidateEvidence& e, const DocumentMeta& source, const ScoringConfig& cfg) {
  return composite_score(score_study_type(e.study_design, cfg),
                         score_impact(source.impact_factor, source.quartile, source.citation_count, cfg),
                         score_statistics(e.p_value, cfg), score_sample(e.sample_size, cfg), e.extraction_confidence,
                         cfg);
}

}  // namespace forge
