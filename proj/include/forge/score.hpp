#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "forge/corpus.hpp"
#include "forge/evidence.hpp"

namespace forge {

struct ScoringConfig {
  struct PBucket {
    double max_p;
    double score;
  };

  std::map<StudyDesign, double> design_ladder;
  std::array<double, 4> quartile_values{1.0, 0.75, 0.5, 0.25};
  double impact_factor_cap = 30.0;
  double citation_cap = 1000.0;
  double impact_neutral = 0.5;
  std::vector<PBucket> p_ladder;  // ascending max_p
  double p_floor = 0.2;
  double stat_neutral = 0.5;
  double sample_cap = 10000.0;
  double sample_absent = 0.3;
  std::array<double, 4> weights{0.35, 0.25, 0.25, 0.15};  // type, impact, stat, sample
  double llm_lambda = 0.15;
  double grade_a = 0.8;
  double grade_b = 0.6;
  double grade_c = 0.4;

  static ScoringConfig defaults();

  /// Every violated constraint, one message each; empty when valid.
  std::vector<std::string> problems() const;
};

double score_study_type(StudyDesign design, const ScoringConfig& cfg = ScoringConfig::defaults());
double score_impact(std::optional<double> impact_factor, std::optional<Quartile> quartile,
                    std::optional<long long> citation_count, const ScoringConfig& cfg = ScoringConfig::defaults());
double score_statistics(std::optional<double> p_value, const ScoringConfig& cfg = ScoringConfig::defaults());
double score_sample(std::optional<long long> sample_size, const ScoringConfig& cfg = ScoringConfig::defaults());

Grade grade_for(double composite, const ScoringConfig& cfg = ScoringConfig::defaults());

QualityScore composite_score(double s_type, double s_impact, double s_stat, double s_sample, double llm_confidence,
                             const ScoringConfig& cfg = ScoringConfig::defaults());

QualityScore score_evidence(const CandidateEvidence& e, const DocumentMeta& source,
                            const ScoringConfig& cfg = ScoringConfig::defaults());

}  // namespace forge
