#include "forge/score.hpp"

#include <random>

#include "support.hpp"

using namespace forge;

TEST_SUITE("score") {
  TEST_CASE("study type ladder") {
    CHECK(score_study_type(StudyDesign::MetaAnalysis) == 1.0);
    CHECK(score_study_type(StudyDesign::Unknown) == 0.2);
    CHECK(score_study_type(StudyDesign::MetaAnalysis) > score_study_type(StudyDesign::Rct));
    CHECK(score_study_type(StudyDesign::Rct) > score_study_type(StudyDesign::Cohort));
    CHECK(score_study_type(StudyDesign::Cohort) > score_study_type(StudyDesign::InVitro));
  }

  TEST_CASE("impact") {
    CHECK(score_impact(std::nullopt, std::nullopt, std::nullopt) == 0.5);
    CHECK(score_impact(std::nullopt, Quartile::Q1, std::nullopt) == 1.0);
    CHECK(score_impact(std::nullopt, std::nullopt, 0) == 0.0);
    CHECK(score_impact(15.0, std::nullopt, std::nullopt) == 0.5);
    CHECK(score_impact(45.0, Quartile::Q2, std::nullopt) == doctest::Approx((1.0 + 0.75) / 2));
    CHECK_CODE(score_impact(-1.0, std::nullopt, std::nullopt), ErrorCode::OutOfRange);
  }

  TEST_CASE("statistics ladder") {
    CHECK(score_statistics(0.04) == 0.7);
    CHECK(score_statistics(0.05) == 0.7);
    CHECK(score_statistics(0.0005) == 1.0);
    CHECK(score_statistics(std::nullopt) == 0.5);
    CHECK(score_statistics(0.5) == 0.2);
    CHECK_CODE(score_statistics(0.0), ErrorCode::OutOfRange);
  }

  TEST_CASE("sample size") {
    CHECK(score_sample(10000) == 1.0);
    CHECK(score_sample(1) == doctest::Approx(std::log1p(1.0) / std::log1p(10000.0)));
    CHECK(score_sample(1) == doctest::Approx(0.0753).epsilon(1e-3));
    CHECK(score_sample(std::nullopt) == 0.3);
    CHECK_CODE(score_sample(0), ErrorCode::OutOfRange);
  }

  TEST_CASE("composite arithmetic") {
    auto one = composite_score(1, 1, 1, 1, 1);
    CHECK(std::abs(one.composite - 1.0) <= 1e-12);
    CHECK(one.grade == Grade::A);
    auto ex = composite_score(0.9, 0.5, 0.5, 0.5, 0.8);
    CHECK(std::abs(ex.composite - 0.664) <= 1e-12);
    CHECK(ex.grade == Grade::B);
    CHECK_CODE(composite_score(1.1, 0, 0, 0, 0), ErrorCode::OutOfRange);
  }

  TEST_CASE("grade boundaries are inclusive") {
    CHECK(grade_for(0.8) == Grade::A);
    CHECK(grade_for(std::nextafter(0.8, 0.0)) == Grade::B);
    CHECK(grade_for(0.6) == Grade::B);
    CHECK(grade_for(0.4) == Grade::C);
    CHECK(grade_for(std::nextafter(0.4, 0.0)) == Grade::D);
  }

  TEST_CASE("monotone and bounded") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
      double v[5] = {u(rng), u(rng), u(rng), u(rng), u(rng)};
      auto base = composite_score(v[0], v[1], v[2], v[3], v[4]);
      CHECK(base.composite >= 0.0);
      CHECK(base.composite <= 1.0);
      CHECK(base.grade == grade_for(base.composite));
      for (int k = 0; k < 5; ++k) {
        double w[5] = {v[0], v[1], v[2], v[3], v[4]};
        w[k] = std::min(1.0, w[k] + 0.1);
        CHECK(composite_score(w[0], w[1], w[2], w[3], w[4]).composite >= base.composite);
      }
    }
  }

  TEST_CASE("config problems") {
    auto c = ScoringConfig::defaults();
    CHECK(c.problems().empty());
    c.weights = {0.5, 0.25, 0.25, 0.15};
    REQUIRE(c.problems().size() == 1);
    CHECK(c.problems()[0].find("1.15") != std::string::npos);
  }

  TEST_CASE("score_evidence uses record and source") {
    CandidateEvidence e;
    e.study_design = StudyDesign::Rct;
    e.p_value = 0.001;
    e.sample_size = 10000;
    e.extraction_confidence = 1.0;
    DocumentMeta m;
    m.quartile = Quartile::Q1;
    auto s = score_evidence(e, m);
    CHECK(s.composite == doctest::Approx((0.35 * 0.9 + 0.25 + 0.25 + 0.15) * 0.85 + 0.15));
  }
}
