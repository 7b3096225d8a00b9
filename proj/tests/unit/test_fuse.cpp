#include "forge/fuse.hpp"

#include <set>

#include "../fixtures.hpp"
#include "support.hpp"

using namespace forge;

namespace {

const EvidenceRecord& by_id(const std::vector<EvidenceRecord>& rs, const std::string& id) {
  for (const auto& r : rs)
    if (r.evidence_id == id) return r;
  FAIL("missing " << id);
  return rs.front();
}

}  // namespace

TEST_SUITE("fuse") {
  TEST_CASE("evidence ids") {
    CHECK(make_evidence_id("hcc", 42) == "HCC-EV-000042");
  }

  TEST_CASE("fingerprint scope and normalization") {
    auto a = testing::record("E1", "doc1", "Sorafenib reduced  growth.", 0.5);
    CHECK(fingerprint(a) == fingerprint(a));
    auto b = a;
    b.doc_id = "doc2";
    CHECK(fingerprint(a) != fingerprint(b));
    auto c = a;
    c.evidence.source_text = " sorafenib reduced\tgrowth. ";
    CHECK(fingerprint(a) == fingerprint(c));
  }

  TEST_CASE("find_duplicates") {
    HashingEncoder enc;
    auto base = testing::record("E1", "doc1", "YAP1 knockdown inhibited proliferation.", 0.5,
                                {testing::link("HGNC:1", SemanticType::Gene)});
    auto copy = base;
    copy.evidence_id = "E2";
    auto m = find_duplicates(copy, std::vector<EvidenceRecord>{base}, enc);
    REQUIRE(m.size() == 1);
    CHECK(m[0].kind == MatchKind::Fingerprint);
    CHECK(m[0].similarity == 1.0);

    auto para = copy;
    para.doc_id = "doc9";
    auto s = find_duplicates(para, std::vector<EvidenceRecord>{base}, enc);
    REQUIRE(s.size() == 1);
    CHECK(s[0].kind == MatchKind::Semantic);
    CHECK(s[0].similarity >= 0.95);

    auto other = testing::record("E3", "doc3", "Regorafenib attenuated angiogenesis.", 0.5,
                                 {testing::link("DB:2", SemanticType::Drug)});
    CHECK(find_duplicates(other, std::vector<EvidenceRecord>{base}, enc).empty());
    CHECK(find_duplicates(base, std::vector<EvidenceRecord>{base}, enc).empty());
  }

  TEST_CASE("merge rules") {
    auto a = testing::record("A", "d1", "t", 0.8);
    auto b = testing::record("B", "d2", "t", 0.5);
    b.evidence.p_value = 0.01;
    b.merged_from = {"C"};
    auto m = merge_records(a, b, "2025-01-01T00:00:00Z");
    CHECK(m.evidence_id == "A");
    CHECK(m.version == a.version + 1);
    CHECK(m.merged_from == std::vector<std::string>{"B", "C"});
    CHECK(m.evidence.p_value == 0.01);
    CHECK(m.score == a.score);
    CHECK_CODE(merge_records(a, a, "now"), ErrorCode::SelfMerge);
    CHECK_CODE(merge_records(b, a, "now"), ErrorCode::ScoreOrderViolation);
  }

  TEST_CASE("canonical selection order") {
    auto a = testing::record("A", "d", "t", 0.7);
    auto b = testing::record("B", "d", "t", 0.6);
    CHECK(outranks(a, b));
    b.score.composite = 0.7;
    b.created_at = "2023-01-01T00:00:00Z";
    CHECK(outranks(b, a));
    b.created_at = a.created_at;
    CHECK(outranks(a, b));
  }

  TEST_CASE("twenty-record fixture") {
    HashingEncoder enc;
    auto input = fixtures::fusion_records();
    REQUIRE(input.size() == 20);
    fixtures::FusionExpectation want;
    auto out = fuse_records(input, enc, {}, "2025-01-01T00:00:00Z");
    CHECK(out.records.size() == want.survivors);
    CHECK(out.log.size() == want.merges);
    for (const auto& [canon, absorbed] : want.merged) {
      const auto& r = by_id(out.records, canon);
      CHECK(r.merged_from == absorbed);
      CHECK(r.version > 1);
      for (const auto& gone : absorbed)
        for (const auto& s : out.records) CHECK(s.evidence_id != gone);
    }
    for (const auto& id : want.untouched_pair) CHECK(by_id(out.records, id).version == 1);

    std::set<std::string> prints;
    for (const auto& r : out.records) CHECK(prints.insert(fingerprint(r)).second);

    auto again = fuse_records(out.records, enc, {}, "2025-01-02T00:00:00Z");
    CHECK(again.log.empty());
    CHECK(again.passes == 1);
    CHECK(again.records == out.records);

    CHECK(merge_log_csv(out.log).rfind("canonical_id,absorbed_id,match_kind,similarity\n", 0) == 0);
  }
}
