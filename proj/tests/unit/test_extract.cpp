#include "forge/extract.hpp"

#include "forge/serialize.hpp"
#include "support.hpp"

using namespace forge;

namespace {

Chunk chunk_of(std::string text, SectionLabel label = SectionLabel::Results) {
  Chunk c;
  c.doc_id = "doc1";
  c.index = 2;
  c.section_label = label;
  c.end_offset = text.size();
  c.text = std::move(text);
  return c;
}

const char* kText =
    "YAP1 knockdown inhibited proliferation of Huh7 cells (p < 0.01). "
    "Sorafenib reduced tumor growth in xenografts (n = 10, p = 0.003).";

std::string item(const std::string& quote, const std::string& extra = "") {
  return R"({"intervention":"YAP1 knockdown","core_entities":[{"name":"YAP1","type":"Gene"}],)"
         R"("study_design":"in-vitro","clinical_stage":"preclinical","p_value":0.01,)"
         R"("experimental_context":"Huh7","extraction_confidence":0.9,"source_text":")" +
         quote + "\"" + extra + "}";
}

}  // namespace

TEST_SUITE("extract") {
  TEST_CASE("chunk filter keeps evidence sections and signal matches") {
    std::vector<Chunk> chunks{chunk_of("We measured p < 0.01 here.", SectionLabel::Introduction),
                              chunk_of("Background only.", SectionLabel::Introduction),
                              chunk_of("Anything.", SectionLabel::Results)};
    auto kept = filter_chunks(chunks);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].text == chunks[0].text);
    CHECK(kept[1].section_label == SectionLabel::Results);
    CHECK(filter_chunks(std::span<const Chunk>{}).empty());
  }

  TEST_CASE("grounding uses collapsed whitespace") {
    CHECK(is_grounded("YAP1  knockdown\ninhibited", kText));
    CHECK_FALSE(is_grounded("YAP1 knockdown promoted", kText));
    CHECK_FALSE(is_grounded("", kText));
  }

  TEST_CASE("parse responses") {
    auto c = chunk_of(kText);
    CHECK(parse_extraction_response(R"({"evidence": []})", c).empty());
    auto two = parse_extraction_response(
        "```json\n{\"evidence\": [" + item("YAP1 knockdown inhibited proliferation of Huh7 cells") + "," +
            item("Sorafenib reduced tumor growth in xenografts") + "]}\n```",
        c);
    REQUIRE(two.size() == 2);
    CHECK(two[0].origin == EvidenceOrigin{"doc1", 2, SectionLabel::Results});
    CHECK(two[0].core_entities.front().semantic_type == SemanticType::Gene);
    CHECK(two[0].p_value == 0.01);

    CHECK_CODE(parse_extraction_response("not json", c), ErrorCode::SchemaViolation);
    CHECK_CODE(parse_extraction_response(R"({"items": []})", c), ErrorCode::SchemaViolation);
    CHECK_CODE(parse_extraction_response(R"({"evidence": [)" + item("invented finding") + "]}", c),
               ErrorCode::GroundingViolation);
    std::string bad_p = item("Sorafenib reduced tumor growth", "");
    bad_p.replace(bad_p.find("0.01"), 4, "1.5");
    CHECK_CODE(parse_extraction_response(R"({"evidence": [)" + bad_p + "]}", c), ErrorCode::SchemaViolation);
  }

  TEST_CASE("detailed parse separates ungrounded items") {
    auto c = chunk_of(kText);
    auto r = parse_extraction_detailed(
        R"({"evidence": [)" + item("invented finding") + "," + item("Sorafenib reduced tumor growth") + "]}", c);
    CHECK(r.accepted.size() == 1);
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].item_index == 0);
    CHECK(r.rejected[0].chunk_index == 2);
  }

  TEST_CASE("extract_chunk round trips a fixture") {
    auto c = chunk_of(kText);
    auto tmpl = prompts::get(prompts::Id::Extract);
    auto user = prompts::render(tmpl.user, {{"SECTION", "results"}, {"DISEASE", "HCC"}, {"TEXT CHUNK", c.text}});
    MockBackend mock;
    mock.add_fixture(tmpl.system, user,
                     R"({"evidence": [)" + item("YAP1 knockdown inhibited proliferation") + "," +
                         item("Sorafenib reduced tumor growth in xenografts") + "]}");
    auto r = extract_chunk(c, "HCC", mock);
    CHECK(r.accepted.size() == 2);
    CHECK(mock.calls() == 1);
  }

  TEST_CASE("mock responder returns nothing for background text") {
    MockBackend mock;
    auto r = extract_chunk(chunk_of("Hepatocellular carcinoma is a common cancer worldwide.", SectionLabel::Introduction),
                           "HCC", mock);
    CHECK(r.accepted.empty());
  }

  TEST_CASE("aggregation drops exact repeats only") {
    CandidateEvidence a;
    a.source_text = "Sorafenib reduced  growth.";
    a.intervention = "sorafenib";
    a.origin.doc_id = "doc1";
    auto b = a;
    b.source_text = "Sorafenib reduced growth.";
    auto c = a;
    c.source_text = "Sorafenib reduced migration.";
    std::vector<std::vector<CandidateEvidence>> per{{a, c}, {b}};
    auto out = aggregate_document(per);
    REQUIRE(out.size() == 2);
    CHECK(out[0].source_text == a.source_text);
    std::vector<std::vector<CandidateEvidence>> again{out};
    CHECK(aggregate_document(again) == out);
    CHECK(aggregate_document(std::span<const std::vector<CandidateEvidence>>{}).empty());

    auto other = a;
    other.origin.doc_id = "doc2";
    std::vector<std::vector<CandidateEvidence>> mixed{{a}, {other}};
    CHECK_CODE(aggregate_document(mixed), ErrorCode::MixedDocuments);
  }

  TEST_CASE("mini corpus extraction is grounded and deterministic") {
    auto docs = load_corpus_directory(testing::data_dir() / "mini");
    MockBackend mock;
    ExtractOptions opt;
    opt.workers = 3;
    ExtractionReport report;
    auto out = extract_documents(docs, "HCC", mock, opt, &report);
    CHECK(report.grounding_violations.empty());
    CHECK(report.candidates > 0);
    std::map<std::string, const Document*> by_id;
    for (const auto& d : docs) by_id[d.doc_id] = &d;
    for (const auto& de : out) {
      for (const auto& e : de.evidence) {
        const auto* d = by_id.at(de.doc_id);
        auto chunks = chunk_sections(d->doc_id, segment_sections(*d));
        REQUIRE(e.origin.chunk_index < chunks.size());
        CHECK(is_grounded(e.source_text, chunks[e.origin.chunk_index].text));
      }
    }
    MockBackend again;
    opt.workers = 1;
    auto second = extract_documents(docs, "HCC", again, opt);
    REQUIRE(second.size() == out.size());
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(second[i].evidence == out[i].evidence);
  }
}
