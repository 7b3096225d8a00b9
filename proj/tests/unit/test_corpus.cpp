#include "forge/corpus.hpp"

#include <random>

#include "support.hpp"

using namespace forge;

namespace {

Section section(std::size_t length, SectionLabel label = SectionLabel::Results) {
  Section s;
  s.label = label;
  s.text.reserve(length);
  for (std::size_t i = 0; i < length; ++i) s.text.push_back(static_cast<char>('a' + i % 26));
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Chunk>& chunks) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : chunks) out.emplace_back(c.start_offset, c.end_offset);
  return out;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("manual metadata wins field by field") {
    DocumentMeta a, m;
    a.title = "T";
    a.journal = "J1";
    a.year = 2020;
    m.journal = "J2";
    auto doc = ingest_document("Abstract\nbody text", a, m);
    CHECK(doc.meta.journal == "J2");
    CHECK(doc.meta.year == 2020);
    CHECK(ingest_document("Abstract\nbody text", a, std::nullopt).meta == a);
  }

  TEST_CASE("identity is required") {
    CHECK_CODE(ingest_document("x", DocumentMeta{}, std::nullopt), ErrorCode::MissingIdentity);
    DocumentMeta a;
    a.title = "T";
    CHECK_CODE(ingest_document("  \n ", a, std::nullopt), ErrorCode::EmptyBody);
  }

  TEST_CASE("doc id prefers DOI and is deterministic") {
    DocumentMeta a, b;
    a.doi = "10.1000/ABC";
    a.title = "One";
    b.doi = "10.1000/abc";
    b.title = "Two";
    CHECK(derive_doc_id(a) == derive_doc_id(b));
    DocumentMeta t1, t2;
    t1.title = "A  Title";
    t2.title = "a title";
    CHECK(derive_doc_id(t1) == derive_doc_id(t2));
    CHECK(ingest_document("Results\nabc", t1, std::nullopt) == ingest_document("Results\nabc", t1, std::nullopt));
  }

  TEST_CASE("low-information sections are excluded") {
    Document d;
    d.sections = {{SectionLabel::Methods, "Methods", "m"},
                  {SectionLabel::Results, "Results", "r"},
                  {SectionLabel::References, "References", "x"}};
    auto kept = segment_sections(d);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].label == SectionLabel::Methods);
    CHECK(kept[1].label == SectionLabel::Results);

    d.sections = {{SectionLabel::References, "References", "x"}};
    CHECK(segment_sections(d).empty());

    d.sections = {{SectionLabel::Other, "Acknowledgements", "thanks"}};
    CHECK(segment_sections(d).empty());
  }

  TEST_CASE("headings are recognized") {
    DocumentMeta m;
    m.title = "T";
    auto doc = ingest_document("Title line\n\nAbstract\nA.\n\nMATERIALS AND METHODS\nM.\n\n3. Results\nR.\n", m, std::nullopt);
    std::vector<SectionLabel> labels;
    for (const auto& s : doc.sections) labels.push_back(s.label);
    CHECK(std::find(labels.begin(), labels.end(), SectionLabel::Abstract) != labels.end());
    CHECK(std::find(labels.begin(), labels.end(), SectionLabel::Methods) != labels.end());
    CHECK(std::find(labels.begin(), labels.end(), SectionLabel::Results) != labels.end());
  }

  TEST_CASE("chunk offsets follow the stride") {
    std::vector<Section> one{section(3500)};
    CHECK(spans(chunk_sections("d", one)) == std::vector<std::pair<std::size_t, std::size_t>>{{0, 3000}, {2700, 3500}});
    one = {section(7000)};
    CHECK(spans(chunk_sections("d", one)) ==
          std::vector<std::pair<std::size_t, std::size_t>>{{0, 3000}, {2700, 5700}, {5400, 7000}});
    one = {section(400)};
    CHECK(chunk_sections("d", one).empty());
    one = {section(500)};
    CHECK(chunk_sections("d", one).size() == 1);
  }

  TEST_CASE("invalid windows") {
    std::vector<Section> one{section(10)};
    CHECK_CODE(chunk_sections("d", one, {100, 100, 1}), ErrorCode::InvalidWindow);
    CHECK_CODE(chunk_sections("d", one, {0, 0, 1}), ErrorCode::InvalidWindow);
    CHECK_CODE(chunk_sections("d", one, {100, -1, 1}), ErrorCode::InvalidWindow);
  }

  TEST_CASE("offsets count code points") {
    Section s;
    s.label = SectionLabel::Results;
    for (int i = 0; i < 600; ++i) s.text += "\xCE\xB2";
    std::vector<Section> one{s};
    auto chunks = chunk_sections("d", one, {500, 100, 50});
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].end_offset == 500);
    CHECK(chunks[0].text.size() == 1000);
    CHECK(chunks[1].start_offset == 400);
  }

  TEST_CASE("chunk invariants on random lengths") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::size_t> len(1, 12000);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<Section> secs{section(len(rng)), section(len(rng), SectionLabel::Methods)};
      auto chunks = chunk_sections("d", secs);
      for (std::size_t i = 0; i < chunks.size(); ++i) CHECK(chunks[i].index == i);
      for (const auto& sec : secs) {
        std::vector<Chunk> mine;
        for (const auto& c : chunks)
          if (c.section_label == sec.label) mine.push_back(c);
        if (sec.text.size() < 500) {
          CHECK(mine.empty());
          continue;
        }
        REQUIRE_FALSE(mine.empty());
        CHECK(mine.front().start_offset == 0);
        for (std::size_t i = 0; i < mine.size(); ++i) {
          CHECK(sec.text.substr(mine[i].start_offset, mine[i].end_offset - mine[i].start_offset) == mine[i].text);
          CHECK(mine[i].end_offset - mine[i].start_offset >= 500);
          if (i > 0) {
            CHECK(mine[i].start_offset == mine[i - 1].start_offset + 2700);
            CHECK(mine[i - 1].end_offset - mine[i].start_offset == 300);
          }
        }
      }
    }
  }

  TEST_CASE("mini corpus loads with manual override") {
    auto docs = load_corpus_directory(testing::data_dir() / "mini");
    REQUIRE(docs.size() == 6);
    CHECK(std::is_sorted(docs.begin(), docs.end(), [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; }));
    bool found = false;
    for (const auto& d : docs) {
      if (d.meta.year == 2020) {
        found = true;
        CHECK(d.meta.citation_count == 45);
      }
    }
    CHECK(found);
    CHECK_CODE(load_corpus_directory(testing::data_dir() / "missing"), ErrorCode::IoError);
  }
}
