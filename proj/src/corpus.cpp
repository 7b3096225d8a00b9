#include "forge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "forge/error.hpp"
#include "forge/serialize.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view to_string(SectionLabel label) noexcept {
  switch (label) {
    case SectionLabel::Abstract: return "abstract";
    case SectionLabel::Introduction: return "introduction";
    case SectionLabel::Methods: return "methods";
    case SectionLabel::Results: return "results";
    case SectionLabel::Discussion: return "discussion";
    case SectionLabel::Conclusion: return "conclusion";
    case SectionLabel::References: return "references";
    case SectionLabel::Other: return "other";
  }
  return "other";
}

std::optional<SectionLabel> parse_section_label(std::string_view name) {
  static const std::pair<std::string_view, SectionLabel> kLabels[] = {
      {"abstract", SectionLabel::Abstract},     {"introduction", SectionLabel::Introduction},
      {"methods", SectionLabel::Methods},       {"results", SectionLabel::Results},
      {"discussion", SectionLabel::Discussion}, {"conclusion", SectionLabel::Conclusion},
      {"references", SectionLabel::References}, {"other", SectionLabel::Other},
  };
  auto lowered = text::to_lower(text::trim(name));
  for (const auto& [n, l] : kLabels)
    if (n == lowered) return l;
  return std::nullopt;
}

std::string_view to_string(Quartile q) noexcept {
  switch (q) {
    case Quartile::Q1: return "Q1";
    case Quartile::Q2: return "Q2";
    case Quartile::Q3: return "Q3";
    case Quartile::Q4: return "Q4";
  }
  return "Q4";
}

std::optional<Quartile> parse_quartile(std::string_view name) {
  auto up = text::to_upper(text::trim(name));
  if (up == "Q1") return Quartile::Q1;
  if (up == "Q2") return Quartile::Q2;
  if (up == "Q3") return Quartile::Q3;
  if (up == "Q4") return Quartile::Q4;
  return std::nullopt;
}

DocumentMeta merge_meta(const DocumentMeta& base, const DocumentMeta& override_meta) {
  DocumentMeta out = base;
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(out.doi, override_meta.doi);
  take(out.title, override_meta.title);
  take(out.authors, override_meta.authors);
  take(out.journal, override_meta.journal);
  take(out.year, override_meta.year);
  take(out.citation_count, override_meta.citation_count);
  take(out.impact_factor, override_meta.impact_factor);
  take(out.quartile, override_meta.quartile);
  take(out.path, override_meta.path);
  return out;
}

SectionConfig SectionConfig::defaults() {
  SectionConfig c;
  c.synonyms = {
      {"abstract", SectionLabel::Abstract},
      {"summary", SectionLabel::Abstract},
      {"introduction", SectionLabel::Introduction},
      {"background", SectionLabel::Introduction},
      {"methods", SectionLabel::Methods},
      {"method", SectionLabel::Methods},
      {"materials and methods", SectionLabel::Methods},
      {"material and methods", SectionLabel::Methods},
      {"materials & methods", SectionLabel::Methods},
      {"methods and materials", SectionLabel::Methods},
      {"patients and methods", SectionLabel::Methods},
      {"methodology", SectionLabel::Methods},
      {"experimental procedures", SectionLabel::Methods},
      {"experimental section", SectionLabel::Methods},
      {"results", SectionLabel::Results},
      {"findings", SectionLabel::Results},
      {"results and discussion", SectionLabel::Results},
      {"discussion", SectionLabel::Discussion},
      {"conclusion", SectionLabel::Conclusion},
      {"conclusions", SectionLabel::Conclusion},
      {"concluding remarks", SectionLabel::Conclusion},
      {"references", SectionLabel::References},
      {"bibliography", SectionLabel::References},
      {"literature cited", SectionLabel::References},
  };
  c.low_information = {"references",
                       "acknowledgements",
                       "acknowledgments",
                       "acknowledgement",
                       "acknowledgment",
                       "funding",
                       "conflicts of interest",
                       "conflict of interest",
                       "competing interests",
                       "supplementary"};
  return c;
}

std::string derive_doc_id(const DocumentMeta& meta) {
  if (meta.doi) {
    auto doi = text::to_lower(text::trim(*meta.doi));
    if (!doi.empty()) return doi;
  }
  if (meta.title) {
    auto title = text::to_lower(text::collapse_whitespace(*meta.title));
    if (!title.empty()) return "title:" + text::sha256_hex(title).substr(0, 32);
  }
  fail(ErrorCode::MissingIdentity, "document has neither DOI nor title");
}

namespace {

const std::size_t kMaxHeadingLength = 80;

// Heading key used for synonym lookup: numbering, markdown hashes and
// trailing punctuation removed, lowercased, whitespace collapsed.
std::string heading_key(std::string_view line) {
  static const std::regex kNumbering(R"(^(\d+(\.\d+)*|[ivxlc]+)[.)]?\s+)", std::regex::icase);
  std::string s = text::trim(line);
  while (!s.empty() && s.front() == '#') s.erase(s.begin());
  s = text::trim(s);
  std::smatch m;
  if (std::regex_search(s, m, kNumbering)) s = m.suffix().str();
  while (!s.empty() && (s.back() == ':' || s.back() == '.')) s.pop_back();
  return text::to_lower(text::collapse_whitespace(s));
}

bool is_low_information(std::string_view key, const SectionConfig& config) {
  return std::any_of(config.low_information.begin(), config.low_information.end(),
                     [&](const std::string& p) { return !p.empty() && key.starts_with(p); });
}

struct HeadingHit {
  SectionLabel label;
};

std::optional<HeadingHit> classify_heading(std::string_view line, const SectionConfig& config) {
  auto trimmed = text::trim(line);
  if (trimmed.empty() || trimmed.size() > kMaxHeadingLength) return std::nullopt;
  bool markdown = trimmed.front() == '#';
  auto key = heading_key(trimmed);
  if (key.empty()) return std::nullopt;
  if (auto it = config.synonyms.find(key); it != config.synonyms.end()) return HeadingHit{it->second};
  if (is_low_information(key, config)) return HeadingHit{SectionLabel::Other};
  if (markdown) return HeadingHit{SectionLabel::Other};
  return std::nullopt;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Trimmed [begin, end) within body; keeps the section a contiguous substring.
Span trim_span(std::string_view body, std::size_t begin, std::size_t end) {
  auto ws = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (begin < end && ws(body[begin])) ++begin;
  while (end > begin && ws(body[end - 1])) --end;
  return {begin, end};
}

}  // namespace

Document ingest_document(std::string_view body, const DocumentMeta& auto_meta,
                         const std::optional<DocumentMeta>& manual_meta, const SectionConfig& config) {
  if (text::trim(body).empty()) fail(ErrorCode::EmptyBody, "article body is empty");
  Document doc;
  doc.meta = manual_meta ? merge_meta(auto_meta, *manual_meta) : auto_meta;
  doc.doc_id = derive_doc_id(doc.meta);

  struct Marker {
    std::size_t line_begin;
    std::size_t content_begin;
    SectionLabel label;
    std::string heading;
  };
  std::vector<Marker> markers;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    auto line_end = nl == std::string_view::npos ? body.size() : nl;
    auto line = body.substr(pos, line_end - pos);
    if (auto hit = classify_heading(line, config)) {
      auto next = nl == std::string_view::npos ? body.size() : nl + 1;
      markers.push_back({pos, next, hit->label, text::trim(line)});
    }
    pos = nl == std::string_view::npos ? body.size() : nl + 1;
  }

  auto emit = [&](std::size_t begin, std::size_t end, SectionLabel label, std::string heading) {
    auto span = trim_span(body, begin, end);
    if (span.end <= span.begin && heading.empty()) return;
    doc.sections.push_back(
        Section{label, std::move(heading), std::string(body.substr(span.begin, span.end - span.begin))});
  };

  std::size_t lead_end = markers.empty() ? body.size() : markers.front().line_begin;
  emit(0, lead_end, SectionLabel::Other, "");
  for (std::size_t i = 0; i < markers.size(); ++i) {
    auto end = i + 1 < markers.size() ? markers[i + 1].line_begin : body.size();
    emit(markers[i].content_begin, end, markers[i].label, markers[i].heading);
  }
  return doc;
}

std::vector<Section> segment_sections(const Document& doc, const SectionConfig& config) {
  std::vector<Section> out;
  for (const auto& s : doc.sections) {
    if (s.label == SectionLabel::References) continue;
    if (is_low_information(to_string(s.label), config)) continue;
    if (!s.heading.empty() && is_low_information(heading_key(s.heading), config)) continue;
    out.push_back(s);
  }
  return out;
}

std::vector<Chunk> chunk_sections(std::string_view doc_id, std::span<const Section> sections,
                                  const ChunkParams& params) {
  if (params.window <= 0 || params.overlap < 0 || params.overlap >= params.window || params.min_len < 1) {
    fail(ErrorCode::InvalidWindow, "chunking requires 0 <= overlap < window and min_len >= 1");
  }
  const auto window = static_cast<std::size_t>(params.window);
  const auto stride = static_cast<std::size_t>(params.window - params.overlap);
  const auto min_len = static_cast<std::size_t>(params.min_len);

  std::vector<Chunk> chunks;
  for (const auto& section : sections) {
    auto bounds = text::scalar_boundaries(section.text);
    const std::size_t length = bounds.size() - 1;
    for (std::size_t start = 0; start < length; start += stride) {
      std::size_t end = std::min(start + window, length);
      if (end - start >= min_len) {
        Chunk c;
        c.doc_id = std::string(doc_id);
        c.index = chunks.size();
        c.section_label = section.label;
        c.start_offset = start;
        c.end_offset = end;
        c.text = section.text.substr(bounds[start], bounds[end] - bounds[start]);
        chunks.push_back(std::move(c));
      }
      if (end == length) break;
    }
  }
  return chunks;
}

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentMeta read_meta(const std::filesystem::path& p) {
  try {
    return meta_from_json(nlohmann::json::parse(read_file(p)));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, p.string() + ": " + e.what());
  }
}

}  // namespace

std::vector<Document> load_corpus_directory(const std::filesystem::path& dir, const SectionConfig& config) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) fail(ErrorCode::IoError, "corpus directory not found: " + dir.string());
  std::vector<fs::path> bodies;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") bodies.push_back(entry.path());
  }
  std::sort(bodies.begin(), bodies.end());

  std::vector<Document> docs;
  std::set<std::string> seen;
  for (const auto& body_path : bodies) {
    auto stem = body_path.stem().string();
    auto meta_path = dir / (stem + ".meta.json");
    auto manual_path = dir / (stem + ".manual.json");
    DocumentMeta meta = fs::exists(meta_path) ? read_meta(meta_path) : DocumentMeta{};
    if (!meta.path) meta.path = body_path.filename().string();
    std::optional<DocumentMeta> manual;
    if (fs::exists(manual_path)) manual = read_meta(manual_path);
    auto doc = ingest_document(read_file(body_path), meta, manual, config);
    if (!seen.insert(doc.doc_id).second) {
      fail(ErrorCode::InvariantViolation, "duplicate doc_id " + doc.doc_id + " (" + stem + ")");
    }
    docs.push_back(std::move(doc));
  }
  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.doc_id < b.doc_id; });
  return docs;
}

}  // namespace forge
