#include "forge/normalize.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include "forge/error.hpp"
#include "forge/serialize.hpp"
#include "forge/text.hpp"

namespace forge {

std::string fold_name(std::string_view s) { return text::to_lower(text::collapse_whitespace(s)); }

std::string symbol_key(std::string_view s) {
  static const std::pair<std::u32string_view, char32_t> kGreek[] = {
      {U"alpha", U'A'}, {U"beta", U'B'},  {U"gamma", U'G'}, {U"delta", U'D'}, {U"epsilon", U'E'},
      {U"kappa", U'K'}, {U"α", U'A'},     {U"β", U'B'},     {U"γ", U'G'},     {U"δ", U'D'},
      {U"ε", U'E'},     {U"κ", U'K'},     {U"Α", U'A'},     {U"Β", U'B'},     {U"Γ", U'G'},
      {U"Δ", U'D'},     {U"Ε", U'E'},     {U"Κ", U'K'}};
  std::u32string in = text::decode_utf8(s);
  for (auto& c : in)
    if (c < 0x80) c = static_cast<char32_t>(std::tolower(static_cast<int>(c)));
  std::u32string out;
  for (std::size_t i = 0; i < in.size();) {
    bool replaced = false;
    for (const auto& [from, to] : kGreek) {
      if (in.compare(i, from.size(), from) == 0) {
        out.push_back(to);
        i += from.size();
        replaced = true;
        break;
      }
    }
    if (replaced) continue;
    char32_t c = in[i++];
    if (c < 0x80 && std::isalnum(static_cast<int>(c))) out.push_back(static_cast<char32_t>(std::toupper(static_cast<int>(c))));
  }
  return text::encode_utf8(out);
}

double edit_similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 && m == 0) return 1.0;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[m]) / static_cast<double>(std::max(n, m));
}

Vocabulary::Vocabulary(std::vector<VocabularyEntry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (!by_id_.emplace(e.concept_id, i).second) fail(ErrorCode::DuplicateConcept, "duplicate concept_id " + e.concept_id);
    if (text::trim(e.canonical_name).empty()) fail(ErrorCode::ParseError, "empty canonical_name for " + e.concept_id);
    exact_[fold_name(e.canonical_name)].push_back(i);
    fuzzy_[e.semantic_type].push_back(Name{text::decode_utf8(fold_name(e.canonical_name)), i});
    for (const auto& a : e.aliases) {
      alias_[fold_name(a)].push_back(i);
      fuzzy_[e.semantic_type].push_back(Name{text::decode_utf8(fold_name(a)), i});
    }
    if (e.semantic_type == SemanticType::Gene) {
      std::set<std::string> keys{symbol_key(e.canonical_name)};
      for (const auto& a : e.aliases) keys.insert(symbol_key(a));
      for (const auto& k : keys)
        if (!k.empty()) symbol_[k].push_back(i);
    }
  }
}

const VocabularyEntry* Vocabulary::find(std::string_view concept_id) const {
  auto it = by_id_.find(concept_id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const std::vector<std::size_t>* Vocabulary::lookup(
    const std::map<std::string, std::vector<std::size_t>, std::less<>>& index, const std::string& key) const {
  auto it = index.find(key);
  return it == index.end() ? nullptr : &it->second;
}

EntityLink Vocabulary::make_link(std::string_view raw, SemanticType type, std::size_t entry, double score,
                                 LinkMethod m) const {
  const auto& e = entries_[entry];
  return EntityLink{std::string(raw), type, e.concept_id, e.canonical_name, e.source_db, score, m};
}

EntityLink Vocabulary::link(std::string_view raw_name, SemanticType type, const FuzzyParams& fuzzy) const {
  auto smallest = [&](const std::vector<std::size_t>& hits) {
    return *std::min_element(hits.begin(), hits.end(),
                             [&](auto a, auto b) { return entries_[a].concept_id < entries_[b].concept_id; });
  };
  const auto folded = fold_name(raw_name);
  if (auto hits = lookup(exact_, folded)) return make_link(raw_name, type, smallest(*hits), 1.0, LinkMethod::Exact);
  if (auto hits = lookup(alias_, folded)) return make_link(raw_name, type, smallest(*hits), 1.0, LinkMethod::Alias);
  if (type == SemanticType::Gene) {
    auto key = symbol_key(raw_name);
    if (auto hits = key.empty() ? nullptr : lookup(symbol_, key)) {
      return make_link(raw_name, type, smallest(*hits), 1.0, LinkMethod::Symbol);
    }
  }

  EntityLink unlinked{std::string(raw_name), type, std::nullopt, std::nullopt, std::nullopt, 0.0, LinkMethod::Unlinked};
  auto names = fuzzy_.find(type);
  if (names == fuzzy_.end()) return unlinked;
  const auto query = text::decode_utf8(folded);
  std::map<std::size_t, double> best_per_entry;
  for (const auto& n : names->second) {
    auto len_a = query.size(), len_b = n.folded.size();
    auto longest = std::max(len_a, len_b);
    auto diff = len_a > len_b ? len_a - len_b : len_b - len_a;
    // length gap lower-bounds the distance
    if (longest > 0 && 1.0 - static_cast<double>(diff) / static_cast<double>(longest) < fuzzy.threshold - fuzzy.margin) {
      continue;
    }
    double s = edit_similarity(query, n.folded);
    auto& slot = best_per_entry[n.entry];
    slot = std::max(slot, s);
  }
  std::optional<std::size_t> best;
  double best_score = -1.0, second = 0.0;
  for (const auto& [entry, s] : best_per_entry) {
    if (!best || s > best_score || (s == best_score && entries_[entry].concept_id < entries_[*best].concept_id)) {
      if (best) second = std::max(second, best_score);
      best = entry;
      best_score = s;
    } else {
      second = std::max(second, s);
    }
  }
  if (!best || best_score < fuzzy.threshold || best_score - second < fuzzy.margin) return unlinked;
  return make_link(raw_name, type, *best, best_score, LinkMethod::Fuzzy);
}

Vocabulary parse_vocabulary(std::string_view tsv) {
  std::vector<VocabularyEntry> entries;
  std::size_t line_no = 0;
  bool first_row = true;
  for (auto line : text::split(tsv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    auto cols = text::split(line, '\t');
    if (std::exchange(first_row, false) && text::trim(cols[0]) == "concept_id") continue;
    if (cols.size() < 3) fail(ErrorCode::ParseError, "vocabulary line " + std::to_string(line_no) + ": expected >= 3 columns");
    VocabularyEntry e;
    e.concept_id = text::trim(cols[0]);
    e.canonical_name = text::trim(cols[1]);
    auto type = parse_semantic_type(cols[2]);
    if (!type) fail(ErrorCode::ParseError, "vocabulary line " + std::to_string(line_no) + ": unknown semantic type");
    e.semantic_type = *type;
    if (e.concept_id.empty() || e.canonical_name.empty()) {
      fail(ErrorCode::ParseError, "vocabulary line " + std::to_string(line_no) + ": empty id or name");
    }
    if (cols.size() > 3) {
      for (auto& a : text::split(cols[3], '|')) {
        auto t = text::trim(a);
        if (!t.empty()) e.aliases.push_back(std::move(t));
      }
    }
    if (cols.size() > 4) e.source_db = text::trim(cols[4]);
    entries.push_back(std::move(e));
  }
  return Vocabulary(std::move(entries));
}

Vocabulary load_vocabulary(const std::filesystem::path& path) { return parse_vocabulary(read_text_file(path)); }

EntityLink link_entity(std::string_view raw_name, SemanticType type, const Vocabulary& vocab, const FuzzyParams& fuzzy) {
  if (text::trim(raw_name).empty()) fail(ErrorCode::PreconditionViolation, "raw_name is empty");
  return vocab.link(raw_name, type, fuzzy);
}

NormalizedEntities normalize_record(const CandidateEvidence& c, const Vocabulary& vocab, const FuzzyParams& fuzzy) {
  NormalizedEntities out;
  std::set<std::string> seen;
  for (const auto& e : c.core_entities) {
    auto link = link_entity(e.raw_name, e.semantic_type, vocab, fuzzy);
    if (link.concept_id && seen.insert(*link.concept_id).second) out.linked_entities.push_back(*link.concept_id);
    out.core_entities.push_back(std::move(link));
  }
  return out;
}

}  // namespace forge
