// Rule-based stand-in for a language model. It recognizes the bundled prompt
// templates by their fixed wording and answers from the embedded text only,
// so every response is a pure function of the request.

#include <algorithm>
#include <cctype>
#include <initializer_list>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "forge/text.hpp"

namespace forge {

namespace {

using nlohmann::json;

std::string between(const std::string& s, const std::string& open, const std::string& close) {
  auto a = s.find(open);
  if (a == std::string::npos) return {};
  a += open.size();
  auto b = s.find(close, a);
  return s.substr(a, b == std::string::npos ? std::string::npos : b - a);
}

std::string line_value(const std::string& s, const std::string& label) {
  return text::trim(between(s, label, "\n"));
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

// Sentences as [begin, end) byte ranges into `s`, trimmed.
std::vector<std::string> sentences(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    auto piece = text::trim(std::string_view(s).substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\n' && i + 1 < s.size() && s[i + 1] == '\n') {
      emit(i);
      continue;
    }
    if (s[i] != '.' && s[i] != '!' && s[i] != '?') continue;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == ')' || s[j] == '"')) ++j;
    if (j == s.size()) {
      emit(j);
      break;
    }
    if (!is_space(s[j])) continue;
    std::size_t k = j;
    while (k < s.size() && is_space(s[k])) ++k;
    if (k == s.size() || is_upper(s[k]) || std::isdigit(static_cast<unsigned char>(s[k]))) emit(j);
  }
  if (start < s.size()) emit(s.size());
  return out;
}

const std::regex& polarity_verb() {
  static const std::regex re(
      R"(\b(increased|increases|decreased|decreases|reduced|reduces|inhibited|inhibits|suppressed|suppresses|)"
      R"(promoted|promotes|enhanced|enhances|elevated|impaired|attenuated|improved|improves|upregulated|)"
      R"(downregulated|induced|induces|blocked|blocks|prolonged|shortened|lowered|abolished|restored|activated|activates)\b)",
      std::regex::icase);
  return re;
}

bool is_background(const std::string& lower) {
  static const char* markers[] = {"previous studies", "previously", "has been reported", "have been reported",
                                  "is a major", "is known", "are known", "it is well", "remains unclear",
                                  "we hypothesized", "aimed to"};
  for (auto m : markers)
    if (lower.find(m) != std::string::npos) return true;
  return false;
}

std::optional<double> find_p_value(const std::string& s) {
  static const std::regex re(R"(\bp\s*(?:<|=|≤|<=)\s*(0?\.\d+(?:[eE]-?\d+)?|1(?:\.0+)?|\d\.\d+\s*[x×]\s*10\s*-\s*\d+))",
                             std::regex::icase);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  try {
    double v = std::stod(m[1].str());
    if (v > 0.0 && v <= 1.0) return v;
  } catch (const std::exception&) {
  }
  return std::nullopt;
}

std::optional<long long> find_sample_size(const std::string& s) {
  static const std::regex re(R"(\b[nN]\s*=\s*(\d{1,7})\b)");
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  auto n = std::stoll(m[1].str());
  return n > 0 ? std::optional<long long>(n) : std::nullopt;
}

std::optional<double> find_fold(const std::string& s) {
  static const std::regex re(R"((\d+(?:\.\d+)?)\s*-?\s*fold)", std::regex::icase);
  std::smatch m;
  if (!std::regex_search(s, m, re)) return std::nullopt;
  double v = std::stod(m[1].str());
  return v > 0.0 ? std::optional<double>(v) : std::nullopt;
}

std::string design_of(const std::string& lower) {
  struct Rule {
    const char* needle;
    const char* design;
  };
  static const Rule rules[] = {{"meta-analysis", "meta-analysis"}, {"randomized", "rct"},  {"randomised", "rct"},
                               {"cohort", "cohort"},               {"case-control", "case-control"},
                               {"xenograft", "in-vivo"},           {"mice", "in-vivo"},    {"in vivo", "in-vivo"},
                               {"rats", "in-vivo"},                {"cells", "in-vitro"},  {"cell line", "in-vitro"},
                               {"in vitro", "in-vitro"},           {"tcga", "computational"},
                               {"bioinformatic", "computational"}, {"docking", "computational"}};
  for (const auto& r : rules)
    if (lower.find(r.needle) != std::string::npos) return r.design;
  return "unknown";
}

std::string stage_of(const std::string& lower, const std::string& design) {
  static const std::regex phase(R"(phase\s+(iv|iii|ii|i|4|3|2|1)\b)", std::regex::icase);
  std::smatch m;
  if (std::regex_search(lower, m, phase)) {
    auto p = text::to_lower(m[1].str());
    if (p == "1") p = "i";
    if (p == "2") p = "ii";
    if (p == "3") p = "iii";
    if (p == "4") p = "iv";
    return "phase-" + p;
  }
  if (design == "in-vivo" || design == "in-vitro" || design == "computational") return "preclinical";
  if (design == "rct" || design == "cohort" || design == "case-control" || design == "meta-analysis") return "clinical";
  return "unknown";
}

json entities_of(const std::string& s) {
  json out = json::array();
  std::set<std::string> seen;
  auto add = [&](const std::string& name, const char* type) {
    if (seen.insert(text::to_lower(name)).second) out.push_back({{"name", name}, {"type", type}});
  };
  static const std::set<std::string> not_genes{"DMSO", "CI",  "OR",  "HR",   "RCT", "DNA", "RNA", "PCR",  "II",
                                               "III",  "IV",  "IC50", "CCK", "USA", "TCGA", "ELISA", "qPCR", "SD",
                                               "SEM",  "WB",  "AUC", "OS",  "PFS", "BMI", "ALT", "AST"};
  static const std::set<std::string> diseases{"HCC", "CRC", "NAFLD", "NASH"};
  static const std::regex disease_phrase(R"(\b(hepatocellular carcinoma|colorectal cancer|colon cancer|liver cancer|liver fibrosis|cirrhosis)\b)",
                                         std::regex::icase);
  static const std::regex token(R"([A-Za-z][A-Za-z0-9-]*[A-Za-z0-9]|[A-Za-z])");
  static const std::regex drug(R"(^[A-Za-z]+(nib|mab|platin|mycin|formin|statin|taxel|rubicin|fenib|ciclib|parib|lisib|uracil|citabine)$)",
                               std::regex::icase);
  static const std::regex gene(R"(^[A-Z][A-Z0-9]*[0-9A-Z](-[A-Z0-9]+)?$)");
  static const std::regex pathway(R"(\b([A-Za-z0-9/]+(?:-[A-Za-z0-9]+)?)\s+(signaling|signalling|pathway)\b)");
  static const char* phenotypes[] = {"cell viability", "viability",  "proliferation", "apoptosis",
                                     "migration",      "invasion",   "metastasis",    "tumor growth",
                                     "overall survival", "recurrence", "angiogenesis", "fibrosis"};

  for (auto it = std::sregex_iterator(s.begin(), s.end(), disease_phrase); it != std::sregex_iterator(); ++it) {
    add(text::to_lower((*it)[1].str()), "Disease");
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), token); it != std::sregex_iterator(); ++it) {
    auto w = it->str();
    if (diseases.count(w)) add(w, "Disease");
    else if (std::regex_match(w, drug)) add(text::to_lower(w), "Drug");
    else if (w.size() >= 2 && std::regex_match(w, gene) && !not_genes.count(w)) add(w, "Gene");
  }
  for (auto it = std::sregex_iterator(s.begin(), s.end(), pathway); it != std::sregex_iterator(); ++it) {
    add((*it)[1].str() + " signaling", "Pathway");
  }
  auto lower = text::to_lower(s);
  std::set<std::string> phen_seen;
  for (auto p : phenotypes) {
    if (lower.find(p) == std::string::npos) continue;
    bool covered = false;
    for (const auto& q : phen_seen) covered = covered || q.find(p) != std::string::npos;
    if (covered) continue;
    phen_seen.insert(p);
    add(p, "Phenotype");
  }
  return out;
}

// Text after the first occurrence of any marker, up to punctuation.
std::optional<std::string> clause_after(const std::string& s, std::initializer_list<const char*> markers) {
  auto lower = text::to_lower(s);
  std::size_t best = std::string::npos, len = 0;
  for (auto m : markers) {
    auto p = lower.find(m);
    if (p != std::string::npos && p < best) {
      best = p;
      len = std::string(m).size();
    }
  }
  if (best == std::string::npos) return std::nullopt;
  auto rest = s.substr(best + len);
  auto stop = rest.find_first_of("(,;.");
  auto out = text::trim(rest.substr(0, stop));
  if (out.empty()) return std::nullopt;
  return out;
}

json extract_item(const std::string& sentence, const std::string& chunk_lower) {
  json item;
  std::smatch verb;
  std::regex_search(sentence, verb, polarity_verb());
  auto verb_pos = static_cast<std::size_t>(verb.position(0));

  std::string subject = sentence.substr(0, verb_pos);
  auto lower_subject = text::to_lower(subject);
  if (auto that = lower_subject.rfind(" that "); that != std::string::npos) subject = subject.substr(that + 6);
  static const std::regex lead(R"(^(Notably|Moreover|Furthermore|Additionally|In addition|Similarly|Consistently|Importantly),?\s+)");
  subject = std::regex_replace(subject, lead, "");
  static const std::regex tail(R"(\s+(significantly|markedly|also|further|strongly|dramatically|substantially|robustly)\s*$)",
                               std::regex::icase);
  subject = text::trim(std::regex_replace(text::trim(subject), tail, ""));

  std::string object = sentence.substr(verb_pos);
  auto lower_obj = text::to_lower(object);
  std::size_t cut = object.find_first_of("(,;.");
  for (auto stop : {" via ", " through ", " by ", " compared", " relative to", " versus", " vs", " in ", " when ", " with "}) {
    auto p = lower_obj.find(stop);
    if (p != std::string::npos && p < cut) cut = p;
  }
  auto phenotype = text::trim(object.substr(0, cut));

  auto lower = text::to_lower(sentence);
  auto design = design_of(lower);
  if (design == "unknown") design = design_of(chunk_lower);

  static const std::regex object_re(R"(\b([A-Za-z0-9-]+\s+(?:cells|mice|patients|rats|tissues|organoids))\b)");
  std::smatch om;
  item["study_object"] = std::regex_search(sentence, om, object_re) ? json(om[1].str()) : json(nullptr);
  item["intervention"] = subject.empty() ? json(nullptr) : json(subject);
  auto comparison = clause_after(sentence, {"compared with ", "compared to ", "relative to ", "versus ", "vs. "});
  item["comparison"] = comparison ? json(*comparison) : json(nullptr);
  auto entities = entities_of(sentence);
  std::string metrics;
  for (const auto& e : entities) {
    if (e["type"] == "Phenotype") metrics += (metrics.empty() ? "" : ", ") + e["name"].get<std::string>();
  }
  item["outcome_metrics"] = metrics.empty() ? json(nullptr) : json(metrics);
  item["core_entities"] = entities;
  auto mechanism = clause_after(sentence, {" via ", " through ", " by "});
  item["bio_mechanism"] = mechanism ? json(*mechanism) : json(nullptr);
  item["phenotype"] = phenotype.empty() ? json(nullptr) : json(phenotype);
  item["study_design"] = design;
  item["clinical_stage"] = stage_of(lower, design);
  auto p = find_p_value(sentence);
  auto n = find_sample_size(sentence);
  auto fold = find_fold(sentence);
  item["p_value"] = p ? json(*p) : json(nullptr);
  item["sample_size"] = n ? json(*n) : json(nullptr);
  item["fold_change"] = fold ? json(*fold) : json(nullptr);
  item["experimental_context"] = design == "unknown" ? std::string("not stated") : design + " experiment";
  item["source_text"] = sentence;
  double confidence = 0.6 + (p ? 0.1 : 0.0) + (n ? 0.1 : 0.0) + (entities.empty() ? 0.0 : 0.1);
  item["extraction_confidence"] = std::min(confidence, 0.95);
  return item;
}

std::string respond_extract(const std::string& user) {
  const std::string open = "### TEXT TO ANALYZE\n---\n";
  auto a = user.find(open);
  if (a == std::string::npos) return R"({"evidence": []})";
  a += open.size();
  auto b = user.rfind("\n---");
  auto chunk = user.substr(a, b == std::string::npos || b < a ? std::string::npos : b - a);
  auto chunk_lower = text::to_lower(chunk);
  json evidence = json::array();
  for (const auto& s : sentences(chunk)) {
    auto lower = text::to_lower(s);
    if (is_background(lower)) continue;
    if (!std::regex_search(s, polarity_verb())) continue;
    bool stats = find_p_value(s) || find_sample_size(s) || find_fold(s);
    if (!stats && entities_of(s).empty()) continue;
    evidence.push_back(extract_item(s, chunk_lower));
  }
  return json{{"evidence", evidence}}.dump();
}

std::string respond_enrich(const std::string& user) {
  auto pos = user.find("Evidence to enrich:\n");
  if (pos == std::string::npos) return R"({"evidence": []})";
  try {
    auto arr = json::parse(user.substr(pos + 20));
    return json{{"evidence", arr}}.dump();
  } catch (const json::exception&) {
    return R"({"evidence": []})";
  }
}

std::string respond_relation(const std::string& user) {
  auto proposal = line_value(user, "Rule-based preliminary classification: ");
  return json{{"relation_type", proposal},
              {"confidence", 0.8},
              {"rationale", "Consistent with the rule-based classification."}}
      .dump();
}

std::string respond_qa(const std::string& user) {
  auto source = between(user, "Evidence Source Text:\n\"", "\"\n");
  auto intervention = line_value(user, "Intervention: ");
  auto outcome = line_value(user, "Outcome: ");
  if (intervention.empty() || intervention == "null") intervention = "the reported intervention";
  if (outcome.empty() || outcome == "null") outcome = "the reported outcome";
  return json{{"question", "Does " + intervention + " affect " + outcome + "?"},
              {"class", "yes"},
              {"answer", "Yes. " + source}}
      .dump();
}

std::string respond_answer(const std::string& user) {
  auto context = between(user, "CONTEXT (EvidenceNet):\n", "\n\nQUESTION:");
  if (context.empty()) context = between(user, "CONTEXT:\n", "\n\nQUESTION:");
  auto question = text::to_lower(line_value(user, "QUESTION: "));
  if (question.empty()) question = text::to_lower(line_value(user, "Question: "));
  bool negated = question.find(" not ") != std::string::npos || question.find("fail to") != std::string::npos;
  std::string explanation = context.empty() ? "Answered from general knowledge." : text::collapse_whitespace(context);
  if (explanation.size() > 400) explanation.resize(400);
  return std::string("CLASSIFICATION: ") + (negated ? "NO" : "YES") + "\nEXPLANATION: " + explanation;
}

}  // namespace

std::string mock_respond(const std::string& system, const std::string& user) {
  (void)system;
  if (user.find("### TEXT TO ANALYZE") != std::string::npos) return respond_extract(user);
  if (user.find("Evidence to enrich:") != std::string::npos) return respond_enrich(user);
  if (user.find("Rule-based preliminary classification:") != std::string::npos) return respond_relation(user);
  if (user.find("Evidence Source Text:") != std::string::npos) return respond_qa(user);
  if (user.find("CLASSIFICATION: [YES/NO]") != std::string::npos) return respond_answer(user);
  return "{}";
}

}  // namespace forge
