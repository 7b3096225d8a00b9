#include <regex>

#include "forge/error.hpp"
#include "forge/evaluate.hpp"
#include "forge/text.hpp"

namespace forge {

std::string_view to_string(YesNo v) noexcept { return v == YesNo::Yes ? "yes" : "no"; }

std::optional<YesNo> parse_yes_no(std::string_view s) {
  auto t = text::to_lower(text::trim(s));
  while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
  if (t == "yes") return YesNo::Yes;
  if (t == "no") return YesNo::No;
  return std::nullopt;
}

std::string_view to_string(QaMode m) noexcept {
  switch (m) {
    case QaMode::Baseline: return "baseline";
    case QaMode::Evidence: return "evidence";
    case QaMode::EvidenceBackground: return "evidence+background";
  }
  return "baseline";
}

std::optional<QaMode> parse_qa_mode(std::string_view s) {
  for (auto m : {QaMode::Baseline, QaMode::Evidence, QaMode::EvidenceBackground})
    if (to_string(m) == s) return m;
  return std::nullopt;
}

Json qa_item_to_json(const QaItem& item) {
  Json j{{"question", item.question}, {"gold_class", to_string(item.gold_class)}, {"gold_answer", item.gold_answer}};
  if (item.predicted_class) j["predicted_class"] = to_string(*item.predicted_class);
  if (item.predicted_answer) j["predicted_answer"] = *item.predicted_answer;
  if (item.evidence_id) j["evidence_id"] = *item.evidence_id;
  return j;
}

namespace {

std::string require_text(const Json& j, std::initializer_list<const char*> keys) {
  for (auto k : keys) {
    auto it = j.find(k);
    if (it != j.end() && it->is_string()) return it->get<std::string>();
  }
  fail(ErrorCode::SchemaViolation, std::string("QA item needs a string '") + *keys.begin() + "'");
}

YesNo require_class(const Json& j, std::initializer_list<const char*> keys) {
  auto s = require_text(j, keys);
  auto c = parse_yes_no(s);
  if (!c) fail(ErrorCode::SchemaViolation, "class must be yes or no, got '" + s + "'");
  return *c;
}

}  // namespace

QaItem qa_item_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::SchemaViolation, "QA item must be an object");
  QaItem q;
  q.question = require_text(j, {"question"});
  q.gold_class = require_class(j, {"gold_class", "class"});
  q.gold_answer = require_text(j, {"gold_answer", "answer"});
  if (j.contains("predicted_class") && !j["predicted_class"].is_null()) {
    q.predicted_class = require_class(j, {"predicted_class"});
  }
  if (j.contains("predicted_answer") && j["predicted_answer"].is_string()) {
    q.predicted_answer = j["predicted_answer"].get<std::string>();
  }
  if (j.contains("evidence_id") && j["evidence_id"].is_string()) q.evidence_id = j["evidence_id"].get<std::string>();
  return q;
}

std::vector<QaItem> qa_items_from_json(const Json& j) {
  const Json* arr = &j;
  if (j.is_object() && j.contains("items")) arr = &j["items"];
  if (!arr->is_array()) fail(ErrorCode::SchemaViolation, "QA file must hold a list of items");
  std::vector<QaItem> out;
  for (const auto& x : *arr) out.push_back(qa_item_from_json(x));
  return out;
}

Json qa_items_to_json(std::span<const QaItem> items) {
  Json arr = Json::array();
  for (const auto& q : items) arr.push_back(qa_item_to_json(q));
  return arr;
}

bool qa_eligible(const EvidenceRecord& r, const QaSampling& s) {
  return r.score.composite > s.min_composite && text::scalar_length(r.evidence.source_text) > s.min_source_len;
}

QaItem generate_qa(const EvidenceRecord& record, LlmBackend& backend, const QaSampling& sampling) {
  if (!qa_eligible(record, sampling)) {
    fail(ErrorCode::PreconditionViolation,
         record.evidence_id + " is outside the QA sampling filter (composite " + std::to_string(record.score.composite) +
             ", source_text length " + std::to_string(text::scalar_length(record.evidence.source_text)) + ")");
  }
  const auto& e = record.evidence;
  auto or_null = [](const std::optional<std::string>& s) { return s && !s->empty() ? *s : std::string("null"); };
  auto outcome = e.phenotype ? e.phenotype : e.outcome_metrics;
  auto tmpl = prompts::get(prompts::Id::QaGenerate);
  auto user = prompts::render(tmpl.user, {{"SOURCE_TEXT", e.source_text},
                                          {"INTERVENTION", or_null(e.intervention)},
                                          {"OUTCOME", or_null(outcome)},
                                          {"MECHANISM", or_null(e.bio_mechanism)}});
  auto raw = complete_with_retry(backend, tmpl.system, user);
  Json parsed;
  try {
    parsed = Json::parse(strip_code_fence(raw));
  } catch (const Json::exception&) {
    fail(ErrorCode::SchemaViolation, "QA response is not valid JSON");
  }
  if (!parsed.is_object()) fail(ErrorCode::SchemaViolation, "QA response is not a JSON object");
  QaItem q;
  q.question = require_text(parsed, {"question"});
  if (text::trim(q.question).empty()) fail(ErrorCode::SchemaViolation, "QA response has an empty question");
  q.gold_class = require_class(parsed, {"class"});
  q.gold_answer = require_text(parsed, {"answer"});
  q.evidence_id = record.evidence_id;
  return q;
}

std::pair<YesNo, std::string> parse_answer(std::string_view response) {
  static const std::regex cls(R"(^[\s*#>_\-]*classification[\s*_]*:[\s*_\[]*(yes|no)\b)", std::regex::icase);
  static const std::regex expl(R"(explanation[\s*_]*:[\s*_]*)", std::regex::icase);
  std::string body(response);
  std::optional<YesNo> found;
  std::size_t after = std::string::npos;
  std::size_t pos = 0;
  while (pos <= body.size() && !found) {
    auto nl = body.find('\n', pos);
    auto line = body.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    std::smatch m;
    if (std::regex_search(line, m, cls)) {
      found = parse_yes_no(m[1].str());
      after = nl == std::string::npos ? body.size() : nl + 1;
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  if (!found) fail(ErrorCode::UnparseableAnswer, "no CLASSIFICATION line in answer");
  std::string rest = body.substr(after);
  std::smatch m;
  if (std::regex_search(rest, m, expl)) rest = m.suffix().str();
  return {*found, text::trim(rest)};
}

namespace {

std::string bullet_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += "\n";
    out += "[" + std::to_string(i + 1) + "] " + items[i];
  }
  return out;
}

}  // namespace

QaItem answer_question(const QaItem& item, const QaContexts& contexts, QaMode mode, LlmBackend& backend) {
  if ((mode == QaMode::Baseline) != contexts.empty()) {
    fail(ErrorCode::PreconditionViolation, "contexts must be empty exactly in baseline mode");
  }
  prompts::Template tmpl;
  std::string user;
  switch (mode) {
    case QaMode::Baseline:
      tmpl = prompts::get(prompts::Id::AnswerFallback);
      user = prompts::render(tmpl.user, {{"QUESTION", item.question}});
      break;
    case QaMode::Evidence:
      tmpl = prompts::get(prompts::Id::AnswerEvidence);
      user = prompts::render(tmpl.user, {{"EVIDENCE CONTEXT", bullet_list(contexts.evidence)}, {"QUESTION", item.question}});
      break;
    case QaMode::EvidenceBackground: {
      tmpl = prompts::get(prompts::Id::AnswerCombined);
      std::string combined = "EvidenceNet:\n" + (contexts.evidence.empty() ? "(none)" : bullet_list(contexts.evidence)) +
                             "\n\nTarKG:\n" +
                             (contexts.background.empty() ? "(none)" : bullet_list(contexts.background));
      user = prompts::render(tmpl.user, {{"COMBINED_CONTEXT", combined}, {"QUESTION", item.question}});
      break;
    }
  }
  auto [cls, explanation] = parse_answer(complete_with_retry(backend, tmpl.system, user));
  QaItem out = item;
  out.predicted_class = cls;
  out.predicted_answer = std::move(explanation);
  return out;
}

QaMetrics qa_metrics(std::span<const QaItem> items, const TextEncoder& encoder) {
  if (items.empty()) fail(ErrorCode::EmptySet, "no QA items to score");
  QaMetrics m;
  m.n = items.size();
  std::size_t correct = 0;
  double sim = 0.0;
  for (const auto& q : items) {
    if (!q.predicted_class || !q.predicted_answer) {
      fail(ErrorCode::PreconditionViolation, "QA item without a prediction: " + q.question);
    }
    if (*q.predicted_class == q.gold_class) ++correct;
    sim += cosine(encoder.encode(*q.predicted_answer), encoder.encode(q.gold_answer));
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
  m.semsim = sim / static_cast<double>(m.n);
  return m;
}

}  // namespace forge
