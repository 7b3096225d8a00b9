#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "forge/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/prompts_embedded.hpp"
#include "forge/text.hpp"

namespace forge {

std::string mock_respond(const std::string& system, const std::string& user);

std::string complete_with_retry(LlmBackend& backend, const std::string& system, const std::string& user) {
  try {
    return backend.complete(system, user);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BackendFailure) throw;
  }
  return backend.complete(system, user);
}

std::string strip_code_fence(std::string_view response) {
  auto s = text::trim(response);
  if (s.rfind("```", 0) != 0) return s;
  auto nl = s.find('\n');
  if (nl == std::string::npos) return s;
  auto end = s.rfind("```");
  if (end <= nl) return s;
  return text::trim(std::string_view(s).substr(nl + 1, end - nl - 1));
}

std::string request_digest(std::string_view system, std::string_view user) {
  std::string joined;
  joined.reserve(system.size() + user.size() + 1);
  joined.append(system);
  joined.push_back('\x1f');
  joined.append(user);
  return text::sha256_hex(joined);
}

std::string MockBackend::complete(const std::string& system, const std::string& user) {
  const auto key = request_digest(system, user);
  {
    std::lock_guard lock(mutex_);
    ++calls_;
    if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  }
  if (!fixtures_.empty()) {
    auto path = fixtures_ / (key + ".txt");
    if (std::filesystem::exists(path)) {
      std::ifstream in(path, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    }
  }
  return mock_respond(system, user);
}

void MockBackend::add_fixture(std::string_view system, std::string_view user, std::string response) {
  std::lock_guard lock(mutex_);
  memory_[request_digest(system, user)] = std::move(response);
}

std::size_t MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

HttpBackend::HttpBackend(std::string endpoint, std::string model, std::string api_key_env)
    : model_(std::move(model)), api_key_env_(std::move(api_key_env)) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, url)) fail(ErrorCode::InvariantViolation, "backend.endpoint is not an http(s) URL");
  scheme_host_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
}

std::string HttpBackend::complete(const std::string& system, const std::string& user) {
  nlohmann::json messages = nlohmann::json::array();
  if (!system.empty()) messages.push_back({{"role", "system"}, {"content", system}});
  messages.push_back({{"role", "user"}, {"content", user}});
  nlohmann::json body{{"model", model_}, {"messages", messages}, {"temperature", 0}};

  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  httplib::Client client(scheme_host_);
  client.set_read_timeout(120, 0);
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) fail(ErrorCode::BackendFailure, "request to " + scheme_host_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) fail(ErrorCode::BackendFailure, "backend returned HTTP " + std::to_string(res->status));
  try {
    auto parsed = nlohmann::json::parse(res->body);
    return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("unexpected backend payload: ") + e.what());
  }
}

std::unique_ptr<LlmBackend> make_backend(const BackendSettings& s) {
  if (s.name == "mock") {
    return s.fixtures.empty() ? std::make_unique<MockBackend>() : std::make_unique<MockBackend>(s.fixtures);
  }
  if (s.name == "http") {
    if (s.endpoint.empty()) fail(ErrorCode::InvariantViolation, "backend.endpoint is required for the http backend");
    return std::make_unique<HttpBackend>(s.endpoint, s.model, s.api_key_env);
  }
  fail(ErrorCode::InvariantViolation, "unknown backend: " + s.name);
}

namespace prompts {

Template get(Id id) {
  namespace e = forge::embedded;
  switch (id) {
    case Id::Extract: return {std::string(e::a1_system), std::string(e::a1_user)};
    case Id::Enrich: return {std::string(e::a2_system), std::string(e::a2_user)};
    case Id::Relation: return {std::string(e::a3_system), std::string(e::a3_user)};
    case Id::QaGenerate: return {std::string(e::a4_system), std::string(e::a4_user)};
    case Id::AnswerEvidence: return {"", std::string(e::a5_evidence)};
    case Id::AnswerCombined: return {"", std::string(e::a5_combined)};
    case Id::AnswerFallback: return {"", std::string(e::a5_fallback)};
  }
  fail(ErrorCode::InvariantViolation, "unknown prompt id");
}

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '<') {
      auto close = tmpl.find('>', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

}  // namespace prompts

}  // namespace forge
