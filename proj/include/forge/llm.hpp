#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

/// Text-in, text-out completion contract. Transport problems surface as
/// BackendFailure; everything else is the caller's to parse.
class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  virtual std::string name() const = 0;
  virtual std::string complete(const std::string& system, const std::string& user) = 0;
};

/// Calls `backend` once and retries a single time on BackendFailure.
std::string complete_with_retry(LlmBackend& backend, const std::string& system, const std::string& user);

/// Digest used as the fixture key for a (system, user) request.
std::string request_digest(std::string_view system, std::string_view user);

/// Trims a response and unwraps a surrounding Markdown code fence, if any.
std::string strip_code_fence(std::string_view response);

/// Deterministic backend. Looks up `<digest>.txt` in the fixture directory
/// first; otherwise answers with a rule-based responder that recognizes the
/// bundled prompt templates.
class MockBackend final : public LlmBackend {
 public:
  MockBackend() = default;
  explicit MockBackend(std::filesystem::path fixtures) : fixtures_(std::move(fixtures)) {}

  std::string name() const override { return "mock"; }
  std::string complete(const std::string& system, const std::string& user) override;

  /// Registers an in-memory response for one request.
  void add_fixture(std::string_view system, std::string_view user, std::string response);

  std::size_t calls() const;

 private:
  std::filesystem::path fixtures_;
  std::map<std::string, std::string> memory_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// OpenAI-compatible chat-completions endpoint. The API key is read from the
/// named environment variable at call time and never stored.
class HttpBackend final : public LlmBackend {
 public:
  HttpBackend(std::string endpoint, std::string model, std::string api_key_env);

  std::string name() const override { return "http:" + model_; }
  std::string complete(const std::string& system, const std::string& user) override;

 private:
  std::string scheme_host_;
  std::string path_;
  std::string model_;
  std::string api_key_env_;
};

struct BackendSettings {
  std::string name = "mock";
  std::string fixtures;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "FORGE_API_KEY";
};

std::unique_ptr<LlmBackend> make_backend(const BackendSettings& settings);

namespace prompts {

struct Template {
  std::string system;
  std::string user;
};

enum class Id { Extract, Enrich, Relation, QaGenerate, AnswerEvidence, AnswerCombined, AnswerFallback };

/// Bundled template text.
Template get(Id id);

/// Replaces each `<NAME>` placeholder from `values` in one left-to-right
/// pass. Inserted text is never rescanned; unknown placeholders stay as is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

}  // namespace prompts

}  // namespace forge
