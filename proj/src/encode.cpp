#include "forge/encode.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"

#include "forge/text.hpp"

namespace forge {

Embedding HashingEncoder::encode(std::string_view text) const {
  Embedding v = Embedding::Zero(dimension_);
  for (const auto& token : text::word_tokens(text)) {
    auto bucket = static_cast<Eigen::Index>(text::fnv1a64(token) % static_cast<std::uint64_t>(dimension_));
    v(bucket) += 1.0;
  }
  const double n = v.norm();
  if (n > 0.0) v /= n;
  return v;
}

namespace {

struct TempFile {
  std::filesystem::path path;
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out.push_back(c);
  }
  out += "'";
  return out;
}

}  // namespace

Embedding CommandEncoder::encode(std::string_view input) const {
  if (text::trim(input).empty()) return Embedding::Zero(dimension_);
  static thread_local std::mt19937_64 namer{std::random_device{}()};
  TempFile tmp{std::filesystem::temp_directory_path() / ("forge-encode-" + std::to_string(namer()) + ".txt")};
  {
    std::ofstream out(tmp.path, std::ios::binary);
    out.write(input.data(), static_cast<std::streamsize>(input.size()));
  }
  auto cmd = "(" + command_ + ") < " + shell_quote(tmp.path.string());
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) fail(ErrorCode::IoError, "cannot start encoder command");
  std::string output;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  int status = ::pclose(pipe);
  if (status != 0) fail(ErrorCode::IoError, "encoder command exited with status " + std::to_string(status));

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(output);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("encoder output is not JSON: ") + e.what());
  }
  if (!parsed.is_array() || static_cast<Eigen::Index>(parsed.size()) != dimension_) {
    fail(ErrorCode::DimensionMismatch, "encoder returned " + std::to_string(parsed.size()) +
                                           " values, expected " + std::to_string(dimension_));
  }
  Embedding v(dimension_);
  for (Eigen::Index i = 0; i < dimension_; ++i) v(i) = parsed[static_cast<std::size_t>(i)].get<double>();
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

std::unique_ptr<TextEncoder> make_encoder(std::string_view name) {
  if (name == "hashing" || name.empty()) return std::make_unique<HashingEncoder>();
  if (name.starts_with("hashing:")) {
    auto dim = std::stol(std::string(name.substr(8)));
    if (dim <= 0) fail(ErrorCode::InvariantViolation, "encoder dimension must be positive");
    return std::make_unique<HashingEncoder>(dim);
  }
  if (name.starts_with("command:")) {
    auto rest = name.substr(8);
    auto colon = rest.find(':');
    if (colon == std::string_view::npos) fail(ErrorCode::InvariantViolation, "expected command:<dim>:<command>");
    auto dim = std::stol(std::string(rest.substr(0, colon)));
    if (dim <= 0) fail(ErrorCode::InvariantViolation, "encoder dimension must be positive");
    return std::make_unique<CommandEncoder>(std::string(rest.substr(colon + 1)), dim);
  }
  fail(ErrorCode::InvariantViolation, "unknown encoder: " + std::string(name));
}

}  // namespace forge
