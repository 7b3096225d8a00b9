#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <string_view>

namespace forge {

/// Dense text embedding. Unit L2 norm, or exactly zero for blank text.
template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Embedding = EmbeddingT<double>;

/// Cosine similarity in [-1, 1]. Zero vectors compare as 0.
/// Throws DimensionMismatch when sizes differ.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b);

/// Contract for the sentence encoder used wherever texts are compared.
/// Implementations must be deterministic and safe to call concurrently.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  virtual std::string name() const = 0;
  virtual Eigen::Index dimension() const = 0;
  virtual Embedding encode(std::string_view text) const = 0;
};

/// Feature-hashed bag of lowercase word tokens with term-frequency weights.
class HashingEncoder final : public TextEncoder {
 public:
  explicit HashingEncoder(Eigen::Index dimension = 1024) : dimension_(dimension) {}

  std::string name() const override { return "hashing"; }
  Eigen::Index dimension() const override { return dimension_; }
  Embedding encode(std::string_view text) const override;

 private:
  Eigen::Index dimension_;
};

/// Runs an external command per text: the text is written to its stdin and
/// the command prints the vector as a JSON array. The result is renormalized.
class CommandEncoder final : public TextEncoder {
 public:
  CommandEncoder(std::string command, Eigen::Index dimension)
      : command_(std::move(command)), dimension_(dimension) {}

  std::string name() const override { return "command:" + command_; }
  Eigen::Index dimension() const override { return dimension_; }
  Embedding encode(std::string_view text) const override;

 private:
  std::string command_;
  Eigen::Index dimension_;
};

/// "hashing" or "hashing:<dim>" or "command:<dim>:<shell command>".
std::unique_ptr<TextEncoder> make_encoder(std::string_view name);

}  // namespace forge

#include "forge/encode_impl.hpp"
