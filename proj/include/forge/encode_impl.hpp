#pragma once

#include <algorithm>

#include "forge/error.hpp"

namespace forge {

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) fail(ErrorCode::DimensionMismatch, "cosine of vectors with different dimensions");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  // Products are formed elementwise in index order so cosine(a,b) == cosine(b,a) bit for bit.
  Scalar dot(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) dot += a(i) * b(i);
  return std::clamp(dot / (na * nb), Scalar(-1), Scalar(1));
}

}  // namespace forge
