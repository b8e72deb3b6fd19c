#pragma once

// Masked cosine-similarity tables for bipartite matching and L2-norm
// importance scores for Top-K pruning. All reductions run in float64.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "seqsqueeze/core.hpp"

namespace seqsqueeze {

inline constexpr double kCosineEpsilon = 1e-12;
inline constexpr double kMaskedScore = -std::numeric_limits<double>::infinity();

namespace detail {

// Four interleaved partial sums, combined in a fixed order, so results are
// reproducible while the loop is not bound by one add chain.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const std::size_t n = a.size();
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    s0 += static_cast<double>(a[k]) * static_cast<double>(b[k]);
    s1 += static_cast<double>(a[k + 1]) * static_cast<double>(b[k + 1]);
    s2 += static_cast<double>(a[k + 2]) * static_cast<double>(b[k + 2]);
    s3 += static_cast<double>(a[k + 3]) * static_cast<double>(b[k + 3]);
  }
  for (; k < n; ++k) s0 += static_cast<double>(a[k]) * static_cast<double>(b[k]);
  return (s0 + s1) + (s2 + s3);
}

inline double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

inline double cosine_from_parts(double dot_ab, double norm_a, double norm_b) {
  return dot_ab / std::max(norm_a * norm_b, kCosineEpsilon);
}

}  // namespace detail

/// a.b / max(|a||b|, 1e-12); a zero vector is similar to nothing (score 0).
inline double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "cosine of unequal lengths");
  return detail::cosine_from_parts(detail::dot(a, b), detail::norm(a), detail::norm(b));
}

/// Row-major boolean matrix, true where a source/destination pair may merge.
struct PairMask {
  std::size_t sources = 0;
  std::size_t destinations = 0;
  std::vector<char> allowed;

  PairMask() = default;
  PairMask(std::size_t n_sources, std::size_t n_destinations, bool fill)
      : sources(n_sources), destinations(n_destinations),
        allowed(n_sources * n_destinations, fill ? 1 : 0) {}

  bool operator()(std::size_t i, std::size_t j) const { return allowed[i * destinations + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) { allowed[i * destinations + j] = v ? 1 : 0; }
};

/// |S| x |D| cosine similarities; masked pairs hold -inf so they lose every
/// comparison, including against a similarity of -1.
struct ScoreTable {
  std::size_t sources = 0;
  std::size_t destinations = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * destinations + j]; }
  bool masked(std::size_t i, std::size_t j) const { return std::isinf((*this)(i, j)) && (*this)(i, j) < 0; }
};

inline ScoreTable similarity_table(std::span<const std::span<const float>> sources,
                                   std::span<const std::span<const float>> destinations,
                                   const PairMask& mask) {
  if (mask.sources != sources.size() || mask.destinations != destinations.size()) {
    throw Error(ErrorKind::DimensionMismatch, "mask shape differs from source/destination counts");
  }
  const std::size_t dim = sources.empty() ? (destinations.empty() ? 0 : destinations[0].size())
                                          : sources[0].size();
  auto norms_of = [dim](std::span<const std::span<const float>> vecs) {
    std::vector<double> out(vecs.size());
    for (std::size_t k = 0; k < vecs.size(); ++k) {
      if (vecs[k].size() != dim) throw Error(ErrorKind::DimensionMismatch, "vectors differ in dimension");
      out[k] = detail::norm(vecs[k]);
    }
    return out;
  };
  const auto source_norms = norms_of(sources);
  const auto destination_norms = norms_of(destinations);

  ScoreTable table{sources.size(), destinations.size(),
                   std::vector<double>(sources.size() * destinations.size(), kMaskedScore)};
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = 0; j < destinations.size(); ++j) {
      if (!mask(i, j)) continue;
      table.values[i * table.destinations + j] = detail::cosine_from_parts(
          detail::dot(sources[i], destinations[j]), source_norms[i], destination_norms[j]);
    }
  }
  return table;
}

/// Per-token Euclidean norms, accumulated in float64.
inline std::vector<double> l2_scores(const TokenSequence& seq) {
  std::vector<double> scores(seq.length());
  for (std::size_t k = 0; k < seq.length(); ++k) scores[k] = detail::norm(seq.row(k));
  return scores;
}

}  // namespace seqsqueeze
