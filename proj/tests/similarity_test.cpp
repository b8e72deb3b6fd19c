#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "seqsqueeze/similarity.hpp"
#include "test_support.hpp"

namespace seqsqueeze {
namespace {

using Vec = std::vector<float>;
using Rows = std::vector<std::span<const float>>;

// Independent scalar recomputation used as the oracle for table entries.
double scalar_cosine(const Vec& a, const Vec& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += static_cast<long double>(a[k]) * b[k];
    aa += static_cast<long double>(a[k]) * a[k];
    bb += static_cast<long double>(b[k]) * b[k];
  }
  const long double den = std::sqrt(aa) * std::sqrt(bb);
  return static_cast<double>(ab / std::max(den, 1e-12L));
}

std::vector<Vec> random_vectors(std::size_t n, std::size_t dim, std::uint64_t seed) {
  testkit::SplitMix64 rng(seed);
  std::vector<Vec> out(n, Vec(dim));
  for (auto& v : out)
    for (auto& x : v) x = static_cast<float>(rng.gaussian());
  return out;
}

Rows spans(const std::vector<Vec>& vs) { return Rows(vs.begin(), vs.end()); }

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine(Vec{1, 0}, Vec{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine(Vec{1, 0}, Vec{0, 1}), 0.0);
  EXPECT_NEAR(cosine(Vec{1, 0}, Vec{1, 1}), 0.70710678, 1e-8);
}

TEST(Cosine, ZeroVectorScoresZero) {
  EXPECT_EQ(cosine(Vec{0, 0}, Vec{1, 2}), 0.0);
  EXPECT_EQ(cosine(Vec{0, 0}, Vec{0, 0}), 0.0);
}

TEST(Cosine, DimensionMismatch) {
  try {
    (void)cosine(Vec{1, 0}, Vec{1, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(Cosine, SymmetricAndScaleInvariant) {
  const auto vs = random_vectors(40, 7, 11);
  testkit::SplitMix64 rng(99);
  for (std::size_t k = 0; k + 1 < vs.size(); ++k) {
    EXPECT_EQ(cosine(vs[k], vs[k + 1]), cosine(vs[k + 1], vs[k]));
    const float c = static_cast<float>(0.01 + 100.0 * rng.uniform());
    Vec scaled = vs[k];
    for (auto& x : scaled) x *= c;
    EXPECT_NEAR(cosine(vs[k], scaled), 1.0, 1e-6);
  }
}

TEST(Cosine, InvariantUnderCommonRotation) {
  constexpr std::size_t dim = 6;
  testkit::SplitMix64 rng(2024);
  for (int trial = 0; trial < 25; ++trial) {
    // Random orthonormal basis by Gram-Schmidt on Gaussian vectors.
    std::vector<std::vector<double>> q(dim, std::vector<double>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
      for (auto& x : q[r]) x = rng.gaussian();
      for (std::size_t p = 0; p < r; ++p) {
        double proj = 0;
        for (std::size_t c = 0; c < dim; ++c) proj += q[r][c] * q[p][c];
        for (std::size_t c = 0; c < dim; ++c) q[r][c] -= proj * q[p][c];
      }
      double n = 0;
      for (double x : q[r]) n += x * x;
      for (double& x : q[r]) x /= std::sqrt(n);
    }
    auto rotate = [&](const Vec& v) {
      Vec out(dim);
      for (std::size_t r = 0; r < dim; ++r) {
        double acc = 0;
        for (std::size_t c = 0; c < dim; ++c) acc += q[r][c] * v[c];
        out[r] = static_cast<float>(acc);
      }
      return out;
    };
    const auto vs = random_vectors(2, dim, 500 + static_cast<std::uint64_t>(trial));
    EXPECT_NEAR(cosine(vs[0], vs[1]), cosine(rotate(vs[0]), rotate(vs[1])), 1e-5);
  }
}

TEST(SimilarityTable, FullMask) {
  const std::vector<Vec> s{{1, 0}};
  const std::vector<Vec> d{{1, 0}, {0, 1}};
  const ScoreTable t = similarity_table(spans(s), spans(d), PairMask(1, 2, true));
  EXPECT_EQ(t(0, 0), 1.0);
  EXPECT_EQ(t(0, 1), 0.0);
}

TEST(SimilarityTable, MaskedEntryIsNegativeInfinity) {
  const std::vector<Vec> s{{1, 0}};
  const std::vector<Vec> d{{1, 0}, {0, 1}};
  PairMask mask(1, 2, true);
  mask.set(0, 1, false);
  const ScoreTable t = similarity_table(spans(s), spans(d), mask);
  EXPECT_EQ(t(0, 0), 1.0);
  EXPECT_TRUE(std::isinf(t(0, 1)) && t(0, 1) < 0);
  EXPECT_TRUE(t.masked(0, 1));
  EXPECT_FALSE(t.masked(0, 0));
}

TEST(SimilarityTable, MatchesScalarOracle) {
  const auto s = random_vectors(3, 5, 7);
  const auto d = random_vectors(3, 5, 8);
  const ScoreTable t = similarity_table(spans(s), spans(d), PairMask(3, 3, true));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(t(i, j), scalar_cosine(s[i], d[j]), 1e-12);
  }
}

TEST(SimilarityTable, MatchesStandaloneCosineExactly) {
  const auto s = random_vectors(9, 33, 1);
  const auto d = random_vectors(8, 33, 2);
  const ScoreTable t = similarity_table(spans(s), spans(d), PairMask(9, 8, true));
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(t(i, j), cosine(s[i], d[j]));
}

TEST(SimilarityTable, MaskedNeverBeatsUnmasked) {
  const auto s = random_vectors(10, 4, 3);
  const auto d = random_vectors(10, 4, 4);
  PairMask mask(10, 10, true);
  testkit::SplitMix64 rng(5);
  for (auto& a : mask.allowed) a = rng.below(2) ? 1 : 0;
  const ScoreTable t = similarity_table(spans(s), spans(d), mask);
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    if (mask.allowed[k]) {
      EXPECT_GE(t.values[k], -1.0 - 1e-6);
      EXPECT_LE(t.values[k], 1.0 + 1e-6);
      for (std::size_t m = 0; m < t.values.size(); ++m) {
        if (!mask.allowed[m]) {
          EXPECT_LT(t.values[m], t.values[k]);
        }
      }
    }
  }
}

TEST(SimilarityTable, DimensionMismatch) {
  const std::vector<Vec> s{{1, 0}};
  const std::vector<Vec> d{{1, 0, 0}};
  EXPECT_THROW((void)similarity_table(spans(s), spans(d), PairMask(1, 1, true)), Error);
  EXPECT_THROW((void)similarity_table(spans(s), spans(s), PairMask(2, 1, true)), Error);
}

TEST(L2Scores, Examples) {
  EXPECT_EQ(l2_scores(validate_sequence(test::from_rows({{3, 4}, {0, 0}}))), (std::vector<double>{5.0, 0.0}));
  EXPECT_EQ(l2_scores(validate_sequence(test::from_rows({{1, 0}, {0, 1}}))), (std::vector<double>{1.0, 1.0}));
}

TEST(L2Scores, MatchesScalarOracle) {
  const TokenSequence seq = test::random_sequence(8, 4, 21);
  const auto scores = l2_scores(seq);
  for (std::size_t k = 0; k < 8; ++k) {
    double ss = 0;
    for (float v : seq.row(k)) ss += static_cast<double>(v) * v;
    EXPECT_NEAR(scores[k], std::sqrt(ss), 1e-12);
    EXPECT_GE(scores[k], 0.0);
  }
}

}  // namespace
}  // namespace seqsqueeze
