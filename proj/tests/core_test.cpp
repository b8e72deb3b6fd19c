#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "seqsqueeze/core.hpp"
#include "test_support.hpp"

namespace seqsqueeze {
namespace {

TEST(TargetLength, Examples) {
  EXPECT_EQ(target_length(0.25, 100), 25u);
  EXPECT_EQ(target_length(0.5, 1), 1u);
  EXPECT_EQ(target_length(0.75, 6), 5u);  // 4.5 rounds away from zero
}

TEST(TargetLength, ClampsToAtLeastOne) {
  EXPECT_EQ(target_length(0.01, 10), 1u);
  EXPECT_EQ(target_length(0.25, 1), 1u);
}

TEST(TargetLength, FullRatioIsIdentity) {
  for (std::size_t n = 1; n <= 3000; ++n) ASSERT_EQ(target_length(1.0, n), n);
}

TEST(TargetLength, MonotoneInLengthAndRatio) {
  const double ratios[] = {0.05, 0.1, 0.2, 0.25, 0.3, 1.0 / 3.0, 0.5, 0.6, 2.0 / 3.0, 0.75, 0.9, 1.0};
  for (double rho : ratios) {
    for (std::size_t n = 1; n < 2048; ++n) {
      ASSERT_LE(target_length(rho, n), target_length(rho, n + 1)) << rho << " " << n;
      ASSERT_LE(target_length(rho, n), n);
    }
  }
  for (std::size_t n = 1; n < 300; ++n) {
    for (std::size_t k = 0; k + 1 < std::size(ratios); ++k) {
      ASSERT_LE(target_length(ratios[k], n), target_length(ratios[k + 1], n));
    }
  }
}

TEST(ValidateSequence, FreshZeros) {
  const TokenSequence seq = validate_sequence(Matrix(3, 2));
  EXPECT_EQ(seq.length(), 3u);
  EXPECT_EQ(seq.dim(), 2u);
  EXPECT_EQ(seq.positions(), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_EQ(seq.counts(), (std::vector<std::size_t>{1, 1, 1}));
}

TEST(ValidateSequence, RejectsNaN) {
  Matrix m(3, 2);
  m(1, 1) = std::numeric_limits<float>::quiet_NaN();
  try {
    (void)validate_sequence(m);
    FAIL() << "expected NonFiniteInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
}

TEST(ValidateSequence, RejectsInf) {
  Matrix m(1, 1);
  m(0, 0) = -std::numeric_limits<float>::infinity();
  EXPECT_THROW(
      {
        try {
          (void)validate_sequence(m);
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::NonFiniteInput);
          throw;
        }
      },
      Error);
}

TEST(ValidateSequence, RejectsEmpty) {
  for (const Matrix& m : {Matrix(0, 5), Matrix(4, 0)}) {
    try {
      (void)validate_sequence(m);
      FAIL() << "expected EmptyInput";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
    }
  }
}

TEST(TokenSequence, RejectsNonIncreasingPositions) {
  EXPECT_THROW(TokenSequence(Matrix(2, 1), {2, 2}, {1, 1}), Error);
  EXPECT_THROW(TokenSequence(Matrix(2, 1), {0, 1}, {1, 1}), Error);
  EXPECT_THROW(TokenSequence(Matrix(2, 1), {1, 2}, {1, 0}), Error);
}

TEST(CompressionConfig, ValidatesRatioAndSegments) {
  CompressionConfig cfg;
  cfg.keep_ratio = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.keep_ratio = 1.5;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.keep_ratio = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(cfg.validate(), Error);
  cfg.keep_ratio = 1.0;
  EXPECT_NO_THROW(cfg.validate());
  cfg.segments = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(CompressionConfig, GlobalMergeIgnoresWindow) {
  CompressionConfig cfg;
  cfg.method = Method::GlobalMerge;
  cfg.window = 3;
  EXPECT_EQ(cfg.effective_window(), kUnbounded);
  cfg.method = Method::Ltbm;
  EXPECT_EQ(cfg.effective_window(), Window(3));
}

TEST(Names, RoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_FALSE(parse_method("tome").has_value());
  EXPECT_EQ(parse_weighting("size-weighted"), Weighting::SizeWeighted);
  EXPECT_EQ(parse_weighting("paper-literal"), Weighting::PaperLiteral);
}

TEST(CheckPartition, AcceptsPartitionWithDropped) {
  Provenance prov;
  prov.original_length = 5;
  prov.groups = {{1, 3}, {2}, {5}};
  prov.dropped = {4};
  EXPECT_EQ(check_partition(prov), "");
}

TEST(CheckPartition, ReportsViolations) {
  Provenance prov;
  prov.original_length = 4;
  prov.groups = {{1, 2}, {2, 3}, {4}};
  EXPECT_NE(check_partition(prov).find("twice"), std::string::npos);
  prov.groups = {{1, 2}, {4}};
  EXPECT_NE(check_partition(prov).find("not covered"), std::string::npos);
  prov.groups = {{2, 3}, {1, 4}};
  EXPECT_NE(check_partition(prov).find("representative"), std::string::npos);
  prov.groups = {{1, 2}, {3, 5}};
  EXPECT_NE(check_partition(prov).find("out of range"), std::string::npos);
}

}  // namespace
}  // namespace seqsqueeze
