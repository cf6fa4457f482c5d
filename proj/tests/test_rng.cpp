#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pfp/rng.hpp"

using pfp::RngStream;

TEST(Philox, KnownAnswerVectors) {
  using A = std::array<std::uint32_t, 4>;
  EXPECT_EQ(RngStream::philox({0, 0, 0, 0}, {0, 0}),
            (A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(RngStream::philox({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              {0xffffffff, 0xffffffff}),
            (A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(RngStream::philox({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}),
            (A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameSeedSameSequence) {
  RngStream a(42, 3);
  RngStream b(42, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, StreamsAndSubstreamsDiffer) {
  std::set<std::uint64_t> first;
  RngStream base(42, 0);
  for (std::uint64_t i = 0; i < 1000; ++i) first.insert(base.substream(i)());
  first.insert(RngStream(42, 1)());
  first.insert(RngStream(43, 0)());
  EXPECT_EQ(first.size(), 1002u);
}

TEST(RngStream, SubstreamIgnoresParentPosition) {
  RngStream a(5, 9);
  RngStream b(5, 9);
  for (int i = 0; i < 17; ++i) b();
  EXPECT_EQ(a.substream(4)(), b.substream(4)());
}

TEST(RngStream, UniformRanges) {
  RngStream r(1, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_EQ(u, std::ldexp(std::floor(std::ldexp(u, 53)), -53));  // on the 2^-53 grid
    const double v = r.open_uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
}

TEST(RngStream, ExponentialMean) {
  RngStream r(2, 0);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double e = r.exponential();
    ASSERT_TRUE(std::isfinite(e));
    ASSERT_GT(e, 0.0);
    sum += e;
  }
  EXPECT_NEAR(sum / n, 1.0, 5.0 / std::sqrt(n));
}
