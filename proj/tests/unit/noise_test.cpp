#include "test_util.hpp"

#include <stacklq/noise.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace stacklq;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswerZero) {
  const PhiloxCounter out = philox4x32_10({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const PhiloxCounter out =
      philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const PhiloxCounter out = philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                          {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(NoiseSource, DrawsAreReproducible) {
  const NoiseSource a(7), b(7);
  for (std::uint64_t k = 0; k < 50; ++k) {
    EXPECT_EQ(a.normal(1, 3, k), b.normal(1, 3, k));
  }
  EXPECT_NE(a.normal(0, 0, 0), NoiseSource(8).normal(0, 0, 0));
}

TEST(NoiseSource, ChannelSeedLeavesOtherChannels) {
  const NoiseSource base(11);
  const NoiseSource moved = base.with_channel_seed(0, 999);
  for (std::uint64_t k = 0; k < 20; ++k) {
    EXPECT_NE(base.normal(0, 2, k), moved.normal(0, 2, k));
    EXPECT_EQ(base.normal(1, 2, k), moved.normal(1, 2, k));
    EXPECT_EQ(base.normal(2, 2, k), moved.normal(2, 2, k));
  }
}

TEST(NoiseSource, StandardNormalMoments) {
  const NoiseSource src(3);
  const int N = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < N; ++i) {
    const double z = src.normal(i % 3, static_cast<std::uint64_t>(i) / 3, 17);
    s1 += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  EXPECT_NEAR(s1 / N, 0.0, 4.0 / std::sqrt(N));
  EXPECT_NEAR(s2 / N, 1.0, 4.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(s4 / N, 3.0, 4.0 * std::sqrt(96.0 / N));
}

TEST(NoiseSource, IncrementsScaleWithStep) {
  const TimeGrid g = TimeGrid::uniform(4.0, 16);
  std::vector<std::array<double, 3>> dW;
  const NoiseSource src(5);
  src.increments(g, 9, dW);
  ASSERT_EQ(dW.size(), 16u);
  EXPECT_DOUBLE_EQ(dW[4][1], std::sqrt(0.25) * src.normal(1, 9, 4));
}

TEST(NoiseSource, MixedPathIndices) {
  const TimeGrid g = TimeGrid::uniform(1.0, 8);
  const NoiseSource src(5);
  std::vector<std::array<double, 3>> a, b;
  src.increments(g, {1, 2, 3}, a);
  src.increments(g, 3, b);
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(a[k][2], b[k][2]);
    EXPECT_NE(a[k][0], b[k][0]);
  }
}
