#include <gtest/gtest.h>

#include <array>
#include <set>

#include "enumerate.hpp"
#include "poq/rng.hpp"

namespace {

using poq::Rng;

TEST(Philox, KnownAnswerZero) {
  const auto out = poq::philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = poq::philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                                   {0xffffffff, 0xffffffff});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = poq::philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                                   {0xa4093822, 0x299f31d0});
  EXPECT_EQ(out, (std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Rng, SameSeedAndStreamReproduce) {
  Rng a(7, 3), b(7, 3);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, StreamsDiffer) {
  Rng a(7, 3), b(7, 4), c(8, 3);
  int same_b = 0, same_c = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    same_b += x == b.next_u64();
    same_c += x == c.next_u64();
  }
  EXPECT_EQ(same_b, 0);
  EXPECT_EQ(same_c, 0);
}

TEST(Rng, BitsStayInRange) {
  Rng r(1, 1);
  for (unsigned c = 1; c < 64; ++c) {
    for (int i = 0; i < 50; ++i) ASSERT_LT(r.bits(c), std::uint64_t{1} << c);
  }
  EXPECT_EQ(r.bits(0), 0U);
  EXPECT_THROW(r.bits(65), std::invalid_argument);
}

TEST(Rng, BelowIsRoughlyUniform) {
  Rng r(2, 9);
  std::array<int, 6> counts{};
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[r.below(6)];
  for (const int c : counts) EXPECT_NEAR(c, n / 6, 5 * std::sqrt(n / 6.0));
  EXPECT_EQ(r.below(1), 0U);
  EXPECT_THROW(r.below(0), std::invalid_argument);
}

TEST(Rng, UniformInUnitInterval) {
  Rng r(3, 3);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 10000, 0.5, 0.02);
}

TEST(TrialStream, DistinctAcrossTrialsAndRoles) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t t = 0; t < 5000; ++t) {
    for (auto role : {poq::Role::kVerifier, poq::Role::kProver, poq::Role::kHarness}) {
      EXPECT_TRUE(seen.insert(poq::trial_stream(t, role)).second);
    }
  }
}

TEST(TrialStream, TrialRngMatchesExplicitStream) {
  Rng a = poq::trial_rng(11, 5, poq::Role::kProver);
  Rng b(11, poq::trial_stream(5, poq::Role::kProver));
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(EnumeratingSource, ExactLawOfTwoDraws) {
  const auto law = poq::testing::enumerate([](poq::RandomSource& rng) -> std::optional<std::string> {
    const auto a = rng.below(3);
    const auto b = rng.bits(1);
    return std::to_string(a + b);
  });
  const auto p = law.normalized();
  EXPECT_NEAR(p.at("0"), 1.0 / 6, 1e-15);
  EXPECT_NEAR(p.at("1"), 2.0 / 6, 1e-15);
  EXPECT_NEAR(p.at("2"), 2.0 / 6, 1e-15);
  EXPECT_NEAR(p.at("3"), 1.0 / 6, 1e-15);
}

TEST(EnumeratingSource, TruncatesRejectionLoops) {
  const auto law = poq::testing::enumerate(
      [](poq::RandomSource& rng) -> std::optional<std::string> {
        while (rng.bit() == 0) {
        }
        return "done";
      },
      10);
  EXPECT_NEAR(law.total() + law.truncated, 1.0, 1e-15);
  EXPECT_NEAR(law.truncated, std::ldexp(1.0, -10), 1e-15);
}

}  // namespace
