#include <gtest/gtest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "poq/adversary.hpp"
#include "poq/errors.hpp"
#include "poq/wire.hpp"

namespace {

using poq::Rng;
using poq::f2::BitVec;
using poq::wire::FrameType;
using namespace poq::adversary;

TEST(BitCodec, RoundTrip) {
  Rng rng(1, 1);
  for (int i = 0; i < 500; ++i) {
    const std::uint64_t a = rng.bits(13);
    const BitVec v = poq::f2::sample_uniform(rng.below(70), rng);
    const bool c = rng.bit();
    const BitVec packed = BitWriter().put(a, 13).put(v).put(c, 1).take();
    ASSERT_EQ(packed.size(), 13 + v.size() + 1);
    BitReader r(packed);
    ASSERT_EQ(r.get(13), a);
    ASSERT_EQ(r.get_vec(v.size()), v);
    ASSERT_EQ(r.get(1) != 0, c);
    ASSERT_EQ(r.remaining(), 0u);
    ASSERT_THROW(r.get(1), std::out_of_range);
  }
}

TEST(BoundedMemory, RejectsOneBitOver) {
  for (std::size_t m : {0u, 1u, 7u, 64u, 300u}) {
    BoundedMemory mem(m);
    BitVec ok(m);
    for (std::size_t i = 0; i < m; i += 2) ok.set(i, true);
    mem.store(ok);
    EXPECT_EQ(mem.peak_bits(), m);
    try {
      mem.store(BitVec(m + 1));
      FAIL() << "m=" << m;
    } catch (const poq::MemoryBoundViolation& e) {
      EXPECT_EQ(e.attempted_bits, m + 1);
      EXPECT_EQ(e.capacity_bits, m);
      EXPECT_EQ(e.code(), poq::ExitCode::kMemoryBound);
    }
    EXPECT_EQ(mem.load(), ok);
    EXPECT_EQ(mem.peak_bits(), m);
  }
}

// Persists `extra` bits beyond the capacity on the first row, then stays within it.
Strategy overflow_once(std::size_t cap, std::size_t extra, std::size_t n) {
  return [=](const BitVec& state, const poq::wire::Frame& in, poq::RandomSource&) -> Step {
    if (in.type == FrameType::kARow) return Step{{}, state.empty() ? BitVec(cap + extra) : state};
    if (in.type == FrameType::kRVec) return Step{{poq::wire::vec_frame(FrameType::kDVec, BitVec(n))}, state};
    return Step{{}, BitVec()};
  };
}

TEST(BoundedMemory, SessionAbortsOnEveryOverflow) {
  for (std::uint64_t trial = 0; trial < 200; ++trial) {
    const std::size_t cap = 3 + trial % 40;
    const auto over = raz_experiment(6, 12, overflow_once(cap, 1, 6), cap, 1, trial);
    ASSERT_TRUE(over.aborted);
    ASSERT_FALSE(over.success);
    const auto fits = raz_experiment(6, 12, overflow_once(cap, 0, 6), cap, 1, trial);
    ASSERT_FALSE(fits.aborted);
    ASSERT_EQ(fits.memory_bits_peak, cap);
  }
}

TEST(AdversaryParty, FinishesOnVerdict) {
  Rng rng(1, 2);
  AdversaryParty p(raz_guess(4), 0, rng);
  EXPECT_FALSE(p.finished());
  const auto out = p.on_frame(poq::wire::vec_frame(FrameType::kRVec, BitVec()));
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].type, FrameType::kDVec);
  p.on_frame(poq::wire::bit_frame(FrameType::kVerdict, false));
  EXPECT_TRUE(p.finished());
  EXPECT_THROW(p.on_frame(poq::wire::bit_frame(FrameType::kVerdict, false)), poq::ProtocolError);
}

double raz_rate(std::size_t n, std::size_t rounds, const Strategy& s, std::size_t cap, int trials,
                std::uint64_t seed) {
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = raz_experiment(n, rounds, s, cap, seed, static_cast<std::uint64_t>(t));
    EXPECT_FALSE(r.aborted);
    ok += r.success;
  }
  return ok / static_cast<double>(trials);
}

TEST(Raz, UnboundedSolves) {
  EXPECT_GE(raz_rate(12, 24, raz_unbounded(12), kUnbounded, 2000, 2), 0.99);
}

TEST(Raz, UnboundedMemoryIsAllRows) {
  const auto r = raz_experiment(12, 24, raz_unbounded(12), kUnbounded, 2, 0);
  EXPECT_EQ(r.memory_bits_peak, 24u * 13u);
}

TEST(Raz, StoreEquationsMatchesCount) {
  const std::size_t n = 8;
  for (std::size_t j : {2u, 4u, 6u}) {
    const std::size_t m = j * (n + 1);
    const double rate = raz_rate(n, 2 * n, raz_store_equations(n, m), m, 4000, 3 + j);
    const double expect = std::ldexp(1.0, -static_cast<int>(n - j));
    EXPECT_GT(rate, expect / 2) << "j=" << j;
    EXPECT_LT(rate, expect * 2) << "j=" << j;
    EXPECT_LE(raz_experiment(n, 2 * n, raz_store_equations(n, m), m, 3, 0).memory_bits_peak, m);
  }
}

TEST(Raz, GuessIsTwoToMinusN) {
  const int trials = 16000;
  const double rate = raz_rate(4, 8, raz_guess(4), 0, trials, 4);
  const double sigma = std::sqrt((1.0 / 16) * (15.0 / 16) / trials);
  EXPECT_NEAR(rate, 1.0 / 16, 4 * sigma);
}

// Sanity ceiling in the m < n^2/20 regime.
TEST(Raz, BoundedStrategiesStayBelowCeiling) {
  const std::size_t n = 10;
  const std::size_t m = 4;
  ASSERT_LT(m * 20, n * n);
  const double ceiling = 2 * std::ldexp(1.0, -static_cast<int>(n - m / (n + 1)));
  EXPECT_LE(raz_rate(n, 2 * n, raz_store_equations(n, m), m, 20000, 5), ceiling);
  EXPECT_LE(raz_rate(n, 2 * n, raz_guess(n), m, 20000, 6), ceiling);
}

TEST(Raz, RejectsEmptyParameters) {
  Rng rng(1, 3);
  EXPECT_THROW(RazVerifier(0, 4, rng), poq::ConfigError);
  EXPECT_THROW(RazVerifier(4, 0, rng), poq::ConfigError);
}

TEST(GoldreichLevin, Samples) {
  EXPECT_EQ(gl_samples(16, 0.5, 0.5), 8u);
  EXPECT_EQ(gl_samples(8, 0.5, 0.5), 6u);
  EXPECT_EQ(gl_samples(16, 0.25, 0.1), 7u);
  EXPECT_GE(gl_samples(2, 10.0, 0.01), 1u);
  EXPECT_THROW(gl_samples(1, 0.5, 0.5), std::invalid_argument);
  EXPECT_THROW(gl_samples(8, 0.0, 0.5), std::invalid_argument);
}

TEST(GoldreichLevin, ConditionedPerfectOracleIsExact) {
  Rng rng(2, 1);
  for (std::size_t n : {2u, 8u, 16u, 32u}) {
    for (int rep = 0; rep < 20; ++rep) {
      const BitVec x = poq::f2::sample_uniform(n, rng);
      GLOptions opts;
      opts.condition_on = x;
      const auto res = gl_extract(n, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng, opts);
      ASSERT_EQ(res.x, x) << "n=" << n;
    }
  }
}

TEST(GoldreichLevin, RandomGuessesSucceedAtTwoToMinusT) {
  Rng rng(2, 2);
  const std::size_t n = 8;
  const std::size_t t = gl_samples(n, 0.5, 0.5);
  const int trials = 6400;
  int ok = 0;
  for (int i = 0; i < trials; ++i) {
    BitVec x = poq::f2::sample_uniform(n, rng);
    if (x.popcount() == 0) x.set(0, true);  // ties resolve to 0, so x = 0 is always found
    ok += gl_extract(n, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng).x == x;
  }
  const double expect = std::ldexp(1.0, -static_cast<int>(t));
  const double rate = ok / static_cast<double>(trials);
  EXPECT_GT(rate, expect / 2);
  EXPECT_LT(rate, expect * 2);
}

// Agreement 3/4 on a fixed noise pattern; the rate is reported.
TEST(GoldreichLevin, NoisyOracleCalibration) {
  const std::size_t n = 16;
  Rng rng(2, 3);
  std::vector<bool> noise(std::size_t{1} << n, false);
  for (std::size_t i = 0; i < noise.size() / 4;) {
    const std::size_t at = static_cast<std::size_t>(rng.below(noise.size()));
    if (!noise[at]) {
      noise[at] = true;
      ++i;
    }
  }
  GLOptions opts;
  opts.c = 0.1;
  const std::size_t t = gl_samples(n, 0.25, opts.c);
  const int trials = 3000;
  int ok = 0;
  for (int i = 0; i < trials; ++i) {
    const BitVec x = poq::f2::sample_uniform(n, rng);
    const poq::adversary::Oracle f = [&](const BitVec& r) {
      return poq::f2::dot(r, x) != noise[r.extract(0, n)];
    };
    ok += gl_extract(n, 0.25, f, rng, opts).x == x;
  }
  const double rate = ok / static_cast<double>(trials);
  RecordProperty("success_rate", std::to_string(rate));
  RecordProperty("t", std::to_string(t));
  EXPECT_GT(rate, std::ldexp(1.0, -static_cast<int>(t)) / 4);
}

TEST(GoldreichLevin, MemoryAudit) {
  Rng rng(2, 4);
  for (std::size_t n : {8u, 16u, 32u}) {
    const BitVec x = poq::f2::sample_uniform(n, rng);
    const auto res = gl_extract(n, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng);
    EXPECT_GE(res.t, 1u);
    EXPECT_LE(res.memory_bits, 4 * n * static_cast<std::size_t>(std::log2(n))) << "n=" << n;
    EXPECT_GT(res.memory_bits, res.t * n);
  }
}

TEST(GoldreichLevin, SketchFormIgnoresCoordinate) {
  Rng rng(2, 5);
  GLOptions opts;
  opts.sketch_form = true;
  for (int rep = 0; rep < 20; ++rep) {
    const BitVec x = poq::f2::sample_uniform(10, rng);
    opts.condition_on = x;
    const auto res = gl_extract(10, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng, opts);
    EXPECT_EQ(res.x.popcount(), 0u);
  }
}

TEST(GoldreichLevin, RefusesHugeT) {
  Rng rng(2, 6);
  EXPECT_THROW(gl_extract(16, 0.25, [](const BitVec&) { return false; }, rng), std::invalid_argument);
}

// Answers R_VEC with a zero D_VEC; the B_BIT is b(theta).
Strategy theta_responder(bool on_plus, bool on_minus) {
  return [=](const BitVec& state, const poq::wire::Frame& in, poq::RandomSource&) -> Step {
    if (in.type == FrameType::kRVec) {
      const BitVec r = poq::wire::parse_vec(in);
      return Step{{poq::wire::vec_frame(FrameType::kDVec, BitVec(r.size()))}, state};
    }
    const bool minus = poq::wire::parse_bit(in);
    return Step{{poq::wire::bit_frame(FrameType::kBBit, minus ? on_minus : on_plus)}, state};
  };
}

TEST(Predictor, ConstantAnswerGivesZero) {
  Rng rng(3, 1);
  for (int i = 0; i < 100; ++i) {
    const auto r = poq::wire::vec_frame(FrameType::kRVec, poq::f2::sample_uniform(9, rng));
    EXPECT_FALSE(predictor_b(theta_responder(false, false), {}, r, rng));
    EXPECT_FALSE(predictor_b(theta_responder(true, true), {}, r, rng));
  }
}

TEST(Predictor, ThetaDependentAnswerGivesOne) {
  Rng rng(3, 2);
  for (int i = 0; i < 100; ++i) {
    const auto r = poq::wire::vec_frame(FrameType::kRVec, poq::f2::sample_uniform(9, rng));
    EXPECT_TRUE(predictor_b(theta_responder(false, true), {}, r, rng));
    EXPECT_TRUE(predictor_b(theta_responder(true, false), {}, r, rng));
  }
}

TEST(Predictor, RewindsToTheSameRandomness) {
  // Answers with a fresh random bit; equal forks give equal answers.
  const Strategy coin = [](const BitVec& state, const poq::wire::Frame& in,
                           poq::RandomSource& rng) -> Step {
    if (in.type == FrameType::kRVec) return Step{{poq::wire::vec_frame(FrameType::kDVec, BitVec(3))}, state};
    return Step{{poq::wire::bit_frame(FrameType::kBBit, rng.bit())}, state};
  };
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_FALSE(predictor_b(coin, {}, poq::wire::vec_frame(FrameType::kRVec, BitVec(3)), Rng(s, 0)));
  }
}

TEST(Poq1Attack, LinearMemoryAcceptsThreeQuarters) {
  const std::size_t n = 16;
  const int trials = 4000;
  int accepts = 0, c0 = 0, c0_accepts = 0;
  std::size_t peak = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = attack_poq1_linear_memory(n, 7, static_cast<std::uint64_t>(t));
    accepts += r.accept;
    if (!r.challenge && !r.degenerate) {
      ++c0;
      c0_accepts += r.accept;
    }
    peak = std::max(peak, r.memory_bits_peak);
  }
  const double sigma = std::sqrt(0.75 * 0.25 / trials);
  EXPECT_NEAR(accepts / static_cast<double>(trials), 0.75, 4 * sigma);
  EXPECT_GT(c0, trials / 3);
  EXPECT_EQ(c0_accepts, c0);
  EXPECT_LE(peak, n + 2);
}

TEST(Poq1Attack, UnboundedAcceptsAndDetectsChallenge) {
  const int trials = 2000;
  for (std::size_t n : {8u, 16u}) {
    int accepts = 0;
    std::size_t peak = 0;
    for (int t = 0; t < trials; ++t) {
      const auto r = attack_poq1_unbounded(n, 8, static_cast<std::uint64_t>(t));
      accepts += r.accept;
      if (!r.degenerate) {
        ASSERT_TRUE(r.c_detected) << "n=" << n << " trial=" << t;
      }
      peak = std::max(peak, r.memory_bits_peak);
    }
    EXPECT_GE(accepts / static_cast<double>(trials), 0.99) << "n=" << n;
    // Tag, x and 2n rows of n + 1 bits.
    EXPECT_EQ(peak, 1 + (n + 1) + 2 * n * (n + 1)) << "n=" << n;
    EXPECT_GT(peak, n * n / 20);
  }
}

TEST(Poq1Attack, Capacities) {
  EXPECT_EQ(poq1_capacity("linear_memory", 10), 12u);
  EXPECT_EQ(poq1_capacity("unbounded", 10), kUnbounded);
  EXPECT_THROW(poq1_capacity("nope", 10), poq::ConfigError);
  EXPECT_THROW(poq1_strategy("nope"), poq::ConfigError);
}

TEST(Poq1Attack, GlAgainstLinearMemoryNeverExtracts) {
  // b = r.x whatever theta is, so the predictor is constant.
  for (std::uint64_t t = 0; t < 100; ++t) {
    EXPECT_FALSE(gl_against_poq1("linear_memory", 6, 0.5, {}, 9, t));
  }
}

TEST(Poq1Attack, GlAgainstUnboundedRecoversT) {
  // The unbounded prover's answers differ across theta exactly when r.t = 1.
  const std::size_t n = 4;
  const std::size_t t = gl_samples(n + 1, 0.5, 0.5);
  const int trials = 1600;
  int ok = 0;
  for (int i = 0; i < trials; ++i) ok += gl_against_poq1("unbounded", n, 0.5, {}, 10, static_cast<std::uint64_t>(i));
  const double expect = std::ldexp(1.0, -static_cast<int>(t));
  const double rate = ok / static_cast<double>(trials);
  EXPECT_GT(rate, expect / 2);
  EXPECT_LT(rate, expect * 2);
}

poq::clawgen::StreamParams sp(std::size_t lambda, std::size_t k) {
  poq::clawgen::StreamParams p;
  p.lambda = lambda;
  p.k = k;
  return p;
}

TEST(SubsetAttack, FullStorageAlwaysWins) {
  for (std::uint64_t t = 0; t < 40; ++t) {
    const auto r = attack_clawgen_subset(sp(2, 8), 8, 11, t);
    ASSERT_TRUE(r.correct) << t;
    ASSERT_EQ(r.known_components, 2u);
    ASSERT_LE(r.memory_bits_peak, subset_attack_memory(sp(2, 8), 8));
  }
}

TEST(SubsetAttack, NoStorageMatchesBaseline) {
  const int trials = 3200;
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    const auto r = attack_clawgen_subset(sp(2, 8), 0, 12, static_cast<std::uint64_t>(t));
    EXPECT_EQ(r.known_components, 0u);
    ok += r.correct;
  }
  const double p = 1.0 / 16;
  const double sigma = std::sqrt(p * (1 - p) / trials);
  EXPECT_NEAR(ok / static_cast<double>(trials), p, 4 * sigma);
}

TEST(SubsetAttack, MemoryGrowsWithBudget) {
  const auto params = sp(2, 16);
  std::size_t prev = 0;
  for (std::size_t p : {0u, 4u, 8u, 16u}) {
    const std::size_t m = subset_attack_memory(params, p);
    EXPECT_GT(m, prev);
    prev = m;
  }
  EXPECT_EQ(subset_attack_memory(params, 16), subset_attack_memory(params, 40));
}

TEST(AttackReport, JsonFields) {
  AttackReport r;
  r.attack = "linear_memory";
  r.params = R"({"n":16})";
  r.trials = 10;
  r.accepts = 7;
  r.memory_bits_peak = 18;
  r.degenerate_runs = 1;
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["attack"], "linear_memory");
  EXPECT_EQ(j["params"]["n"], 16);
  EXPECT_EQ(j["trials"], 10);
  EXPECT_EQ(j["accepts"], 7);
  EXPECT_EQ(j["memory_bits_peak"], 18);
  EXPECT_EQ(j["degenerate_runs"], 1);
  AttackReport empty;
  EXPECT_TRUE(nlohmann::json::parse(empty.to_json())["params"].is_object());
}

}  // namespace
