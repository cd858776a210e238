// One PASS/FAIL line per acceptance criterion. Tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "poq/adversary.hpp"
#include "poq/clawgen.hpp"
#include "poq/errors.hpp"
#include "poq/f2.hpp"
#include "poq/ih.hpp"
#include "poq/poq1.hpp"
#include "poq/poq2.hpp"
#include "poq/qsim.hpp"
#include "poq/rng.hpp"
#include "poq/runner.hpp"

namespace {

using poq::Rng;
using poq::f2::BitVec;
using Clock = std::chrono::steady_clock;

const double kCos2 = std::pow(std::cos(M_PI / 8), 2);

// Tolerances.
constexpr double kRateTol = 0.01;
constexpr double kExactTol = 1e-12;
constexpr double kTvdTol = 1e-9;
constexpr double kLinearLo = 0.74, kLinearHi = 0.76;
constexpr double kUnboundedMin = 0.99;
constexpr double kFullRankMin = 0.995;
constexpr double kAttemptTol = 0.10;
constexpr double kGlFactor = 2.0;
constexpr double kGlMemoryC = 4.0;
constexpr double kSigmas = 4.0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Result {
  bool pass;
  std::string detail;
};

poq::runner::RunConfig poq1_cfg(std::size_t n, std::uint64_t trials, std::uint64_t seed) {
  poq::runner::RunConfig c;
  c.protocol = poq::runner::Protocol::kPoq1;
  c.n = n;
  c.trials = trials;
  c.seed = seed;
  return c;
}

poq::clawgen::StreamParams sp(std::size_t lambda, std::size_t k) {
  poq::clawgen::StreamParams p;
  p.lambda = lambda;
  p.k = k;
  return p;
}

Result criterion1() {
  const auto t0 = Clock::now();
  const auto out = poq::runner::run(poq1_cfg(16, 20000, 101));
  const double wall = seconds_since(t0);
  std::size_t checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& o : out.outcomes) {
    if (o.aborted || o.degenerate) continue;
    ++checked;
    const double err = std::abs(o.exact_accept.value_or(-1.0) - kCos2);
    worst = std::max(worst, err);
    bad += err > kExactTol;
  }
  const double rate = out.report.accept_rate;
  const bool pass = out.report.completed == 20000 && std::abs(rate - kCos2) <= kRateTol &&
                    bad == 0 && checked > 0 && wall < 60.0;
  return {pass, fmt::format("rate={:.4f} target={:.5f} exact_worst={:.1e} over {} rank-n trials, {:.1f}s", rate,
                    kCos2, worst, checked, wall)};
}

poq::qsim::Protocol1Messages random_messages(std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 11);
  poq::poq1::Verifier v(n, rng);
  poq::qsim::Protocol1Messages msgs;
  for (std::size_t i = 0; i < v.rounds(); ++i) {
    msgs.a_rows.push_back(v.verifier_round(rng));
    v.verifier_absorb(false);
  }
  msgs.r = v.verifier_commit_challenge(rng);
  msgs.theta = poq::qsim::theta_from_bit(rng.bit());
  return msgs;
}

Result criterion2() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t cases = 0;
  for (std::size_t n = 2; n <= 4; ++n) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto msgs = random_messages(n, seed);
      const auto dense = poq::qsim::statevector_protocol1_oracle(n, msgs);
      const auto claw = poq::qsim::claw_protocol1_distribution(n, msgs);
      worst = std::max(worst, poq::qsim::total_variation(dense.dist, claw));
      ++cases;
    }
  }
  const double wall = seconds_since(t0);
  return {worst < kTvdTol && wall < 120.0,
          fmt::format("max TVD={:.2e} over {} sequences, {:.1f}s", worst, cases, wall)};
}

Result criterion3() {
  const auto t0 = Clock::now();
  const std::size_t n = 16, trials = 10000;
  std::size_t lin = 0, unb = 0, lin_peak = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto a = poq::adversary::attack_poq1_linear_memory(n, 103, t);
    lin += a.accept;
    lin_peak = std::max(lin_peak, a.memory_bits_peak);
    unb += poq::adversary::attack_poq1_unbounded(n, 104, t).accept;
  }
  // Quadratic growth: doubling n should roughly quadruple the peak.
  std::vector<std::size_t> peaks;
  for (std::size_t dim : {8u, 16u, 32u, 64u}) {
    peaks.push_back(poq::adversary::attack_poq1_unbounded(dim, 105, 0).memory_bits_peak);
  }
  bool quadratic = true;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    const double ratio = static_cast<double>(peaks[i]) / static_cast<double>(peaks[i - 1]);
    quadratic = quadratic && ratio > 3.4 && ratio < 4.6;
  }
  const double wall = seconds_since(t0);
  const double lr = lin / static_cast<double>(trials), ur = unb / static_cast<double>(trials);
  const bool pass = lr >= kLinearLo && lr <= kLinearHi && ur >= kUnboundedMin && quadratic &&
                    peaks[1] > n * n / 20 && lin_peak <= n + 2 && wall < 60.0;
  return {pass, fmt::format("linear={:.4f} (peak {} bits) unbounded={:.4f} peaks n=8..64: {} {} {} {}, {:.1f}s",
                    lr, lin_peak, ur, peaks[0], peaks[1], peaks[2], peaks[3], wall)};
}

Result criterion4() {
  Rng rng(106, 0);
  const std::size_t n = 10, samples = 10000;
  std::size_t full = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<BitVec> rows;
    for (std::size_t i = 0; i < 2 * n; ++i) rows.push_back(poq::f2::sample_uniform(n, rng));
    full += poq::f2::rank(poq::f2::BitMat(std::move(rows))) == n;
  }
  const double freq = full / static_cast<double>(samples);
  return {freq >= kFullRankMin, fmt::format("full-rank frequency={:.4f}", freq)};
}

Result criterion5() {
  using poq::ih::Index;
  Rng rng(107, 0);
  bool two_to_one = true;
  for (std::size_t k = 2; k <= 64; k *= 2) {
    for (int i = 0; i < 100; ++i) {
      const Index v = 1 + static_cast<Index>(rng.below(k));
      poq::ih::IHSession sess(k);
      while (!sess.complete()) {
        BitVec h = poq::ih::alice_next_row(sess, rng);
        const bool y = poq::ih::bob_respond(v, h);
        sess.push_row(std::move(h));
        sess.push_response(y);
      }
      std::size_t count = 0;
      for (Index w = 1; w <= k; ++w) count += sess.transcript().consistent(w);
      const auto [a, b] = poq::ih::preimages(sess.transcript());
      two_to_one = two_to_one && count == 2 && (v == a || v == b) && a < b;
    }
  }
  // DP at k = 16 along a nested chain and on a family of random supersets.
  const std::size_t k = 16;
  std::vector<Index> chain;
  std::vector<double> values;
  for (Index v = 1; v <= k; ++v) {
    chain.push_back(v);
    values.push_back(poq::ih::optimal_adversary_value(k, chain));
  }
  bool monotone = true;
  for (std::size_t i = 1; i < values.size(); ++i) monotone = monotone && values[i] >= values[i - 1] - 1e-12;
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<Index> small, big;
    for (Index v = 1; v <= k; ++v) {
      const auto r = rng.below(3);
      if (r == 0) small.push_back(v);
      if (r <= 1) big.push_back(v);
    }
    monotone = monotone && poq::ih::optimal_adversary_value(k, big) >=
                               poq::ih::optimal_adversary_value(k, small) - 1e-12;
  }
  bool singletons = true;
  for (Index v = 1; v <= k; ++v) singletons = singletons && poq::ih::optimal_adversary_value(k, {v}) == 0.0;
  const bool full = std::abs(values.back() - 1.0) < 1e-12;
  return {two_to_one && monotone && singletons && full,
          fmt::format("2-to-1={} monotone={} value([k])={:.3f} singletons_zero={}", two_to_one ? "yes" : "no",
              monotone ? "yes" : "no", values.back(), singletons ? "yes" : "no")};
}

Result criterion6() {
  const auto t0 = Clock::now();
  std::size_t correct = 0;
  for (std::uint64_t t = 0; t < 1000; ++t) {
    correct += poq::clawgen::run_clawgen(sp(8, 64), 108, t, poq::clawgen::Mode::kAccelerated).correct();
  }
  const std::size_t k = 16, claws = 2000;
  double sum = 0.0;
  for (std::size_t c = 0; c < claws; ++c) {
    Rng vr = poq::trial_rng(109, c, poq::Role::kVerifier);
    Rng pr = poq::trial_rng(109, c, poq::Role::kProver);
    sum += static_cast<double>(
        poq::clawgen::gen_one_bit_claw(sp(1, k), vr, pr, poq::clawgen::Mode::kRejection).attempts);
  }
  const double mean = sum / claws;
  const double target = static_cast<double>(k * k);
  const bool pass = correct == 1000 && std::abs(mean - target) <= kAttemptTol * target;
  return {pass, fmt::format("accelerated correct={}/1000 rejection mean attempts={:.1f} (k^2={:.0f}), {:.1f}s",
                    correct, mean, target, seconds_since(t0))};
}

Result criterion7() {
  const std::size_t trials = 20000;
  std::size_t accepts = 0;
  for (std::uint64_t t = 0; t < trials; ++t) accepts += poq::poq2::run_honest(sp(8, 64), 110, t).accept;
  const double rate = accepts / static_cast<double>(trials);
  return {std::abs(rate - kCos2) <= kRateTol, fmt::format("rate={:.4f} target={:.5f}", rate, kCos2)};
}

Result criterion8() {
  Rng rng(111, 0);
  const std::size_t n = 16, trials = 10000;
  const std::size_t t = poq::adversary::gl_samples(n, 0.5, 0.5);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    const BitVec x = poq::f2::sample_uniform(n, rng);
    ok += poq::adversary::gl_extract(n, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng).x == x;
  }
  const double rate = ok / static_cast<double>(trials);
  const double expect = std::ldexp(1.0, -static_cast<int>(t));
  bool memory = true;
  std::string audit;
  for (std::size_t dim : {8u, 16u, 32u}) {
    const BitVec x = poq::f2::sample_uniform(dim, rng);
    const auto res = poq::adversary::gl_extract(dim, 0.5, [&](const BitVec& r) { return poq::f2::dot(r, x); }, rng);
    const double cap = kGlMemoryC * static_cast<double>(dim) * std::log2(static_cast<double>(dim));
    memory = memory && static_cast<double>(res.memory_bits) <= cap;
    audit += fmt::format(" n={}:{}<={:.0f}", dim, res.memory_bits, cap);
  }
  const bool pass = rate >= expect / kGlFactor && rate <= expect * kGlFactor && memory;
  return {pass, fmt::format("t={} rate={:.5f} 2^-t={:.5f} memory{}", t, rate, expect, audit)};
}

Result criterion9() {
  using poq::runner::Protocol;
  using poq::runner::RunConfig;
  std::vector<RunConfig> cfgs;
  RunConfig c = poq1_cfg(16, 100, 112);
  cfgs.push_back(c);
  c.protocol = Protocol::kClawgen;
  c.lambda = 2;
  c.k = 16;
  c.mode = poq::clawgen::Mode::kRejection;
  cfgs.push_back(c);
  c.protocol = Protocol::kPoq2;
  c.lambda = 8;
  c.k = 64;
  c.mode = poq::clawgen::Mode::kAccelerated;
  cfgs.push_back(c);
  c.protocol = Protocol::kRaz;
  c.n = 12;
  cfgs.push_back(c);
  c.protocol = Protocol::kIhDiag;
  c.k = 64;
  cfgs.push_back(c);
  bool pass = true;
  std::string detail;
  for (RunConfig cfg : cfgs) {
    cfg.transport = poq::runner::Transport::kInproc;
    const auto a = poq::runner::run(cfg, true);
    cfg.transport = poq::runner::Transport::kTcp;
    const auto b = poq::runner::run(cfg, true);
    cfg.transport = poq::runner::Transport::kInproc;
    const bool same = poq::runner::transcripts_jsonl(cfg, a.transcripts) ==
                          poq::runner::transcripts_jsonl(cfg, b.transcripts) &&
                      a.report.aborted == 0 && b.report.aborted == 0;
    pass = pass && same;
    detail += fmt::format(" {}={}", poq::runner::protocol_name(cfg.protocol),
                  same ? "identical" : "DIFFERENT");
  }
  return {pass, "100 trials each:" + detail};
}

// Persists cap + extra bits on the first row.
poq::adversary::Strategy overflow(std::size_t cap, std::size_t extra) {
  return [=](const BitVec& state, const poq::wire::Frame& in, poq::RandomSource&) -> poq::adversary::Step {
    if (in.type == poq::wire::FrameType::kARow) return {{}, state.empty() ? BitVec(cap + extra) : state};
    if (in.type == poq::wire::FrameType::kRVec) return {{poq::wire::vec_frame(poq::wire::FrameType::kDVec, BitVec(6))}, state};
    return {{}, BitVec()};
  };
}

Result criterion10() {
  std::puts("   NOT reproducible at desk scale: the streaming parity-learning lower bound, the");
  std::puts("   negligible claw-finding probability against every bounded prover, and the quantum");
  std::puts("   trace-distance bound quantify over all adversaries. The checks below are");
  std::puts("   substitute properties, not verifications of those bounds.");

  std::size_t rejected = 0, accepted = 0;
  const std::size_t runs = 200;
  for (std::uint64_t t = 0; t < runs; ++t) {
    const std::size_t cap = 2 + t % 50;
    rejected += poq::adversary::raz_experiment(6, 12, overflow(cap, 1), cap, 113, t).aborted;
    accepted += !poq::adversary::raz_experiment(6, 12, overflow(cap, 0), cap, 113, t).aborted;
  }
  const bool enforcement = rejected == runs && accepted == runs;

  const std::size_t p = 8;
  const std::vector<std::size_t> ks{16, 32, 64};
  std::vector<double> rates;
  for (const std::size_t k : ks) {
    // Adjacent rates differ by about 0.1 at k = 32, 64; 800 trials resolves that at ~3 sigma.
    const std::size_t trials = k == 16 ? 300 : 800;
    std::size_t ok = 0;
    for (std::uint64_t t = 0; t < trials; ++t) ok += poq::adversary::attack_clawgen_subset(sp(2, k), p, 114, t).correct;
    rates.push_back(ok / static_cast<double>(trials));
  }
  const bool monotone = rates[0] > rates[1] && rates[1] > rates[2];

  const std::size_t lambda = 2, base_trials = 3200;
  std::size_t hits = 0;
  for (std::uint64_t t = 0; t < base_trials; ++t) {
    hits += poq::adversary::attack_clawgen_subset(sp(lambda, 8), 0, 115, t).correct;
  }
  const double baseline = std::ldexp(1.0, -2 * static_cast<int>(lambda));
  const double base_rate = hits / static_cast<double>(base_trials);
  const double sigma = std::sqrt(baseline * (1 - baseline) / base_trials);
  const bool zero_knowledge = std::abs(base_rate - baseline) <= kSigmas * sigma;

  return {enforcement && monotone && zero_knowledge,
          fmt::format("memory enforcement {}/{} rejected, {}/{} at capacity admitted; subset p=8 "
              "k=16,32,64: {:.3f} {:.3f} {:.3f}; p=0 rate={:.4f} vs 2^-2lambda={:.4f}",
              rejected, runs, accepted, runs, rates[0], rates[1], rates[2], base_rate, baseline)};
}

}  // namespace

int main() {
  const std::vector<std::function<Result()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                       criterion5, criterion6, criterion7, criterion8,
                                                       criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i]();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("criterion %zu: %s  %s\n", i + 1, r.pass ? "PASS" : "FAIL", r.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
