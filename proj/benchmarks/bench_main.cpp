#include <benchmark/benchmark.h>

#include "poq/adversary.hpp"
#include "poq/clawgen.hpp"
#include "poq/f2.hpp"
#include "poq/poq1.hpp"
#include "poq/poq2.hpp"

namespace {

poq::clawgen::StreamParams sp(std::size_t lambda, std::size_t k) {
  poq::clawgen::StreamParams p;
  p.lambda = lambda;
  p.k = k;
  return p;
}

void BM_Rank(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  poq::Rng rng(1, 0);
  std::vector<poq::f2::BitVec> rows;
  for (std::size_t i = 0; i < 2 * n; ++i) rows.push_back(poq::f2::sample_uniform(n, rng));
  const poq::f2::BitMat m(rows);
  for (auto _ : state) benchmark::DoNotOptimize(poq::f2::rank(m));
}
BENCHMARK(BM_Rank)->Arg(16)->Arg(64)->Arg(256)->Arg(1024);

void BM_Poq1Honest(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(poq::poq1::run_honest(n, 2, trial++).accept);
}
BENCHMARK(BM_Poq1Honest)->Arg(16)->Arg(64)->Arg(256);

void BM_ClawgenAccelerated(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        poq::clawgen::run_clawgen(sp(8, k), 3, trial++, poq::clawgen::Mode::kAccelerated).correct());
  }
}
BENCHMARK(BM_ClawgenAccelerated)->Arg(16)->Arg(64)->Arg(256);

void BM_ClawgenRejection(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        poq::clawgen::run_clawgen(sp(1, k), 4, trial++, poq::clawgen::Mode::kRejection).correct());
  }
}
BENCHMARK(BM_ClawgenRejection)->Arg(8)->Arg(16)->Arg(32);

void BM_Poq2Honest(benchmark::State& state) {
  std::uint64_t trial = 0;
  for (auto _ : state) benchmark::DoNotOptimize(poq::poq2::run_honest(sp(8, 64), 5, trial++).accept);
}
BENCHMARK(BM_Poq2Honest);

void BM_GlExtract(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  poq::Rng rng(6, 0);
  const auto x = poq::f2::sample_uniform(n, rng);
  const poq::adversary::Oracle f = [&](const poq::f2::BitVec& r) { return poq::f2::dot(r, x); };
  for (auto _ : state) benchmark::DoNotOptimize(poq::adversary::gl_extract(n, 0.5, f, rng).x);
}
BENCHMARK(BM_GlExtract)->Arg(8)->Arg(16)->Arg(32);

}  // namespace

BENCHMARK_MAIN();
