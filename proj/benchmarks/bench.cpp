#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "cppso/fixtures.hpp"
#include "cppso/inference.hpp"
#include "cppso/rng.hpp"
#include "cppso/sampler.hpp"
#include "cppso/semantics.hpp"
#include "cppso/source.hpp"

using namespace cppso;

namespace {

struct WarmChain {
  ChainState chain;

  WarmChain() {
    ModelStructure m = learning_model();
    PriorSpec spec = standard_prior(m, 0.1);
    spec = apply_special_init(spec, m,
                              CmCellInit{m.by_name("s12a"), m.by_name("c1"),
                                         m.by_name("id"), 100.0});
    std::vector<std::string> data;
    for (int i = 0; i < 24; ++i) {
      char a = static_cast<char>('0' + (i * 7 + 1) % 10);
      char b = static_cast<char>('0' + (i * 3 + 2) % 10);
      data.push_back(std::string{a, b, a});
    }
    PGConfig pg;
    pg.particles = 400;
    pg.max_restarts = 30;
    chain = init_chain(m, spec, pg, std::move(data), 17);
    for (int e = 0; e < 5; ++e) gibbs_sweep(chain);
  }
};

WarmChain& warm() {
  static WarmChain w;
  return w;
}

}  // namespace

static void FixedPointSemantics(benchmark::State& state) {
  Fixture f = fig1_fixture();
  for (auto _ : state) {
    SemanticsTable t = evaluate_semantics(f.model, f.weights);
    benchmark::DoNotOptimize(t.max_residual);
  }
}
BENCHMARK(FixedPointSemantics);

static void AncestralDraw(benchmark::State& state) {
  ChainState& c = warm().chain;
  SourceRef src{CollapsedRef{&c.counts, &c.prior, true}};
  std::uint64_t i = 0;
  for (auto _ : state) {
    RngStream rng = KeyChain(31).with(i++).stream();
    ExecOutcome o = generate(src, c.model, Budget{}, rng);
    benchmark::DoNotOptimize(o.status);
  }
}
BENCHMARK(AncestralDraw);

static void BootstrapFilter(benchmark::State& state) {
  ChainState& c = warm().chain;
  PGConfig pg = c.pg;
  pg.particles = static_cast<int>(state.range(0));
  FilterScratch scratch;
  std::uint64_t i = 0;
  for (auto _ : state) {
    try {
      FilterResult r = particle_filter(c.data[1].x, c.model, c.counts, c.prior,
                                       pg, KeyChain(47).with(i++), nullptr,
                                       &scratch);
      benchmark::DoNotOptimize(r.log_z);
    } catch (const std::runtime_error&) {
      // an exhausted retry allowance is still a full filter's worth of work
    }
  }
}
BENCHMARK(BootstrapFilter)->Arg(100)->Arg(400);

static void ConditionalFilter(benchmark::State& state) {
  ChainState& c = warm().chain;
  PGConfig pg = c.pg;
  pg.particles = static_cast<int>(state.range(0));
  FilterScratch scratch;
  std::uint64_t i = 0;
  for (auto _ : state) {
    FilterResult r =
        particle_filter(c.data[0].x, c.model, c.counts, c.prior, pg,
                        KeyChain(53).with(i++), &c.data[0].tree, &scratch);
    benchmark::DoNotOptimize(r.log_z);
  }
}
BENCHMARK(ConditionalFilter)->Arg(100)->Arg(400);

static void GibbsSweepEpoch(benchmark::State& state) {
  ChainState& c = warm().chain;
  for (auto _ : state) {
    EpochMetrics m = gibbs_sweep(c);
    benchmark::DoNotOptimize(m.raw_nll);
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(c.data.size()));
}
BENCHMARK(GibbsSweepEpoch);

BENCHMARK_MAIN();
