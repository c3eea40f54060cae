// OpenMP kernels against their serial references. Run with
// OMP_NUM_THREADS set to compare worker counts.

#include <map>
#include <string>

#include <benchmark/benchmark.h>

#include "complab/completeness.hpp"
#include "complab/config.hpp"
#include "complab/hedging.hpp"
#include "complab/monte_carlo.hpp"
#include "complab/path_engine.hpp"

using namespace complab;

namespace {

struct Scenario {
    AnalysisConfig cfg;
    FactorModel model;
    PricerBundle bundle;
};

const Scenario& scenario(const char* name, bool with_claim)
{
    static std::map<std::string, Scenario> cache;
    auto it = cache.find(name);
    if (it == cache.end()) {
        auto cfg = load_config(std::string(COMPLAB_SOURCE_DIR) + "/configs/" + name);
        auto model = model_from_json(cfg.model);
        auto bundle = build_pricers(model, cfg, with_claim);
        it = cache.emplace(name, Scenario{std::move(cfg), std::move(model), std::move(bundle)})
                 .first;
    }
    return it->second;
}

const FactorModel& sv_model() { return scenario("sv_put_completion.json", true).model; }

void BM_paths(benchmark::State& state)
{
    auto const& m = sv_model();
    auto const n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_paths(m, n, 250, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_paths_reference(benchmark::State& state)
{
    auto const& m = sv_model();
    auto const n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::simulate_paths(m, n, 250, 1));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

McConfig mc_config(benchmark::State& state)
{
    McConfig mc;
    mc.n_samples = static_cast<std::size_t>(state.range(0));
    mc.seed = 5;
    return mc;
}

Asset sv_put() { return resolve_asset(scenario("sv_put_completion.json", true).cfg.assets[1].asset, sv_model()); }

void BM_mc(benchmark::State& state)
{
    auto const mc = mc_config(state);
    auto const a = sv_put();
    for (auto _ : state) {
        benchmark::DoNotOptimize(price_mc(sv_model(), a, 0.0, sv_model().x0(), mc));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_mc_reference(benchmark::State& state)
{
    auto const mc = mc_config(state);
    auto const a = sv_put();
    for (auto _ : state) {
        benchmark::DoNotOptimize(reference::price_mc(sv_model(), a, 0.0, sv_model().x0(), mc));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_occupation(benchmark::State& state)
{
    auto const& s = scenario("two_calls.json", false);
    PathOptions po;
    po.store_increments = false;
    auto const paths
        = simulate_paths(s.model, static_cast<std::size_t>(state.range(0)), 50, 7, po);
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(occupation(s.bundle.assets, paths, 1e-8));
        }
        else {
            benchmark::DoNotOptimize(reference::occupation(s.bundle.assets, paths, 1e-8));
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_replicate(benchmark::State& state)
{
    auto const& s = scenario("gbm_call_hedge.json", true);
    PathOptions po;
    po.store_increments = false;
    auto const paths
        = simulate_paths(s.model, static_cast<std::size_t>(state.range(0)), 200, 3, po);
    HedgeOptions ho = hedge_options(s.cfg);
    ho.rebalance_steps = 100;
    for (auto _ : state) {
        if constexpr (Parallel) {
            benchmark::DoNotOptimize(replicate(s.model, s.bundle.assets, s.bundle.claim, paths, ho));
        }
        else {
            benchmark::DoNotOptimize(
                reference::replicate(s.model, s.bundle.assets, s.bundle.claim, paths, ho));
        }
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_paths)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_paths_reference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mc_reference)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_occupation<true>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_occupation<false>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicate<true>)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_replicate<false>)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
