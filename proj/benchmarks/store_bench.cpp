#include <benchmark/benchmark.h>

#include <random>

#include "hydro/ingest.hpp"
#include "hydro/store.hpp"
#include "test_support.hpp"

using namespace hydro;
using namespace hydro::testing;

namespace {

const Instant kNow = Instant::from_seconds(2'000'000'000);

void BM_IngestCsv(benchmark::State& state) {
    auto fixture = make_fixture(bundled_standards(), FixtureSpec{60, 6, 1});
    fixture.resize(static_cast<std::size_t>(state.range(0)));
    const auto csv = serialize_csv(fixture);
    for (auto _ : state) {
        state.PauseTiming();
        TempDir dir;
        Store store(dir.path(), StoreOptions{64ull << 20, state.range(1) != 0});
        state.ResumeTiming();
        auto report = ingest_batch(parse_csv(csv), bundled_standards().registry, store, kNow);
        benchmark::DoNotOptimize(report.accepted);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IngestCsv)->Args({10'000, 0})->Args({10'000, 1})->Unit(benchmark::kMillisecond);

class Loaded {
public:
    Loaded() : store_(dir_.path(), fast_store()) {
        store_.put_batch(make_fixture(bundled_standards(), FixtureSpec{60, 50, 2}));
    }
    Store& store() { return store_; }

private:
    TempDir dir_;
    Store store_;
};

Loaded& loaded() {
    static Loaded l;
    return l;
}

void BM_Latest(benchmark::State& state) {
    auto& store = loaded().store();
    std::mt19937 rng(3);
    for (auto _ : state) {
        char id[16];
        std::snprintf(id, sizeof id, "STN-%03u", static_cast<unsigned>(1 + rng() % 60));
        benchmark::DoNotOptimize(store.latest(id));
    }
}
BENCHMARK(BM_Latest);

void BM_Assessment(benchmark::State& state) {
    auto& store = loaded().store();
    const auto& standards = bundled_standards();
    const auto& drinking = standards.purpose("DRINKING");
    std::mt19937 rng(4);
    for (auto _ : state) {
        char id[16];
        std::snprintf(id, sizeof id, "STN-%03u", static_cast<unsigned>(1 + rng() % 60));
        const auto latest = store.latest(id);
        benchmark::DoNotOptimize(assess(id, latest, drinking, standards.registry, kNow));
    }
}
BENCHMARK(BM_Assessment);

void BM_Downsample(benchmark::State& state) {
    std::mt19937_64 rng(5);
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<Reading> rs(n);
    for (std::size_t i = 0; i < n; ++i)
        rs[i] = {Instant::from_seconds(static_cast<std::int64_t>(i) * 60), static_cast<double>(rng() % 1000), SourceMethod::Sensor};
    const Instant to = Instant::from_seconds(static_cast<std::int64_t>(n) * 60);
    for (auto _ : state) benchmark::DoNotOptimize(downsample(rs, Instant{}, to, 500));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Downsample)->Arg(10'000)->Arg(100'000);

void BM_Reopen(benchmark::State& state) {
    TempDir dir;
    {
        Store store(dir.path(), fast_store());
        store.put_batch(make_fixture(bundled_standards(), FixtureSpec{60, 10, 6}));
    }
    for (auto _ : state) {
        Store store(dir.path(), fast_store());
        benchmark::DoNotOptimize(store.size());
    }
}
BENCHMARK(BM_Reopen)->Unit(benchmark::kMillisecond);

}  // namespace
