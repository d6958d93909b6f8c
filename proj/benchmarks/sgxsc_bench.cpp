#include <benchmark/benchmark.h>

#include "sgxsc/auditor.hpp"
#include "sgxsc/ci.hpp"
#include "sgxsc/registry.hpp"
#include "sgxsc/repo.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

namespace {

void BM_closure_histogram_159(benchmark::State& state) {
    auto fixture = testsupport::fixture::make_registry_159();
    for (auto _ : state) {
        auto histogram = sgxsc::registry::closure_histogram(fixture.graph, fixture.roots);
        benchmark::DoNotOptimize(histogram);
    }
}
BENCHMARK(BM_closure_histogram_159);

void BM_three_way_merge(benchmark::State& state) {
    testsupport::Rng rng(1);
    auto base = testsupport::random_tree(rng, 5, 200);
    auto upstream = testsupport::mutate_tree(base, rng);
    auto fork = testsupport::mutate_tree(base, rng);
    for (auto _ : state) {
        auto outcome = sgxsc::repo::three_way_merge(base, upstream, fork);
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_three_way_merge);

void BM_audit_call_graph(benchmark::State& state) {
    testsupport::Rng rng(2);
    auto graph = testsupport::random_call_graph(rng, 50, 150);
    for (auto _ : state) {
        auto warnings = sgxsc::auditor::audit(graph);
        benchmark::DoNotOptimize(warnings);
    }
}
BENCHMARK(BM_audit_call_graph);

void BM_weekly_aggregate(benchmark::State& state) {
    std::vector<sgxsc::ci::Attempt> attempts;
    for (int i = 0; i < 20000; ++i) {
        attempts.push_back({static_cast<std::int64_t>(i) * 1800, i % 5 == 0});
    }
    for (auto _ : state) {
        auto reports = sgxsc::ci::weekly_aggregate(attempts, 0);
        benchmark::DoNotOptimize(reports);
    }
}
BENCHMARK(BM_weekly_aggregate);

} // namespace

BENCHMARK_MAIN();
