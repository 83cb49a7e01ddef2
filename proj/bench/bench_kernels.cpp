#include "lof/harness.hpp"
#include "lof/ltl_translate.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>
#include <string>

using namespace lof;

namespace {

// delivery-style map scaled to n x n: subgoals in the corners, a few
// obstacles and wall segments
std::string scaled_map(int n) {
    std::string g;
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            char c = '.';
            if (y == n / 3 && x > n / 4 && x < n / 2) c = '#';
            if (y == 2 * n / 3 && x > n / 2 && x < 3 * n / 4) c = '#';
            if ((x * 7 + y * 13) % 29 == 0) c = 'o';
            g += c;
        }
        g += '\n';
    }
    auto put = [&](int x, int y, char c) { g[static_cast<std::size_t>(y * (n + 1) + x)] = c; };
    put(0, 0, 'a');
    put(n - 1, 0, 'b');
    put(0, n - 1, 'c');
    put(n - 1, n - 1, 'h');
    put(n / 2, n / 2, '@');
    return "events: can=0.5\ncosts: o=-1000 step=-1\n" + g;
}

struct Fixture {
    GridMap map;
    EnvironmentMdp env;
    Fsa fsa;
    std::vector<LogicalOption> options;

    explicit Fixture(int n)
        : map(n == 10 ? load_map_file(data_path("data/maps/delivery.txt")) : load_map(scaled_map(n))),
          env(map, partition_for(map)),
          fsa(compile_task(task_formulas().at("composite"), env.partition())) {
        OptionTrainConfig c;
        c.seed = 1;
        c.episodes = 40 * n * n;
        options = train_all_options(env, c);
    }
};

const Fixture& fixture(int n) {
    static std::map<int, std::unique_ptr<Fixture>> cache;
    auto& f = cache[n];
    if (!f) f = std::make_unique<Fixture>(n);
    return *f;
}

void BM_lvi_parallel(benchmark::State& state) {
    const auto& fx = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        LviSolver solver(fx.fsa, fx.options, fx.env, PlannerConfig{});
        benchmark::DoNotOptimize(solver.solve());
    }
}

void BM_lvi_serial(benchmark::State& state) {
    const auto& fx = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::lvi_serial(fx.fsa, fx.options, fx.env, PlannerConfig{}));
}

void BM_hmdp_parallel(benchmark::State& state) {
    const auto& fx = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hmdp_value_iteration(fx.fsa, fx.env, 0));
}

void BM_hmdp_serial(benchmark::State& state) {
    const auto& fx = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(reference::hmdp_serial(fx.fsa, fx.env, 0));
}

template <bool Parallel>
void BM_rollouts(benchmark::State& state) {
    const auto& fx = fixture(static_cast<int>(state.range(0)));
    const auto plans = plan_per_event(fx.fsa, fx.options, fx.env);
    const auto c = lvi_controller(plans, fx.options);
    const RolloutSpec spec{&fx.env, &fx.fsa, nullptr, 4 * static_cast<int>(fx.env.size())};
    for (auto _ : state) {
        auto t = Parallel ? rollout_batch(spec, c, BatchEvents{}, fx.env.default_start(), 3, 256)
                          : rollout_batch_serial(spec, c, BatchEvents{}, fx.env.default_start(), 3, 256);
        benchmark::DoNotOptimize(t);
    }
}

} // namespace

BENCHMARK(BM_lvi_parallel)->Arg(10)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_lvi_serial)->Arg(10)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hmdp_parallel)->Arg(10)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hmdp_serial)->Arg(10)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rollouts<true>)->Name("BM_rollouts_parallel")->Arg(10)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_rollouts<false>)->Name("BM_rollouts_serial")->Arg(10)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
