// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include "peakcast/backtest.hpp"

using namespace peakcast;

namespace {

struct Fixture {
    SmoothedCurve curve;
    LossConfig loss;
    DailySeries season;
    SeasonHistory history;
    PipelineConfig pipeline;

    Fixture()
    {
        std::vector<DailySeries> past;
        for (int year = 2018; year < 2023; ++year)
            past.push_back(generate_synthetic_season({}, {}, 0.05, static_cast<std::uint64_t>(year), year).series);
        season = generate_synthetic_season({}, {}, 0.05, 99, 2023).series;
        history = build_history(past, pipeline);

        curve = EnsembleSmoother(pipeline.smoothing).smooth(truncate_to(season, parse_date("2023-05-25")));
        loss.fit_start = parse_date("2023-05-01");
        loss.fit_end = parse_date("2023-05-18");
        loss.peak_search_end = parse_date("2023-12-31");
        loss.h0 = 20.0;
        loss.t_m = parse_date("2023-06-10");
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

void BM_Fit(benchmark::State& state)
{
    const Fixture& f = fixture();
    DeConfig de;
    de.max_generations = 60;
    de.tolerance = 0.0;
    de.execution = state.range(0) ? Execution::parallel : Execution::serial;
    for (auto _ : state) benchmark::DoNotOptimize(fit(f.curve, f.loss, de, {}).loss);
}
BENCHMARK(BM_Fit)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

void BM_RunSeason(benchmark::State& state)
{
    const Fixture& f = fixture();
    PipelineConfig cfg = f.pipeline;
    cfg.de.max_generations = 40;
    const Execution exec = state.range(0) ? Execution::parallel : Execution::serial;
    cfg.de.execution = exec;
    for (auto _ : state) {
        const SeasonReport r = run_season(f.season, f.history, cfg, parse_date("2023-05-10"),
                                          parse_date("2023-05-21"), exec);
        benchmark::DoNotOptimize(r.forecasts.size());
    }
}
BENCHMARK(BM_RunSeason)->Arg(0)->Arg(1)->ArgNames({"parallel"})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
