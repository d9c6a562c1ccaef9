#include <gtest/gtest.h>

#include <omp.h>

#include <atomic>
#include <stdexcept>

#include "peakcast/report_io.hpp"
#include "test_support.hpp"

using namespace peakcast;

namespace {

class ParallelTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        saved_ = omp_get_max_threads();
        omp_set_num_threads(4);
    }
    void TearDown() override { omp_set_num_threads(saved_); }

private:
    int saved_ = 1;
};

}  // namespace

TEST_F(ParallelTest, ForEachIndexVisitsEveryIndexOnce)
{
    std::vector<std::atomic<int>> hits(1000);
    for_each_index(hits.size(), Execution::parallel, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST_F(ParallelTest, ForEachIndexRethrows)
{
    EXPECT_THROW(for_each_index(100, Execution::parallel,
                                [](std::size_t i) {
                                    if (i == 57) throw std::runtime_error("boom");
                                }),
                 std::runtime_error);
}

TEST_F(ParallelTest, CalibrationMatchesSerialBitForBit)
{
    const auto season = generate_synthetic_season({}, {}, 0.05, 3, 2023);
    const SmoothedCurve curve = EnsembleSmoother({}).smooth(truncate_to(season.series, parse_date("2023-05-25")));
    LossConfig cfg;
    cfg.fit_start = parse_date("2023-05-01");
    cfg.fit_end = parse_date("2023-05-18");
    cfg.peak_search_end = parse_date("2023-12-31");
    cfg.h0 = 20.0;
    cfg.t_m = parse_date("2023-06-10");

    DeConfig de;
    de.max_generations = 60;
    de.execution = Execution::serial;
    const CalibrationResult serial = fit(curve, cfg, de, {});
    de.execution = Execution::parallel;
    const CalibrationResult parallel = fit(curve, cfg, de, {});
    EXPECT_EQ(serial.theta.to_array(), parallel.theta.to_array());
    EXPECT_EQ(serial.loss, parallel.loss);
    EXPECT_EQ(serial.fitted, parallel.fitted);
}

TEST_F(ParallelTest, BacktestMatchesSerialBitForBit)
{
    const auto corpus = peakcast::testing::synthetic_corpus(21, 2018, 3);
    PipelineConfig cfg = peakcast::testing::quick_pipeline();
    const SeasonHistory history = build_history(peakcast::testing::seasons_except(corpus, 2), cfg);
    const Date from = parse_date("2020-05-15"), to = parse_date("2020-05-26");

    cfg.de.execution = Execution::serial;
    const SeasonReport serial = run_season(corpus[2].series, history, cfg, from, to, Execution::serial);
    cfg.de.execution = Execution::parallel;
    const SeasonReport parallel = run_season(corpus[2].series, history, cfg, from, to, Execution::parallel);

    ASSERT_EQ(serial.forecasts.size(), parallel.forecasts.size());
    for (std::size_t k = 0; k < serial.forecasts.size(); ++k)
        EXPECT_EQ(forecast_to_json(serial.forecasts[k]), forecast_to_json(parallel.forecasts[k]));
}
