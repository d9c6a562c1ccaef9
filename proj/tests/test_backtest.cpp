#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "peakcast/errors.hpp"
#include "peakcast/report_io.hpp"
#include "test_support.hpp"

using namespace peakcast;

namespace {

DailyForecast dated(const char* day, std::optional<long> peak_offset, const SeasonTruth& truth,
                    std::optional<double> h = std::nullopt)
{
    DailyForecast f;
    f.evaluated_at = parse_date(day);
    if (peak_offset) {
        f.t_hat = add_days(truth.peak_date, *peak_offset);
        f.t_interval = std::make_pair(add_days(*f.t_hat, -2), add_days(*f.t_hat, 2));
    }
    f.h_hat = h;
    if (h) f.h_interval = std::make_pair(*h - 1.0, *h + 1.0);
    return f;
}

// One forecast per day over [from, to] with t_hat = peak + offset.
std::vector<DailyForecast> constant_stream(Date from, Date to, long offset, const SeasonTruth& truth)
{
    std::vector<DailyForecast> out;
    for (Date d = from; d <= to; d = add_days(d, 1)) out.push_back(dated(format_date(d).c_str(), offset, truth));
    return out;
}

SeasonTruth truth_at(const char* day, double magnitude = 20.0) { return {parse_date(day), magnitude}; }

}  // namespace

TEST(StabilizationMetrics, ConstantStreamMatchesHlcm2023)
{
    // Observed peak June 8; a steady forecast six days early from May 2 on.
    const SeasonTruth truth = truth_at("2023-06-08");
    std::vector<DailyForecast> stream;
    stream.push_back(dated("2023-04-30", std::nullopt, truth));
    stream.push_back(dated("2023-05-01", std::nullopt, truth));
    for (auto& f : constant_stream(parse_date("2023-05-02"), parse_date("2023-06-07"), -6, truth)) stream.push_back(f);
    // Post-peak forecasts do not count.
    stream.push_back(dated("2023-06-09", 30, truth));

    const SeasonMetrics m = stabilization_and_metrics(stream, truth);
    EXPECT_EQ(m.stabilization_day, parse_date("2023-05-02"));
    EXPECT_EQ(m.anticipation_days, 37);
    EXPECT_EQ(m.date_error_days, 6);
    EXPECT_FALSE(m.magnitude_error);
}

TEST(StabilizationMetrics, SingleForecast)
{
    const SeasonTruth truth = truth_at("2023-06-08", 20.0);
    const std::vector<DailyForecast> stream{dated("2023-06-01", 2, truth, 18.0)};
    const SeasonMetrics m = stabilization_and_metrics(stream, truth);
    EXPECT_EQ(m.stabilization_day, parse_date("2023-06-01"));
    EXPECT_EQ(m.anticipation_days, 7);
    EXPECT_EQ(m.date_error_days, 2);
    EXPECT_EQ(m.magnitude_error, 2.0);
}

TEST(StabilizationMetrics, OscillatingThenSettling)
{
    const SeasonTruth truth = truth_at("2023-06-08", 20.0);
    const std::vector<DailyForecast> stream{
        dated("2023-05-20", 10, truth),       dated("2023-05-21", -8, truth),
        dated("2023-05-22", 6, truth),        dated("2023-05-23", -5, truth),
        dated("2023-05-24", 2, truth),        dated("2023-05-25", 1, truth, 25.0),
        dated("2023-05-26", 3, truth, 22.0),  dated("2023-05-27", 2, truth, 21.0),
    };
    const SeasonMetrics m = stabilization_and_metrics(stream, truth);
    EXPECT_EQ(m.stabilization_day, parse_date("2023-05-24"));
    EXPECT_EQ(m.anticipation_days, 15);
    EXPECT_EQ(m.date_error_days, 2);
    EXPECT_EQ(m.magnitude_error, 1.0);

    // Unordered input gives the same answer.
    std::vector<DailyForecast> shuffled(stream.rbegin(), stream.rend());
    EXPECT_EQ(stabilization_and_metrics(shuffled, truth).stabilization_day, m.stabilization_day);
}

TEST(StabilizationMetrics, NoForecastMeansUnavailable)
{
    const SeasonTruth truth = truth_at("2023-06-08");
    const std::vector<DailyForecast> stream{dated("2023-05-01", std::nullopt, truth),
                                            dated("2023-06-10", -1, truth)};
    const SeasonMetrics m = stabilization_and_metrics(stream, truth);
    EXPECT_FALSE(m.stabilization_day);
    EXPECT_FALSE(m.anticipation_days);
    EXPECT_FALSE(m.date_error_days);
    EXPECT_FALSE(m.magnitude_error);
}

TEST(ReportCsv, MeanAndSampleStdOverSeasons)
{
    // HLCM anticipation and errors over six seasons.
    const std::vector<long> antic{39, 31, 47, 26, 37, 26};
    const std::vector<long> derr{7, 13, 30, 6, 6, 2};
    const std::vector<double> merr{7.53, 8.87, 11.10, 2.72, 14.46, 1.13};
    std::vector<SeasonReport> reports(6);
    for (std::size_t k = 0; k < 6; ++k) {
        reports[k].facility = "hlcm";
        reports[k].year = 2017 + static_cast<int>(k);
        reports[k].truth = truth_at("2023-06-08");
        reports[k].metrics.anticipation_days = antic[k];
        reports[k].metrics.date_error_days = derr[k];
        reports[k].metrics.magnitude_error = merr[k];
    }
    std::ostringstream out;
    write_report_csv(out, reports);

    auto row = [&](const std::string& label) {
        std::istringstream in(out.str());
        std::string line;
        while (std::getline(in, line))
            if (line.rfind(label + ",", 0) == 0) {
                std::vector<std::string> cells;
                std::stringstream ss(line);
                std::string c;
                while (std::getline(ss, c, ',')) cells.push_back(c);
                return cells;
            }
        return std::vector<std::string>{};
    };
    const auto mean = row("mean");
    const auto std = row("std");
    ASSERT_EQ(mean.size(), 9u);
    EXPECT_NEAR(std::stod(mean[5]), 34.3333, 5e-5);
    EXPECT_NEAR(std::stod(mean[6]), 10.6667, 5e-5);
    EXPECT_NEAR(std::stod(mean[7]), 7.6350, 5e-5);
    EXPECT_NEAR(std::stod(std[5]), 8.2381, 5e-5);
    EXPECT_NEAR(std::stod(std[6]), 10.1127, 5e-5);
    EXPECT_NEAR(std::stod(std[7]), 5.0318, 5e-5);
    EXPECT_EQ(mean[8], "6");
}

TEST(ClassifyHit, GreenYellowRed)
{
    EXPECT_EQ(classify_hit(15.0, 10.0, 20.0), HitClass::green);
    EXPECT_EQ(classify_hit(10.0, 10.0, 20.0), HitClass::green);
    EXPECT_EQ(classify_hit(22.0, 10.0, 20.0), HitClass::yellow);
    EXPECT_EQ(classify_hit(7.5, 10.0, 20.0), HitClass::yellow);
    EXPECT_EQ(classify_hit(23.0, 10.0, 20.0), HitClass::red);
    EXPECT_EQ(hit_label(HitClass::not_fired), "alert-not-fired");
}

TEST(AnticipationTable, SnapshotsAtFixedLeadTimes)
{
    const SeasonTruth truth = truth_at("2023-06-08", 20.0);
    SeasonReport report;
    report.facility = "x";
    report.year = 2023;
    report.truth = truth;
    // Monitoring from May 12: the 30-day snapshot (May 9) was not monitored.
    for (Date d = parse_date("2023-05-12"); d < truth.peak_date; d = add_days(d, 1)) {
        const bool alerted = d >= parse_date("2023-05-20");
        const bool magnitude = d >= parse_date("2023-05-30");
        report.forecasts.push_back(dated(format_date(d).c_str(), alerted ? std::optional<long>(-1) : std::nullopt, truth,
                                         magnitude ? std::optional<double>(30.0) : std::nullopt));
    }
    const auto rows = anticipation_table(std::span(&report, 1));
    ASSERT_EQ(rows.size(), 1u);
    const auto& s = rows[0].snapshots;
    EXPECT_EQ(s[0].date_class, HitClass::not_monitored);
    EXPECT_EQ(s[1].day, parse_date("2023-05-25"));
    EXPECT_EQ(s[1].date_class, HitClass::green);
    EXPECT_EQ(s[1].magnitude_class, HitClass::withheld);
    EXPECT_EQ(s[2].date_class, HitClass::green);
    EXPECT_EQ(s[2].magnitude_class, HitClass::red);
}

TEST(MagnitudeOutliers, CountsJumpsAboveHalf)
{
    const SeasonTruth truth = truth_at("2023-06-08");
    std::vector<DailyForecast> stream;
    int day = 1;
    for (double h : {10.0, 16.0, 17.0, 5.0, 5.5}) {
        const std::string d = "2023-05-0" + std::to_string(day++);
        stream.push_back(dated(d.c_str(), 0, truth, h));
    }
    EXPECT_EQ(count_magnitude_outliers(stream), 2);
}

TEST(GridSearch, ValidatesGrid)
{
    const auto corpus = peakcast::testing::synthetic_corpus(3, 2018, 2);
    const PipelineConfig cfg;
    const SeasonHistory history = build_history({corpus[0].series}, cfg);
    const std::vector<double> empty, bad{0.5, 1.5};
    const Date a = parse_date("2019-05-01"), b = parse_date("2019-05-02");
    EXPECT_THROW(grid_search_lambda(corpus[1].series, history, empty, 0.9, cfg, a, b), ConfigError);
    EXPECT_THROW(grid_search_lambda(corpus[1].series, history, bad, 0.9, cfg, a, b), ConfigError);
}

TEST(RunSeason, RejectsHistoryContainingTheSeason)
{
    const auto corpus = peakcast::testing::synthetic_corpus(3, 2018, 2);
    const PipelineConfig cfg;
    const SeasonHistory history = build_history({corpus[0].series, corpus[1].series}, cfg);
    EXPECT_THROW(run_season(corpus[1].series, history, cfg, parse_date("2019-05-01"), parse_date("2019-05-02")),
                 ConfigError);
}

TEST(RunSeason, SinglePointGridEqualsBacktest)
{
    const auto corpus = peakcast::testing::synthetic_corpus(3, 2018, 3);
    PipelineConfig cfg = peakcast::testing::quick_pipeline();
    const SeasonHistory history = build_history(peakcast::testing::seasons_except(corpus, 2), cfg);
    const Date from = parse_date("2020-05-20"), to = parse_date("2020-05-24");
    const SeasonReport direct = run_season(corpus[2].series, history, cfg, from, to, Execution::serial);
    const std::vector<double> grid{cfg.lambda};
    const auto runs = grid_search_lambda(corpus[2].series, history, grid, cfg.rho, cfg, from, to, Execution::serial);
    ASSERT_EQ(runs.size(), 1u);
    ASSERT_EQ(runs[0].report.forecasts.size(), direct.forecasts.size());
    for (std::size_t k = 0; k < direct.forecasts.size(); ++k)
        EXPECT_EQ(forecast_to_json(runs[0].report.forecasts[k]), forecast_to_json(direct.forecasts[k]));
}

TEST(SyntheticSeason, SeededAndWinterPeaked)
{
    const SirParams theta;
    const auto a = generate_synthetic_season(theta, {}, 0.05, 11, 2023);
    const auto b = generate_synthetic_season(theta, {}, 0.05, 11, 2023);
    const auto c = generate_synthetic_season(theta, {}, 0.05, 12, 2023);
    EXPECT_EQ(a.series.counts, b.series.counts);
    EXPECT_NE(a.series.counts, c.series.counts);
    EXPECT_EQ(a.series.size(), 365u);
    EXPECT_EQ(a.series.start, parse_date("2023-01-01"));
    EXPECT_GE(a.truth.peak_date, parse_date("2023-05-01"));
    EXPECT_LE(a.truth.peak_date, parse_date("2023-09-30"));
    for (double v : a.series.counts) {
        EXPECT_GE(v, 0.0);
        EXPECT_EQ(v, std::nearbyint(v));
    }

    const auto clean = generate_synthetic_season(theta, {}, 0.0, 11, 2023);
    const Trajectory t = integrate(theta, {}, parse_date("2023-01-01"), parse_date("2023-12-31"));
    EXPECT_EQ(clean.truth.peak_magnitude, peak(t, t.start, t.last_date()).h_sir);
    EXPECT_THROW(generate_synthetic_season(theta, {}, -0.1, 1, 2023), ConfigError);
}

TEST(TruePeak, MaximumOfMirrorSmoothedSeason)
{
    const auto s = generate_synthetic_season({}, {}, 0.0, 1, 2023);
    const SeasonTruth t = true_peak(s.series, {});
    EXPECT_LE(std::abs(days_between(s.truth.peak_date, t.peak_date)), 3);
    EXPECT_NEAR(t.peak_magnitude, s.truth.peak_magnitude, 0.05 * s.truth.peak_magnitude);
    EXPECT_THROW(true_peak(DailySeries{}, {}), EmptySeriesError);
}
