#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "peakcast/calibrate.hpp"
#include "peakcast/errors.hpp"

using namespace peakcast;

namespace {

double sphere(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

double rastrigin(std::span<const double> x)
{
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return s;
}

DeConfig seeded(std::uint64_t seed = 42)
{
    DeConfig de;
    de.seed = seed;
    de.tolerance = 0.0;
    return de;
}

const Date kOrigin = parse_date("2023-01-01");

SmoothedCurve curve_from(const std::vector<double>& h, Date start)
{
    SmoothedCurve c;
    c.start = start;
    c.h = h;
    c.dh.assign(h.size(), 0.0);
    c.d2h.assign(h.size(), 0.0);
    return c;
}

// Observed curve equal to the model output of `theta` from January 1.
SmoothedCurve generator_curve(const SirParams& theta, Date last)
{
    return curve_from(integrate(theta, {}, kOrigin, last).h_sir, kOrigin);
}

LossConfig window(double lambda, double rho, const char* from, const char* to, const char* search_end)
{
    LossConfig cfg;
    cfg.lambda = lambda;
    cfg.rho = rho;
    cfg.fit_start = parse_date(from);
    cfg.fit_end = parse_date(to);
    cfg.peak_search_end = parse_date(search_end);
    return cfg;
}

}  // namespace

TEST(DifferentialEvolution, SphereAndRastrigin)
{
    const std::vector<double> lo(6, -5.12), hi(6, 5.12);
    const DeResult s = differential_evolution(sphere, lo, hi, seeded());
    EXPECT_LE(s.best_value, 1e-6);
    EXPECT_LE(s.generations, 300);

    const DeResult r = differential_evolution(rastrigin, lo, hi, seeded());
    EXPECT_LT(r.best_value, 1.0);
}

TEST(DifferentialEvolution, SameSeedSameResult)
{
    const std::vector<double> lo(6, -5.12), hi(6, 5.12);
    const DeResult a = differential_evolution(rastrigin, lo, hi, seeded(9));
    const DeResult b = differential_evolution(rastrigin, lo, hi, seeded(9));
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_history, b.best_history);
    const DeResult c = differential_evolution(rastrigin, lo, hi, seeded(10));
    EXPECT_NE(a.best, c.best);
}

TEST(DifferentialEvolution, NeverLeavesTheBox)
{
    const std::vector<double> lo{-1.0, 0.0, 2.0}, hi{1.0, 0.5, 2.0};
    std::size_t violations = 0, calls = 0;
    // Minimum lies outside the box, pushing mutants against the bounds.
    const Objective probe = [&](std::span<const double> x) {
        ++calls;
        for (std::size_t j = 0; j < x.size(); ++j)
            if (x[j] < lo[j] || x[j] > hi[j]) ++violations;
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] + 2.0) * (x[1] + 2.0);
    };
    DeConfig de = seeded();
    de.execution = Execution::serial;
    const DeResult r = differential_evolution(probe, lo, hi, de);
    EXPECT_GT(calls, 1000u);
    EXPECT_EQ(violations, 0u);
    EXPECT_DOUBLE_EQ(r.best[0], 1.0);
    EXPECT_DOUBLE_EQ(r.best[1], 0.0);
}

TEST(DifferentialEvolution, HistoryIsMonotone)
{
    const std::vector<double> lo(4, -5.12), hi(4, 5.12);
    const DeResult r = differential_evolution(rastrigin, lo, hi, seeded());
    ASSERT_EQ(r.best_history.size(), static_cast<std::size_t>(r.generations) + 1);
    for (std::size_t k = 1; k < r.best_history.size(); ++k) EXPECT_LE(r.best_history[k], r.best_history[k - 1]);
}

TEST(DifferentialEvolution, RejectsBadConfig)
{
    const std::vector<double> lo(2, 0.0), hi(2, 1.0);
    DeConfig de;
    de.population_size = 3;
    EXPECT_THROW(differential_evolution(sphere, lo, hi, de), ConfigError);
    de = {};
    de.crossover_prob = 0.0;
    EXPECT_THROW(differential_evolution(sphere, lo, hi, de), ConfigError);
    const std::vector<double> bad_hi{1.0, -1.0};
    EXPECT_THROW(differential_evolution(sphere, lo, bad_hi, {}), ConfigError);
}

TEST(Loss, PureMseWhenLambdaOneRhoZero)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 1.0);
    SirParams truth;
    SmoothedCurve obs = generator_curve(truth, parse_date("2023-07-31"));
    for (auto& v : obs.h) v += noise(rng);

    SirParams theta;
    theta.b0 = 65.0;
    theta.phi = 3.7;
    LossConfig cfg = window(1.0, 0.0, "2023-04-15", "2023-06-01", "2023-07-31");
    cfg.h0 = 123.0;
    cfg.t_m = parse_date("2023-01-05");

    const Trajectory sim = integrate(theta, {}, kOrigin, parse_date("2023-07-31"));
    double sse = 0.0;
    int n = 0;
    for (Date d = cfg.fit_start; d <= cfg.fit_end; d = add_days(d, 1), ++n) {
        const auto k = static_cast<std::size_t>(days_between(kOrigin, d));
        sse += (obs.h[k] - sim.h_sir[k]) * (obs.h[k] - sim.h_sir[k]);
    }
    EXPECT_LE(std::abs(loss(theta, obs, cfg, {}) - sse / n), 1e-12);
}

TEST(Loss, SquaredDateGapWhenLambdaZero)
{
    SirParams theta;
    const SmoothedCurve obs = generator_curve(SirParams{}, parse_date("2023-09-30"));
    LossConfig cfg = window(0.0, 0.9, "2023-04-01", "2023-05-01", "2023-09-30");
    cfg.t_m = parse_date("2023-07-04");
    const Trajectory sim = integrate(theta, {}, kOrigin, parse_date("2023-09-30"));
    const PeakEstimate p = peak(sim, cfg.fit_start, cfg.peak_search_end);
    const double gap = static_cast<double>(days_between(cfg.t_m, p.t_sir));
    EXPECT_EQ(loss(theta, obs, cfg, {}), gap * gap);
}

TEST(Loss, SelfFitOnGeneratorDataIsZero)
{
    SirParams theta;
    const Date last = parse_date("2023-09-30");
    const SmoothedCurve obs = generator_curve(theta, last);
    LossConfig cfg = window(0.998, 0.9, "2023-04-01", "2023-06-10", "2023-09-30");
    const PeakEstimate p = peak(integrate(theta, {}, kOrigin, last), cfg.fit_start, last);
    cfg.h0 = p.h_sir;
    cfg.t_m = p.t_sir;
    EXPECT_LE(loss(theta, obs, cfg, {}), 1e-10);
}

TEST(Loss, HandComputedThreeDayWindow)
{
    SirParams theta;
    const Trajectory sim = integrate(theta, {}, kOrigin, parse_date("2023-03-03"));
    const std::size_t k = static_cast<std::size_t>(days_between(kOrigin, parse_date("2023-03-01")));
    const double s0 = sim.h_sir[k], s1 = sim.h_sir[k + 1], s2 = sim.h_sir[k + 2];

    // Observed values offset by +1, -2, +3 from the model.
    const SmoothedCurve obs = curve_from({s0 + 1.0, s1 - 2.0, s2 + 3.0}, parse_date("2023-03-01"));
    LossConfig cfg = window(0.25, 2.0, "2023-03-01", "2023-03-03", "2023-03-03");
    cfg.h0 = std::max({s0, s1, s2}) - 0.5;
    cfg.t_m = parse_date("2023-02-27");

    // The model is rising, so the peak of the window is its last day.
    ASSERT_GT(s2, s1);
    const double mse = (1.0 + 4.0 + 9.0) / 3.0;
    const double expected = 0.25 * (mse + 2.0 * 0.25) + 0.75 * 16.0;
    EXPECT_NEAR(loss(theta, obs, cfg, {}), expected, 1e-12);
}

TEST(Loss, ValidatesWindowAndOrigin)
{
    const SmoothedCurve obs = generator_curve(SirParams{}, parse_date("2023-06-30"));
    LossConfig cfg = window(1.2, 0.0, "2023-04-01", "2023-05-01", "2023-06-30");
    EXPECT_THROW(loss({}, obs, cfg, {}), ConfigError);
    cfg = window(0.9, 0.0, "2023-05-01", "2023-04-01", "2023-06-30");
    EXPECT_THROW(loss({}, obs, cfg, {}), ConfigError);
    cfg = window(0.9, 0.0, "2023-04-01", "2023-05-01", "2023-06-30");
    cfg.origin = parse_date("2023-04-02");
    EXPECT_THROW(loss({}, obs, cfg, {}), ConfigError);
    cfg = window(0.9, 0.0, "2023-04-01", "2023-07-15", "2023-07-15");
    EXPECT_THROW(loss({}, obs, cfg, {}), ConfigError);  // curve too short
}

TEST(Fit, RecoversNoiselessCurveDeterministically)
{
    SirParams theta;
    const Date last = parse_date("2023-12-31");
    const SmoothedCurve obs = generator_curve(theta, last);
    const PeakEstimate truth = peak(integrate(theta, {}, kOrigin, last), kOrigin, last);

    LossConfig cfg = window(0.998, 0.9, "2023-04-01", "2023-04-02", "2023-12-31");
    cfg.fit_end = add_days(truth.t_sir, -7);
    cfg.h0 = truth.h_sir;
    cfg.t_m = truth.t_sir;

    DeConfig de;
    de.seed = 5;
    const CalibrationResult a = fit(obs, cfg, de, {});
    const CalibrationResult b = fit(obs, cfg, de, {});
    EXPECT_EQ(a.theta.to_array(), b.theta.to_array());
    EXPECT_EQ(a.loss, b.loss);
    EXPECT_TRUE(a.theta.admissible());
    EXPECT_LE(a.loss, 0.5);
    EXPECT_LE(std::abs(days_between(truth.t_sir, a.peak.t_sir)), 3);
    EXPECT_NEAR(a.peak.h_sir, truth.h_sir, 0.05 * truth.h_sir);
    EXPECT_EQ(a.fitted_start, kOrigin);
    EXPECT_EQ(a.seed, 5u);
}
