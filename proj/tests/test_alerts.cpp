#include <gtest/gtest.h>

#include <cmath>

#include "peakcast/alerts.hpp"
#include "peakcast/errors.hpp"
#include "test_support.hpp"

using namespace peakcast;
using peakcast::testing::logistic_curve;
using peakcast::testing::logistic_series;

namespace {

const Date kStart = parse_date("2023-01-01");
constexpr double kK = 20.0;
constexpr double kR = 0.15;
constexpr double kM = 160.0;

AlertConfig logistic_config()
{
    AlertConfig cfg;
    cfg.mu = 0.1 * kK;
    cfg.season_start = parse_date("2023-03-01");
    cfg.season_end = parse_date("2023-12-31");
    return cfg;
}

long offset(Date d) { return days_between(kStart, d); }

}  // namespace

TEST(Alerts, LogisticClosedFormsOnExactCurve)
{
    const SmoothedCurve c = logistic_curve(kStart, 365, kK, kR, kM);
    const AlertState s = alert_state(c, logistic_config(), c.last_date());
    ASSERT_TRUE(s.t0 && s.tmin && s.t1);
    EXPECT_NEAR(offset(*s.tmin), kM - std::log(2.0 + std::sqrt(3.0)) / kR, 1.0);
    EXPECT_NEAR(offset(*s.t1), kM, 1.0);
    EXPECT_LE(*s.t0, *s.tmin);
}

TEST(Alerts, LogisticClosedFormsThroughSmoother)
{
    const DailySeries series = logistic_series(kStart, 365, kK, kR, kM);
    const SmoothedCurve c = EnsembleSmoother({}).smooth(series, EdgePolicy::mirror);
    const AlertState s = alert_state(c, logistic_config(), c.last_date());
    ASSERT_TRUE(s.tmin && s.t1);
    // The 15-day moving average flattens the ascent and pulls tmin a
    // couple of days early; the symmetric inflection stays put.
    EXPECT_NEAR(offset(*s.tmin), kM - std::log(2.0 + std::sqrt(3.0)) / kR, 3.0);
    EXPECT_LE(offset(*s.tmin), kM - std::log(2.0 + std::sqrt(3.0)) / kR);
    EXPECT_NEAR(offset(*s.t1), kM, 1.0);
}

TEST(Alerts, ConfirmationLagDelaysAlerts)
{
    const SmoothedCurve c = logistic_curve(kStart, 365, kK, kR, kM);
    const AlertConfig cfg = logistic_config();
    const AlertState full = alert_state(c, cfg, c.last_date());
    ASSERT_TRUE(full.tmin && full.t1);

    const Date before_tmin = add_days(*full.tmin, cfg.confirmation_lag - 1);
    EXPECT_FALSE(alert_state(c, cfg, before_tmin).tmin);
    EXPECT_EQ(alert_state(c, cfg, add_days(*full.tmin, cfg.confirmation_lag)).tmin, full.tmin);

    EXPECT_FALSE(alert_state(c, cfg, add_days(*full.t1, cfg.confirmation_lag - 1)).t1);
    EXPECT_EQ(alert_state(c, cfg, add_days(*full.t1, cfg.confirmation_lag)).t1, full.t1);
}

TEST(Alerts, OnsetRespectsGateAndSeasonWindow)
{
    const SmoothedCurve c = logistic_curve(kStart, 365, kK, kR, kM);
    AlertConfig cfg = logistic_config();
    const auto t0 = detect_onset(c, cfg);
    ASSERT_TRUE(t0);
    EXPECT_GT(c.h[static_cast<std::size_t>(offset(*t0))], cfg.mu);
    EXPECT_LE(c.h[static_cast<std::size_t>(offset(*t0) - 1)], cfg.mu);

    cfg.mu = 2.0 * kK;  // never reached
    EXPECT_FALSE(detect_onset(c, cfg));

    cfg = logistic_config();
    cfg.season_start = parse_date("2023-07-01");  // after the ascent
    EXPECT_FALSE(detect_onset(c, cfg));
}

TEST(Alerts, ConfigValidation)
{
    AlertConfig cfg = logistic_config();
    cfg.mu = -1.0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = logistic_config();
    cfg.season_end = cfg.season_start;
    EXPECT_THROW(cfg.validate(), ConfigError);
    EXPECT_THROW(AlertTracker(logistic_config(), -1), ConfigError);
}

TEST(AlertTracker, FreezesRaisedAlerts)
{
    const SmoothedCurve c = logistic_curve(kStart, 365, kK, kR, kM);
    AlertTracker tracker(logistic_config());
    for (std::size_t k = 0; k < 200; ++k) tracker.observe(c, c.date_at(k));
    const AlertState frozen = tracker.state();
    ASSERT_TRUE(frozen.t1);

    // A later curve that would move the maxima does not change frozen alerts.
    SmoothedCurve shifted = logistic_curve(kStart, 365, kK, kR, kM + 10.0);
    tracker.observe(shifted, shifted.date_at(250));
    EXPECT_EQ(tracker.state().t0, frozen.t0);
    EXPECT_EQ(tracker.state().tmin, frozen.tmin);
    EXPECT_EQ(tracker.state().t1, frozen.t1);

    ASSERT_EQ(tracker.events().size(), 3u);
    EXPECT_EQ(tracker.events()[1].kind, AlertKind::acceleration);
    EXPECT_EQ(tracker.events()[1].confirmed_at, add_days(*frozen.tmin, logistic_config().confirmation_lag));
}

TEST(AlertTracker, EdgeGuardDelaysConfirmation)
{
    const SmoothedCurve c = logistic_curve(kStart, 365, kK, kR, kM);
    AlertTracker plain(logistic_config(), 0);
    AlertTracker guarded(logistic_config(), 7);
    for (std::size_t k = 0; k < 250; ++k) {
        plain.observe(c, c.date_at(k));
        guarded.observe(c, c.date_at(k));
    }
    EXPECT_EQ(plain.state().tmin, guarded.state().tmin);
    EXPECT_EQ(days_between(plain.events()[1].confirmed_at, guarded.events()[1].confirmed_at), 7);
}

TEST(ReplayAlerts, UsesOnlyTheGivenPrefix)
{
    const DailySeries full = logistic_series(kStart, 365, kK, kR, kM);
    const EnsembleSmoother smoother({});
    const Date cut = add_days(kStart, 150);
    const AlertReplay a = replay_alerts(truncate_to(full, cut), smoother, logistic_config(), 7);
    const AlertReplay b = replay_alerts(truncate_to(truncate_to(full, add_days(cut, 40)), cut), smoother,
                                        logistic_config(), 7);
    EXPECT_EQ(a.state, b.state);
    EXPECT_EQ(a.events, b.events);
    EXPECT_EQ(a.state.evaluated_at, cut);
    EXPECT_EQ(a.curve.last_date(), cut);
}

TEST(ReplayAlerts, EmptySeriesThrows)
{
    EXPECT_THROW(replay_alerts(DailySeries{}, EnsembleSmoother({}), logistic_config(), 0), EmptySeriesError);
}

TEST(EdgeGuard, DefaultsFollowEdgePolicy)
{
    SmoothingConfig s;
    EXPECT_EQ(default_edge_guard(s), 7);
    s.edge_policy = EdgePolicy::mirror;
    EXPECT_EQ(default_edge_guard(s), 0);
}
