#include "peakcast/ensemble.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

// std::nearbyint under the default rounding mode rounds half to even.
long round_half_even(double x) { return static_cast<long>(std::nearbyint(x)); }

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

bool SeasonHistory::contains_year(int year) const
{
    return std::any_of(seasons.begin(), seasons.end(), [year](const SeasonRecord& s) { return s.year == year; });
}

std::vector<int> SeasonHistory::years() const
{
    std::vector<int> out;
    for (const auto& s : seasons) out.push_back(s.year);
    return out;
}

double SeasonHistory::mean_offset() const
{
    if (seasons.empty()) throw HistoryEmptyError("season history is empty");
    double sum = 0.0;
    for (const auto& s : seasons) sum += static_cast<double>(s.offset_days());
    return sum / static_cast<double>(seasons.size());
}

double SeasonHistory::offset_std() const
{
    if (seasons.size() < 2) return 0.0;
    const double mean = mean_offset();
    double ss = 0.0;
    for (const auto& s : seasons) {
        const double d = static_cast<double>(s.offset_days()) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(seasons.size() - 1));
}

double SeasonHistory::mean_peak() const
{
    if (seasons.empty()) throw HistoryEmptyError("season history is empty");
    double sum = 0.0;
    for (const auto& s : seasons) sum += s.h_peak;
    return sum / static_cast<double>(seasons.size());
}

Date SeasonHistory::mean_peak_date(int year) const
{
    if (seasons.empty()) throw HistoryEmptyError("season history is empty");
    double sum = 0.0;
    for (const auto& s : seasons) sum += day_of_year(s.t_peak);
    const long doy = round_half_even(sum / static_cast<double>(seasons.size()));
    return add_days(year_start(year), doy - 1);
}

AlertConfig AlertSettings::resolve(int year, double h0) const
{
    AlertConfig cfg;
    cfg.mu = mu ? *mu : mu_fraction * h0;
    cfg.season_start = season_start.in_year(year);
    cfg.season_end = season_end.in_year(year);
    cfg.confirmation_lag = confirmation_lag;
    cfg.validate();
    return cfg;
}

int PipelineConfig::effective_edge_guard() const
{
    return edge_guard ? *edge_guard : default_edge_guard(smoothing);
}

SeasonHistory build_history(const std::vector<DailySeries>& past_seasons, const PipelineConfig& config)
{
    const EnsembleSmoother smoother(config.smoothing);
    SeasonHistory history;

    struct Candidate {
        const DailySeries* series;
        int year;
        SmoothedCurve curve;
        std::size_t peak_at;
    };
    std::vector<Candidate> usable;
    for (const auto& season : past_seasons) {
        if (season.empty()) continue;
        const int year = year_of(season.start);
        if (season.size() < static_cast<std::size_t>(config.smoothing.max_sg_window())) {
            history.warnings.push_back("season " + std::to_string(year) + " dropped: too short to smooth");
            continue;
        }
        SmoothedCurve curve = smoother.smooth(season, EdgePolicy::mirror);
        const std::size_t peak_at = peak_index(curve);
        usable.push_back({&season, year, std::move(curve), peak_at});
    }
    if (usable.empty()) throw HistoryEmptyError("no usable season in the history");

    double h0 = 0.0;
    for (const auto& c : usable) h0 += c.curve.h[c.peak_at];
    h0 /= static_cast<double>(usable.size());

    for (const auto& c : usable) {
        const AlertConfig cfg = config.alerts.resolve(c.year, h0);
        const std::optional<Date> tmin =
            config.history_alerts == HistoryAlerts::replay
                ? replay_alerts(*c.series, smoother, cfg, config.effective_edge_guard()).state.tmin
                : alert_state(c.curve, cfg, c.curve.last_date()).tmin;
        const Date t_peak = c.curve.date_at(c.peak_at);
        if (!tmin || t_peak < *tmin) {
            history.warnings.push_back("season " + std::to_string(c.year) +
                                       " dropped: no acceleration alert before its peak");
            continue;
        }
        history.seasons.push_back({c.year, t_peak, *tmin, c.curve.h[c.peak_at]});
    }
    if (history.seasons.empty()) throw HistoryEmptyError("no usable season in the history");
    std::sort(history.seasons.begin(), history.seasons.end(),
              [](const SeasonRecord& a, const SeasonRecord& b) { return a.year < b.year; });
    return history;
}

Date mobile_prediction(Date tmin, const SeasonHistory& history)
{
    return add_days(tmin, round_half_even(history.mean_offset()));
}

double weight(Date t, Date tmin, Date t_max, WeightConvention convention)
{
    if (!(tmin < t_max))
        throw ConfigError("historical mean peak " + format_date(t_max) + " must follow the acceleration alert " +
                          format_date(tmin));
    const double progress = std::clamp(static_cast<double>(days_between(tmin, t)) /
                                           static_cast<double>(days_between(tmin, t_max)),
                                       0.0, 1.0);
    return convention == WeightConvention::prose ? 1.0 - progress : progress;
}

Date peak_date_forecast(Date t_m, Date t_sir, double omega_mobile)
{
    const double gap = static_cast<double>(days_between(t_sir, t_m));
    return add_days(t_sir, round_half_even(omega_mobile * gap));
}

std::optional<double> peak_magnitude_forecast(const AlertState& alert, Date t, const CalibrationResult& fit)
{
    if (!alert.t1 || !(*alert.t1 < t)) return std::nullopt;
    return fit.peak.h_sir;
}

ForecastIntervals uncertainty_intervals(Date t_hat, const SeasonHistory& history, const CalibrationResult& fit,
                                        const SmoothedCurve& observed, const AlertState& alert,
                                        std::optional<double> h_hat)
{
    ForecastIntervals out;
    if (history.seasons.size() < 2)
        out.warnings.push_back("degenerate history: a single season gives a zero-width date interval");
    const long half = round_half_even(history.offset_std());
    out.date = {add_days(t_hat, -half), add_days(t_hat, half)};

    if (h_hat && alert.t0) {
        const Date last = std::min(alert.evaluated_at, observed.last_date());
        double sum = 0.0;
        std::size_t n = 0;
        for (Date d = std::max(*alert.t0, fit.fitted_start); d <= last; d = add_days(d, 1)) {
            const auto obs = observed.index_of(d);
            const auto k = static_cast<std::size_t>(days_between(fit.fitted_start, d));
            if (!obs || k >= fit.fitted.size()) continue;
            sum += std::abs(fit.fitted[k] - observed.h[*obs]);
            ++n;
        }
        const double width = n ? sum / static_cast<double>(n) : 0.0;
        out.magnitude = std::make_pair(*h_hat - width, *h_hat + width);
    }
    return out;
}

std::uint64_t day_seed(std::uint64_t base, Date day, double lambda)
{
    const auto day_number = static_cast<std::uint64_t>(day.time_since_epoch().count());
    return splitmix64(splitmix64(base ^ splitmix64(day_number)) ^ std::bit_cast<std::uint64_t>(lambda));
}

DailyForecast run_day(const DailySeries& series, const SeasonHistory& history, const PipelineConfig& config)
{
    if (series.empty()) throw EmptySeriesError("empty series");
    if (history.empty()) throw HistoryEmptyError("season history is empty");

    const Date today = series.last_date();
    const int year = year_of(today);
    const double h0 = history.mean_peak();
    const AlertConfig alert_cfg = config.alerts.resolve(year, h0);
    const EnsembleSmoother smoother(config.smoothing);

    DailyForecast out;
    out.evaluated_at = today;
    out.alert.evaluated_at = today;
    if (series.size() < static_cast<std::size_t>(config.smoothing.max_sg_window())) return out;

    const AlertReplay replay = replay_alerts(series, smoother, alert_cfg, config.effective_edge_guard());
    out.alert = replay.state;
    if (!out.alert.tmin) return out;  // prediction not available yet

    const Date tmin = *out.alert.tmin;
    const Date t_m = mobile_prediction(tmin, history);

    LossConfig loss_cfg;
    loss_cfg.lambda = config.lambda;
    loss_cfg.rho = config.rho;
    loss_cfg.h0 = h0;
    loss_cfg.t_m = t_m;
    loss_cfg.fit_start = *out.alert.t0;
    loss_cfg.fit_end = std::max(loss_cfg.fit_start, add_days(today, -config.effective_edge_guard()));
    loss_cfg.peak_search_end = alert_cfg.season_end;

    DeConfig de = config.de;
    de.seed = day_seed(config.seed, today, config.lambda);
    CalibrationResult fitted = fit(replay.curve, loss_cfg, de, config.constants);

    const Date t_max = history.mean_peak_date(year);
    double omega;
    if (tmin < t_max) {
        omega = weight(today, tmin, t_max, config.convention);
    } else {
        // Already past the historical mean peak: the mechanistic fit carries the forecast.
        omega = config.convention == WeightConvention::prose ? 0.0 : 1.0;
        out.warnings.push_back("acceleration alert on or after the historical mean peak date");
    }

    out.t_m = t_m;
    out.t_sir = fitted.peak.t_sir;
    out.h_sir = fitted.peak.h_sir;
    out.omega_mobile = omega;
    out.t_hat = peak_date_forecast(t_m, fitted.peak.t_sir, omega);
    out.h_hat = peak_magnitude_forecast(out.alert, today, fitted);

    auto intervals = uncertainty_intervals(*out.t_hat, history, fitted, replay.curve, out.alert, out.h_hat);
    out.t_interval = intervals.date;
    out.h_interval = intervals.magnitude;
    for (auto& w : intervals.warnings) out.warnings.push_back(std::move(w));
    out.calibration = std::move(fitted);
    return out;
}

}  // namespace peakcast
