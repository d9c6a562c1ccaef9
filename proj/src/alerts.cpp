#include "peakcast/alerts.hpp"

#include <algorithm>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

// Index of the last usable day: evaluated_at clipped to the curve.
std::optional<std::size_t> last_index(const SmoothedCurve& curve, Date evaluated_at)
{
    if (curve.size() == 0 || evaluated_at < curve.start) return std::nullopt;
    const auto k = static_cast<std::size_t>(days_between(curve.start, evaluated_at));
    return std::min(k, curve.size() - 1);
}

}  // namespace

void AlertConfig::validate() const
{
    if (!(mu >= 0.0)) throw ConfigError("onset threshold mu must be non-negative");
    if (!(season_start < season_end)) throw ConfigError("season window must satisfy start < end");
    if (confirmation_lag < 0) throw ConfigError("confirmation lag must be non-negative");
}

std::string alert_name(AlertKind kind)
{
    switch (kind) {
    case AlertKind::onset: return "t0";
    case AlertKind::acceleration: return "tmin";
    case AlertKind::inflection: return "t1";
    }
    return "?";
}

std::optional<Date> detect_onset(const SmoothedCurve& curve, const AlertConfig& config)
{
    const auto last = last_index(curve, config.season_end);
    if (!last) return std::nullopt;
    const std::size_t first =
        config.season_start < curve.start ? 0 : static_cast<std::size_t>(days_between(curve.start, config.season_start));
    for (std::size_t k = first; k <= *last; ++k)
        if (curve.dh[k] > 0.0 && curve.d2h[k] > 0.0 && curve.h[k] > config.mu) return curve.date_at(k);
    return std::nullopt;
}

std::optional<Date> detect_acceleration(const SmoothedCurve& curve, Date t0, Date evaluated_at, int lag)
{
    const auto last = last_index(curve, evaluated_at);
    const auto start = curve.index_of(t0);
    if (!last || !start || *start > *last) return std::nullopt;

    // Only the ascent that begins at t0 is searched.
    std::size_t best = *start;
    for (std::size_t k = *start; k <= *last && curve.dh[k] > 0.0; ++k)
        if (curve.d2h[k] > curve.d2h[best]) best = k;

    if (!(curve.d2h[best] > 0.0) || !(curve.dh[best] > 0.0)) return std::nullopt;
    if (best + static_cast<std::size_t>(lag) > *last) return std::nullopt;
    return curve.date_at(best);
}

std::optional<Date> detect_inflection(const SmoothedCurve& curve, Date tmin, Date evaluated_at, int lag)
{
    const auto last = last_index(curve, evaluated_at);
    const auto start = curve.index_of(tmin);
    if (!last || !start) return std::nullopt;

    for (std::size_t t = *start + 1; t <= *last; ++t) {
        if (!(curve.d2h[t - 1] > 0.0 && curve.d2h[t] <= 0.0 && curve.dh[t] > 0.0)) continue;
        if (t + static_cast<std::size_t>(lag) > *last) return std::nullopt;  // still pending
        bool held = true;
        for (std::size_t k = t + 1; k <= t + static_cast<std::size_t>(lag); ++k) held = held && curve.d2h[k] <= 0.0;
        if (held) return curve.date_at(t);
    }
    return std::nullopt;
}

AlertState alert_state(const SmoothedCurve& curve, const AlertConfig& config, Date evaluated_at)
{
    AlertState state;
    state.evaluated_at = evaluated_at;
    AlertConfig window = config;
    window.season_end = std::min(config.season_end, evaluated_at);
    state.t0 = detect_onset(curve, window);
    if (state.t0) state.tmin = detect_acceleration(curve, *state.t0, evaluated_at, config.confirmation_lag);
    if (state.tmin) state.t1 = detect_inflection(curve, *state.tmin, evaluated_at, config.confirmation_lag);
    return state;
}

AlertTracker::AlertTracker(AlertConfig config, int edge_guard) : config_(config), edge_guard_(edge_guard)
{
    config_.validate();
    if (edge_guard_ < 0) throw ConfigError("alert edge guard must be non-negative");
}

void AlertTracker::observe(const SmoothedCurve& curve_up_to_day, Date day)
{
    state_.evaluated_at = day;
    const Date settled = add_days(day, -edge_guard_);
    if (settled < curve_up_to_day.start) return;
    if (!state_.t0) {
        AlertConfig window = config_;
        window.season_end = std::min(config_.season_end, settled);
        if (config_.season_start <= window.season_end && (state_.t0 = detect_onset(curve_up_to_day, window)))
            events_.push_back({AlertKind::onset, *state_.t0, day});
    }
    if (state_.t0 && !state_.tmin) {
        if ((state_.tmin = detect_acceleration(curve_up_to_day, *state_.t0, settled, config_.confirmation_lag)))
            events_.push_back({AlertKind::acceleration, *state_.tmin, day});
    }
    if (state_.tmin && !state_.t1) {
        if ((state_.t1 = detect_inflection(curve_up_to_day, *state_.tmin, settled, config_.confirmation_lag)))
            events_.push_back({AlertKind::inflection, *state_.t1, day});
    }
}

int default_edge_guard(const SmoothingConfig& smoothing)
{
    return smoothing.edge_policy == EdgePolicy::truncate_window ? smoothing.ma_window / 2 : 0;
}

AlertReplay replay_alerts(const DailySeries& series, const EnsembleSmoother& smoother, const AlertConfig& config,
                          int edge_guard)
{
    if (series.empty()) throw EmptySeriesError("cannot replay alerts on an empty series");
    AlertTracker tracker(config, edge_guard);
    const auto min_len = static_cast<std::size_t>(smoother.config().max_sg_window());

    std::size_t first = min_len - 1;
    if (series.start < config.season_start)
        first = std::max(first, static_cast<std::size_t>(days_between(series.start, config.season_start)));

    DailySeries prefix{series.facility, series.start, {}};
    prefix.counts.reserve(series.size());
    for (std::size_t k = first; k + 1 < series.size(); ++k) {
        if (tracker.state().t1) break;  // everything frozen
        prefix.counts.assign(series.counts.begin(), series.counts.begin() + static_cast<long>(k) + 1);
        tracker.observe(smoother.smooth(prefix), series.date_at(k));
    }

    AlertReplay out;
    if (series.size() >= min_len) {
        out.curve = smoother.smooth(series);
        tracker.observe(out.curve, series.last_date());
    }
    out.state = tracker.state();
    out.state.evaluated_at = series.last_date();
    out.events = tracker.events();
    return out;
}

}  // namespace peakcast
