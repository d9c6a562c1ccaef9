#pragma once

#include <optional>
#include <string>
#include <vector>

#include "peakcast/date.hpp"
#include "peakcast/timeseries.hpp"

namespace peakcast {

inline constexpr int kDefaultConfirmationLag = 5;

struct AlertConfig {
    double mu = 0.0;  ///< onset gate, admissions/day
    Date season_start{};
    Date season_end{};
    int confirmation_lag = kDefaultConfirmationLag;

    void validate() const;
};

/// Onset, acceleration and inflection alerts as seen on `evaluated_at`.
struct AlertState {
    std::optional<Date> t0;
    std::optional<Date> tmin;
    std::optional<Date> t1;
    Date evaluated_at{};

    friend bool operator==(const AlertState&, const AlertState&) = default;
};

enum class AlertKind { onset, acceleration, inflection };

std::string alert_name(AlertKind kind);  // "t0", "tmin", "t1"

/// An alert date together with the monitoring day it became final.
struct AlertEvent {
    AlertKind kind;
    Date date;
    Date confirmed_at;

    friend bool operator==(const AlertEvent&, const AlertEvent&) = default;
};

/// Earliest season day with dH > 0, d2H > 0 and H > mu.
std::optional<Date> detect_onset(const SmoothedCurve& curve, const AlertConfig& config);

/// Day of maximal d2H (> 0) on the ascent that starts at t0, once it has
/// stayed maximal for `lag` further days. Ties go to the earliest day.
std::optional<Date> detect_acceleration(const SmoothedCurve& curve, Date t0, Date evaluated_at,
                                        int lag = kDefaultConfirmationLag);

/// First day t after tmin with d2H(t-1) > 0 >= d2H(t) and dH(t) > 0 whose
/// sign change persists for `lag` further days.
std::optional<Date> detect_inflection(const SmoothedCurve& curve, Date tmin, Date evaluated_at,
                                      int lag = kDefaultConfirmationLag);

/// Composes the three detectors on a single curve.
AlertState alert_state(const SmoothedCurve& curve, const AlertConfig& config, Date evaluated_at);

/// Real-time alert bookkeeping. Fed the curve smoothed from data up to each
/// monitoring day, in order. The detectors only look at the curve up to
/// `day - edge_guard`; the newest values of a real-time curve are still
/// moving. An alert, once raised, is frozen.
class AlertTracker {
public:
    explicit AlertTracker(AlertConfig config, int edge_guard = 0);

    void observe(const SmoothedCurve& curve_up_to_day, Date day);

    const AlertState& state() const { return state_; }
    const std::vector<AlertEvent>& events() const { return events_; }

private:
    AlertConfig config_;
    int edge_guard_;
    AlertState state_;
    std::vector<AlertEvent> events_;
};

struct AlertReplay {
    AlertState state;
    std::vector<AlertEvent> events;
    /// Curve smoothed from all data (the last replayed day).
    SmoothedCurve curve;
};

/// Days at the end of a real-time curve left out of alert detection: half the
/// moving-average window under truncate_window smoothing, 0 under mirror.
int default_edge_guard(const SmoothingConfig& smoothing);

/// Replays monitoring from the first day the smoother can run (no earlier
/// than season_start) through the last day of `series`, re-smoothing each
/// prefix. Uses only the data in `series`.
AlertReplay replay_alerts(const DailySeries& series, const EnsembleSmoother& smoother, const AlertConfig& config,
                          int edge_guard);

}  // namespace peakcast
