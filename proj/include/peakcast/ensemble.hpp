#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peakcast/alerts.hpp"
#include "peakcast/calibrate.hpp"
#include "peakcast/date.hpp"
#include "peakcast/sir.hpp"
#include "peakcast/timeseries.hpp"

namespace peakcast {

/// One past season as seen retrospectively.
struct SeasonRecord {
    int year = 0;
    Date t_peak{};
    Date tmin{};
    double h_peak = 0.0;

    long offset_days() const { return days_between(tmin, t_peak); }
};

struct SeasonHistory {
    std::vector<SeasonRecord> seasons;  ///< sorted by year
    std::vector<std::string> warnings;

    bool empty() const { return seasons.empty(); }
    bool contains_year(int year) const;
    std::vector<int> years() const;

    double mean_offset() const;
    /// Sample standard deviation of t_peak - tmin; 0 for a single season.
    double offset_std() const;
    /// Mean smoothed peak magnitude (h0).
    double mean_peak() const;
    /// Historical mean peak day of year, placed in `year`.
    Date mean_peak_date(int year) const;
};

enum class WeightConvention {
    prose,         ///< mobile coefficient decays 1 -> 0 between tmin and t_max
    verbatim,  ///< mobile coefficient rises 0 -> 1 (formula applied literally)
};

/// Alert settings resolved per season. mu falls back to mu_fraction * h0.
struct AlertSettings {
    std::optional<double> mu;
    double mu_fraction = 0.15;
    MonthDay season_start{3, 1};
    MonthDay season_end{12, 31};
    int confirmation_lag = kDefaultConfirmationLag;

    AlertConfig resolve(int year, double h0) const;
};

/// How build_history dates each past season's acceleration alert.
enum class HistoryAlerts {
    replay,         ///< day by day, exactly as run_day would have raised it
    retrospective,  ///< on the full season smoothed with mirrored edges
};

/// Everything run_day needs besides data and history.
struct PipelineConfig {
    SmoothingConfig smoothing;
    AlertSettings alerts;
    double lambda = 0.998;
    double rho = 0.9;
    DeConfig de;
    SirConstants constants;
    WeightConvention convention = WeightConvention::prose;
    std::uint64_t seed = 42;
    /// Newest days of each real-time curve treated as unsettled: left out of
    /// alert detection and of the calibration window. Absent means
    /// default_edge_guard(smoothing).
    std::optional<int> edge_guard;
    HistoryAlerts history_alerts = HistoryAlerts::replay;

    int effective_edge_guard() const;
};

struct DailyForecast {
    Date evaluated_at{};
    AlertState alert;
    std::optional<Date> t_hat;
    std::optional<std::pair<Date, Date>> t_interval;
    std::optional<double> h_hat;
    std::optional<std::pair<double, double>> h_interval;
    std::optional<Date> t_sir;
    std::optional<double> h_sir;
    std::optional<Date> t_m;
    std::optional<double> omega_mobile;
    std::optional<CalibrationResult> calibration;
    std::vector<std::string> warnings;
};

/// Builds the per-year record from full past seasons. Peaks come from the
/// mirror-smoothed full season. The acceleration alert day follows
/// config.history_alerts; mu defaults to mu_fraction times the mean peak of
/// the seasons given. Seasons without an acceleration alert before their
/// peak are dropped with a warning. Throws HistoryEmptyError if none remain.
SeasonHistory build_history(const std::vector<DailySeries>& past_seasons, const PipelineConfig& config);

/// tmin + mean historical (peak - tmin), rounded half-to-even.
Date mobile_prediction(Date tmin, const SeasonHistory& history);

/// Coefficient of the mobile prediction at day t. Throws ConfigError if
/// t_max <= tmin.
double weight(Date t, Date tmin, Date t_max, WeightConvention convention);

/// omega * t_m + (1 - omega) * t_sir in fractional days, rounded half-to-even.
Date peak_date_forecast(Date t_m, Date t_sir, double omega_mobile);

/// h_sir once t is strictly past the inflection alert.
std::optional<double> peak_magnitude_forecast(const AlertState& alert, Date t, const CalibrationResult& fit);

struct ForecastIntervals {
    std::pair<Date, Date> date;
    std::optional<std::pair<double, double>> magnitude;
    std::vector<std::string> warnings;
};

/// Date half-width: rounded sample std of historical offsets. Magnitude
/// half-width: mean |H_sir - H| over [t0, current day], only when h_hat is
/// present.
ForecastIntervals uncertainty_intervals(Date t_hat, const SeasonHistory& history, const CalibrationResult& fit,
                                        const SmoothedCurve& observed, const AlertState& alert,
                                        std::optional<double> h_hat);

/// Per-day DE seed: a function of the base seed, the day and lambda only.
std::uint64_t day_seed(std::uint64_t base, Date day, double lambda);

/// One monitoring day of the full pipeline. `series` must end on the
/// monitoring day (see truncate_to).
DailyForecast run_day(const DailySeries& series, const SeasonHistory& history, const PipelineConfig& config);

}  // namespace peakcast
