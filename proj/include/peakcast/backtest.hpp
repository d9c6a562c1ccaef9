#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "peakcast/ensemble.hpp"
#include "peakcast/parallel.hpp"

namespace peakcast {

/// Peak of the retrospectively smoothed season.
struct SeasonTruth {
    Date peak_date{};
    double peak_magnitude = 0.0;
};

struct SeasonMetrics {
    std::optional<Date> stabilization_day;
    std::optional<long> anticipation_days;
    std::optional<long> date_error_days;
    std::optional<double> magnitude_error;

    bool available() const { return stabilization_day.has_value(); }
};

struct SeasonReport {
    std::string facility;
    int year = 0;
    SeasonTruth truth;
    std::vector<DailyForecast> forecasts;
    SeasonMetrics metrics;
};

inline constexpr int kStabilizationToleranceDays = 3;

SeasonTruth true_peak(const DailySeries& full_season, const SmoothingConfig& smoothing);

/// Stabilization is the first pre-peak monitoring day from which every later
/// pre-peak t_hat stays within `tolerance_days` of the last pre-peak t_hat.
/// Anticipation counts days from stabilization to the true peak; the date
/// error is taken at stabilization and the magnitude error from the last
/// pre-peak h_hat.
SeasonMetrics stabilization_and_metrics(std::span<const DailyForecast> forecasts, const SeasonTruth& truth,
                                        int tolerance_days = kStabilizationToleranceDays);

/// Replays [monitor_from, monitor_to] with run_day on strict prefixes. The
/// history must not contain the season's year.
SeasonReport run_season(const DailySeries& full_season, const SeasonHistory& history, const PipelineConfig& config,
                        Date monitor_from, Date monitor_to, Execution execution = Execution::parallel);

enum class HitClass { green, yellow, red, not_fired, withheld, not_monitored };

std::string hit_label(HitClass c);

struct Snapshot {
    int days_before = 0;
    Date day{};
    std::optional<DailyForecast> forecast;
    HitClass date_class = HitClass::not_monitored;
    HitClass magnitude_class = HitClass::not_monitored;
};

inline constexpr std::array<int, 3> kAnticipationWindows{30, 14, 7};

struct AnticipationRow {
    std::string facility;
    int year = 0;
    SeasonTruth truth;
    std::optional<Date> alert;  ///< acceleration alert as known at the end of monitoring
    std::array<Snapshot, kAnticipationWindows.size()> snapshots;
};

/// Green if the truth lies in the reported interval, yellow if it lies in the
/// interval widened by 50% about its centre, red otherwise.
HitClass classify_hit(double truth, double lo, double hi);

std::vector<AnticipationRow> anticipation_table(std::span<const SeasonReport> reports);

struct LambdaRun {
    double lambda = 0.0;
    SeasonReport report;
    int outliers = 0;  ///< days where h_hat moved more than 50% from the previous day
};

int count_magnitude_outliers(std::span<const DailyForecast> forecasts);

std::vector<LambdaRun> grid_search_lambda(const DailySeries& full_season, const SeasonHistory& history,
                                          std::span<const double> lambda_grid, double rho,
                                          const PipelineConfig& config, Date monitor_from, Date monitor_to,
                                          Execution execution = Execution::parallel);

struct SyntheticSeason {
    DailySeries series;
    SeasonTruth truth;  ///< noiseless peak
};

/// One calendar year of daily counts: alpha*I from January 1, plus Gaussian
/// noise with sigma = noise_fraction * peak, clipped at 0 and rounded.
SyntheticSeason generate_synthetic_season(const SirParams& theta, const SirConstants& constants,
                                          double noise_fraction, std::uint64_t seed, int year,
                                          const std::string& facility = "synthetic");

}  // namespace peakcast
