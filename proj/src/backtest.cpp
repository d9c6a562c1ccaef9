#include "peakcast/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "peakcast/errors.hpp"

namespace peakcast {

SeasonTruth true_peak(const DailySeries& full_season, const SmoothingConfig& smoothing)
{
    if (full_season.empty()) throw EmptySeriesError("empty season");
    const SmoothedCurve curve = EnsembleSmoother(smoothing).smooth(full_season, EdgePolicy::mirror);
    const std::size_t k = peak_index(curve);
    return {curve.date_at(k), curve.h[k]};
}

SeasonMetrics stabilization_and_metrics(std::span<const DailyForecast> forecasts, const SeasonTruth& truth,
                                        int tolerance_days)
{
    std::vector<const DailyForecast*> pre;
    for (const auto& f : forecasts)
        if (f.evaluated_at < truth.peak_date && f.t_hat) pre.push_back(&f);
    std::sort(pre.begin(), pre.end(),
              [](const DailyForecast* a, const DailyForecast* b) { return a->evaluated_at < b->evaluated_at; });

    SeasonMetrics metrics;
    if (pre.empty()) return metrics;

    const Date final_value = *pre.back()->t_hat;
    std::size_t settled = pre.size() - 1;
    while (settled > 0 && std::abs(days_between(final_value, *pre[settled - 1]->t_hat)) <= tolerance_days) --settled;

    const DailyForecast& at = *pre[settled];
    metrics.stabilization_day = at.evaluated_at;
    metrics.anticipation_days = days_between(at.evaluated_at, truth.peak_date);
    metrics.date_error_days = std::abs(days_between(truth.peak_date, *at.t_hat));

    for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
        if ((*it)->h_hat) {
            metrics.magnitude_error = std::abs(*(*it)->h_hat - truth.peak_magnitude);
            break;
        }
    }
    return metrics;
}

SeasonReport run_season(const DailySeries& full_season, const SeasonHistory& history, const PipelineConfig& config,
                        Date monitor_from, Date monitor_to, Execution execution)
{
    if (full_season.empty()) throw EmptySeriesError("empty season");
    const int year = year_of(full_season.start);
    if (history.contains_year(year))
        throw ConfigError("history contains the season under test (" + std::to_string(year) + ")");

    const Date first = std::max(monitor_from, full_season.start);
    const Date last = std::min(monitor_to, full_season.last_date());

    SeasonReport report;
    report.facility = full_season.facility;
    report.year = year;
    report.truth = true_peak(full_season, config.smoothing);
    if (last < first) return report;

    const auto n = static_cast<std::size_t>(days_between(first, last)) + 1;
    report.forecasts.resize(n);
    for_each_index(n, execution, [&](std::size_t k) {
        const Date day = add_days(first, static_cast<long>(k));
        report.forecasts[k] = run_day(truncate_to(full_season, day), history, config);
    });
    report.metrics = stabilization_and_metrics(report.forecasts, report.truth);
    return report;
}

std::string hit_label(HitClass c)
{
    switch (c) {
    case HitClass::green: return "green";
    case HitClass::yellow: return "yellow";
    case HitClass::red: return "red";
    case HitClass::not_fired: return "alert-not-fired";
    case HitClass::withheld: return "withheld";
    case HitClass::not_monitored: return "not-monitored";
    }
    return "?";
}

HitClass classify_hit(double truth, double lo, double hi)
{
    if (truth >= lo && truth <= hi) return HitClass::green;
    const double centre = 0.5 * (lo + hi);
    const double half = 0.75 * (hi - lo);
    if (truth >= centre - half && truth <= centre + half) return HitClass::yellow;
    return HitClass::red;
}

std::vector<AnticipationRow> anticipation_table(std::span<const SeasonReport> reports)
{
    std::vector<AnticipationRow> rows;
    for (const auto& report : reports) {
        AnticipationRow row;
        row.facility = report.facility;
        row.year = report.year;
        row.truth = report.truth;
        if (!report.forecasts.empty()) row.alert = report.forecasts.back().alert.tmin;

        for (std::size_t w = 0; w < kAnticipationWindows.size(); ++w) {
            Snapshot& snap = row.snapshots[w];
            snap.days_before = kAnticipationWindows[w];
            snap.day = add_days(report.truth.peak_date, -snap.days_before);
            const auto it = std::find_if(report.forecasts.begin(), report.forecasts.end(),
                                         [&](const DailyForecast& f) { return f.evaluated_at == snap.day; });
            if (it == report.forecasts.end()) continue;
            snap.forecast = *it;
            if (!it->t_hat || !it->t_interval) {
                snap.date_class = HitClass::not_fired;
                snap.magnitude_class = HitClass::not_fired;
                continue;
            }
            const double truth_day = static_cast<double>(report.truth.peak_date.time_since_epoch().count());
            snap.date_class = classify_hit(truth_day, static_cast<double>(it->t_interval->first.time_since_epoch().count()),
                                           static_cast<double>(it->t_interval->second.time_since_epoch().count()));
            snap.magnitude_class = it->h_interval ? classify_hit(report.truth.peak_magnitude, it->h_interval->first,
                                                                 it->h_interval->second)
                                                  : HitClass::withheld;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int count_magnitude_outliers(std::span<const DailyForecast> forecasts)
{
    int outliers = 0;
    for (std::size_t k = 1; k < forecasts.size(); ++k) {
        const auto& prev = forecasts[k - 1].h_hat;
        const auto& cur = forecasts[k].h_hat;
        if (prev && cur && std::abs(*cur - *prev) > 0.5 * std::abs(*prev)) ++outliers;
    }
    return outliers;
}

std::vector<LambdaRun> grid_search_lambda(const DailySeries& full_season, const SeasonHistory& history,
                                          std::span<const double> lambda_grid, double rho,
                                          const PipelineConfig& config, Date monitor_from, Date monitor_to,
                                          Execution execution)
{
    if (lambda_grid.empty()) throw ConfigError("lambda grid is empty");
    for (double lambda : lambda_grid)
        if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda grid values must lie in [0, 1]");

    std::vector<LambdaRun> runs;
    for (double lambda : lambda_grid) {
        PipelineConfig cell = config;
        cell.lambda = lambda;
        cell.rho = rho;
        LambdaRun run;
        run.lambda = lambda;
        run.report = run_season(full_season, history, cell, monitor_from, monitor_to, execution);
        run.outliers = count_magnitude_outliers(run.report.forecasts);
        runs.push_back(std::move(run));
    }
    return runs;
}

SyntheticSeason generate_synthetic_season(const SirParams& theta, const SirConstants& constants,
                                          double noise_fraction, std::uint64_t seed, int year,
                                          const std::string& facility)
{
    theta.validate();
    if (!(noise_fraction >= 0.0)) throw ConfigError("noise fraction must be non-negative");
    const Date first = year_start(year);
    const Date last = add_days(year_start(year + 1), -1);
    const Trajectory traj = integrate(theta, constants, first, last, 1.0);
    const PeakEstimate top = peak(traj, first, last);

    SyntheticSeason out;
    out.truth = {top.t_sir, top.h_sir};
    out.series.facility = facility;
    out.series.start = first;
    out.series.counts.resize(traj.size());

    std::mt19937_64 engine(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sigma = noise_fraction * top.h_sir;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double z = noise(engine);
        out.series.counts[k] = std::nearbyint(std::max(0.0, traj.h_sir[k] + sigma * z));
    }
    return out;
}

}  // namespace peakcast
