#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "peakcast/date.hpp"
#include "peakcast/parallel.hpp"
#include "peakcast/sir.hpp"
#include "peakcast/timeseries.hpp"

namespace peakcast {

/// Value returned for parameter vectors whose integration fails. Never
/// selected by the optimizer.
inline constexpr double kLossSentinel = std::numeric_limits<double>::infinity();

/// Weights and anchors of the penalized calibration loss
///   lambda * [MSE(H, H_sir) + rho * (h_sir - h0)^2] + (1 - lambda) * (t_sir - t_m)^2
/// with date differences in days.
struct LossConfig {
    double lambda = 0.998;
    double rho = 0.9;
    double h0 = 0.0;
    Date t_m{};
    Date fit_start{};        ///< first day of the MSE window
    Date fit_end{};          ///< last day of the MSE window (the current day)
    Date peak_search_end{};  ///< peak is searched over [fit_start, peak_search_end]
    /// Day the initial state (1 - i0 - r0, i0, r0) applies. Defaults to
    /// January 1 of the fit_start year, the origin of the seasonal clock.
    std::optional<Date> origin;

    Date simulation_origin() const { return origin ? *origin : year_start(year_of(fit_start)); }
    void validate() const;
};

struct DeConfig {
    int population_size = 15 * static_cast<int>(SirParams::dimension);
    double mutation_min = 0.5;  ///< F is drawn once per generation from [min, max]
    double mutation_max = 1.0;
    double crossover_prob = 0.5;
    int max_generations = 300;
    double tolerance = 1e-6;  ///< relative spread of population losses
    std::uint64_t seed = 42;
    Execution execution = Execution::parallel;

    void validate() const;
};

/// Generic box-constrained minimizer result.
struct DeResult {
    std::vector<double> best;
    double best_value = kLossSentinel;
    int generations = 0;
    bool converged = false;
    /// Best population value after initialization and after each generation.
    std::vector<double> best_history;
};

using Objective = std::function<double(std::span<const double>)>;

/// rand/1/bin differential evolution. Random draws for a generation are made
/// serially before its trials are evaluated, so the result depends only on
/// the seed, never on the execution policy. The objective must be reentrant.
DeResult differential_evolution(const Objective& objective, std::span<const double> lower,
                                std::span<const double> upper, const DeConfig& config);

struct CalibrationResult {
    SirParams theta;
    double loss = kLossSentinel;
    PeakEstimate peak;
    int generations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    /// H_sir of theta on the daily grid starting at fitted_start.
    Date fitted_start{};
    std::vector<double> fitted;
};

/// Precomputes everything about the observed curve the loss needs so the
/// objective itself only integrates.
class CalibrationProblem {
public:
    CalibrationProblem(const SmoothedCurve& observed, LossConfig config, SirConstants constants);

    double loss(const SirParams& theta) const;
    const LossConfig& config() const { return config_; }
    std::size_t horizon_days() const { return horizon_; }

private:
    LossConfig config_;
    SirConstants constants_;
    std::vector<double> observed_;  // H over the fit window
    std::size_t offset_;            // days from the simulation origin to fit_start
    std::size_t horizon_;           // days from the origin to the end of the peak search
};

double loss(const SirParams& theta, const SmoothedCurve& observed, const LossConfig& config,
            const SirConstants& constants);

CalibrationResult fit(const SmoothedCurve& observed, const LossConfig& config, const DeConfig& de,
                      const SirConstants& constants);

}  // namespace peakcast
