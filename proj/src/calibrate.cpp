#include "peakcast/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

class DeRandom {
public:
    explicit DeRandom(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Unbiased integer in [0, n).
    std::size_t below(std::size_t n)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

private:
    std::mt19937_64 engine_;
};

double relative_spread(const std::vector<double>& values)
{
    double lo = values.front();
    double hi = values.front();
    double sum = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    if (!std::isfinite(hi)) return kLossSentinel;
    const double mean = sum / static_cast<double>(values.size());
    return (hi - lo) / (std::abs(mean) + 1e-12);
}

std::size_t argmin(const std::vector<double>& values)
{
    return static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
}

}  // namespace

void LossConfig::validate() const
{
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (!(rho >= 0.0)) throw ConfigError("rho must be non-negative");
    if (fit_end < fit_start) throw ConfigError("fit window is empty");
    if (peak_search_end < fit_start) throw ConfigError("peak search window is empty");
    if (fit_start < simulation_origin()) throw ConfigError("simulation origin must not follow the fit window");
}

void DeConfig::validate() const
{
    if (population_size < 4) throw ConfigError("DE population must hold at least 4 members");
    if (!(crossover_prob > 0.0 && crossover_prob <= 1.0)) throw ConfigError("DE crossover probability must lie in (0, 1]");
    if (!(mutation_min > 0.0 && mutation_max < 2.0 && mutation_min <= mutation_max))
        throw ConfigError("DE mutation range must lie within (0, 2)");
    if (max_generations < 0) throw ConfigError("DE generation limit must be non-negative");
    if (!(tolerance >= 0.0)) throw ConfigError("DE tolerance must be non-negative");
}

DeResult differential_evolution(const Objective& objective, std::span<const double> lower,
                                std::span<const double> upper, const DeConfig& config)
{
    config.validate();
    if (lower.size() != upper.size() || lower.empty()) throw ConfigError("DE bounds must be non-empty and paired");
    for (std::size_t j = 0; j < lower.size(); ++j)
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j]) || upper[j] < lower[j])
            throw ConfigError("DE bounds must be finite with lower <= upper");

    const std::size_t dim = lower.size();
    const auto np = static_cast<std::size_t>(config.population_size);
    DeRandom rng(config.seed);

    std::vector<double> population(np * dim);
    for (std::size_t i = 0; i < np; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            population[i * dim + j] = lower[j] + rng.uniform() * (upper[j] - lower[j]);

    auto evaluate = [&](const std::vector<double>& members, std::vector<double>& out) {
        for_each_index(np, config.execution, [&](std::size_t i) {
            const double v = objective(std::span<const double>(members.data() + i * dim, dim));
            out[i] = std::isnan(v) ? kLossSentinel : v;
        });
    };

    std::vector<double> values(np);
    evaluate(population, values);

    DeResult result;
    result.best_history.push_back(values[argmin(values)]);
    result.converged = relative_spread(values) < config.tolerance;

    std::vector<double> trials(np * dim);
    std::vector<double> trial_values(np);
    while (!result.converged && result.generations < config.max_generations) {
        const double f = config.mutation_min + rng.uniform() * (config.mutation_max - config.mutation_min);
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t a, b, c;
            do a = rng.below(np); while (a == i);
            do b = rng.below(np); while (b == i || b == a);
            do c = rng.below(np); while (c == i || c == a || c == b);
            const std::size_t forced = rng.below(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                const bool cross = rng.uniform() < config.crossover_prob || j == forced;
                double v = population[i * dim + j];
                if (cross) {
                    v = population[a * dim + j] + f * (population[b * dim + j] - population[c * dim + j]);
                    v = std::clamp(v, lower[j], upper[j]);
                }
                trials[i * dim + j] = v;
            }
        }

        evaluate(trials, trial_values);

        for (std::size_t i = 0; i < np; ++i) {
            const double t = trial_values[i];
            if (std::isfinite(t) && t <= values[i]) {
                std::copy_n(trials.begin() + static_cast<long>(i * dim), dim,
                            population.begin() + static_cast<long>(i * dim));
                values[i] = t;
            }
        }
        ++result.generations;
        result.best_history.push_back(values[argmin(values)]);
        result.converged = relative_spread(values) < config.tolerance;
    }

    const std::size_t best = argmin(values);
    result.best.assign(population.begin() + static_cast<long>(best * dim),
                       population.begin() + static_cast<long>((best + 1) * dim));
    result.best_value = values[best];
    return result;
}

CalibrationProblem::CalibrationProblem(const SmoothedCurve& observed, LossConfig config, SirConstants constants)
    : config_(config), constants_(constants)
{
    config_.validate();
    constants_.validate();
    const auto first = observed.index_of(config_.fit_start);
    const auto last = observed.index_of(config_.fit_end);
    if (!first || !last) throw ConfigError("observed curve does not cover the fit window");
    observed_.assign(observed.h.begin() + static_cast<long>(*first), observed.h.begin() + static_cast<long>(*last) + 1);
    const Date origin = config_.simulation_origin();
    offset_ = static_cast<std::size_t>(days_between(origin, config_.fit_start));
    horizon_ = static_cast<std::size_t>(days_between(origin, std::max(config_.fit_end, config_.peak_search_end)));
}

double CalibrationProblem::loss(const SirParams& theta) const
{
    thread_local std::vector<double> simulated;
    simulated.resize(horizon_ + 1);
    const Date origin = config_.simulation_origin();
    if (simulate_hospitalizations(theta, constants_, origin, horizon_, 1, simulated.data())) return kLossSentinel;

    double sse = 0.0;
    for (std::size_t k = 0; k < observed_.size(); ++k) {
        const double e = observed_[k] - simulated[offset_ + k];
        sse += e * e;
    }
    const double mse = sse / static_cast<double>(observed_.size());

    const auto peak_last = static_cast<std::size_t>(days_between(origin, config_.peak_search_end));
    std::size_t best = offset_;
    for (std::size_t k = offset_ + 1; k <= peak_last; ++k)
        if (simulated[k] > simulated[best]) best = k;
    const double h_sir = simulated[best];
    const double t_gap = static_cast<double>(days_between(config_.t_m, add_days(origin, static_cast<long>(best))));

    const double height_gap = h_sir - config_.h0;
    return config_.lambda * (mse + config_.rho * height_gap * height_gap) + (1.0 - config_.lambda) * t_gap * t_gap;
}

double loss(const SirParams& theta, const SmoothedCurve& observed, const LossConfig& config,
            const SirConstants& constants)
{
    return CalibrationProblem(observed, config, constants).loss(theta);
}

CalibrationResult fit(const SmoothedCurve& observed, const LossConfig& config, const DeConfig& de,
                      const SirConstants& constants)
{
    const CalibrationProblem problem(observed, config, constants);
    const auto bounds = ParamBounds::admissible_range();
    const Objective objective = [&problem](std::span<const double> x) {
        std::array<double, SirParams::dimension> v{};
        std::copy(x.begin(), x.end(), v.begin());
        return problem.loss(SirParams::from_array(v));
    };
    const DeResult found = differential_evolution(objective, bounds.lower, bounds.upper, de);
    if (!std::isfinite(found.best_value))
        throw Error("calibration failed: no parameter vector in the search box integrated successfully");

    std::array<double, SirParams::dimension> v{};
    std::copy(found.best.begin(), found.best.end(), v.begin());

    CalibrationResult result;
    result.theta = SirParams::from_array(v);
    result.loss = found.best_value;
    result.generations = found.generations;
    result.converged = found.converged;
    result.seed = de.seed;

    const Date origin = config.simulation_origin();
    const Date sim_end = add_days(origin, static_cast<long>(problem.horizon_days()));
    const Trajectory traj = integrate(result.theta, constants, origin, sim_end, 1.0);
    result.peak = peak(traj, config.fit_start, config.peak_search_end);
    result.fitted_start = traj.start;
    result.fitted = traj.h_sir;
    return result;
}

}  // namespace peakcast
