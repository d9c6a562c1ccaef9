#include "peakcast/sir.hpp"

#include <cmath>
#include <string>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

constexpr double kSimplexSlack = 1e-6;

struct State {
    double s;
    double i;
    double r;
};

inline State derivative(const State& x, double beta_t, const SirConstants& c)
{
    const double infection = beta_t * x.s * x.i;
    const double recovery = c.nu * x.i;
    const double waning = c.gamma * x.r;
    return {-infection + waning, infection - recovery, recovery - waning};
}

inline bool inside_simplex(const State& x)
{
    auto ok = [](double v) { return std::isfinite(v) && v >= -kSimplexSlack && v <= 1.0 + kSimplexSlack; };
    return ok(x.s) && ok(x.i) && ok(x.r);
}

int substeps_for(double step_days)
{
    if (!(step_days > 0.0) || step_days > 1.0)
        throw ConfigError("step_days must lie in (0, 1], got " + std::to_string(step_days));
    const double per_day = 1.0 / step_days;
    const double rounded = std::round(per_day);
    if (std::abs(per_day - rounded) > 1e-9 * rounded)
        throw ConfigError("step_days must divide one day evenly, got " + std::to_string(step_days));
    return static_cast<int>(rounded);
}

// Integrates n_days whole days and calls sink(day, state) for day 0..n_days.
template <class Sink>
std::optional<std::size_t> run_rk4(const SirParams& p, const SirConstants& c, Date t_start, std::size_t n_days,
                                   int substeps, Sink&& sink)
{
    const double h = 1.0 / (kDaysPerYear * substeps);
    const double t0 = season_time(t_start);
    State x{1.0 - p.i0 - p.r0, p.i0, p.r0};
    sink(std::size_t{0}, x);

    std::size_t step = 0;
    double beta_now = beta(t0, p);
    for (std::size_t day = 1; day <= n_days; ++day) {
        for (int k = 0; k < substeps; ++k) {
            // Recompute t from the step count to avoid accumulated drift.
            const double t = t0 + static_cast<double>(step) * h;
            const double beta_mid = beta(t + 0.5 * h, p);
            const double beta_end = beta(t + h, p);

            const State k1 = derivative(x, beta_now, c);
            const State k2 = derivative({x.s + 0.5 * h * k1.s, x.i + 0.5 * h * k1.i, x.r + 0.5 * h * k1.r}, beta_mid, c);
            const State k3 = derivative({x.s + 0.5 * h * k2.s, x.i + 0.5 * h * k2.i, x.r + 0.5 * h * k2.r}, beta_mid, c);
            const State k4 = derivative({x.s + h * k3.s, x.i + h * k3.i, x.r + h * k3.r}, beta_end, c);
            x.s += h / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
            x.i += h / 6.0 * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i);
            x.r += h / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
            ++step;
            beta_now = beta_end;
            if (!inside_simplex(x)) return step;
        }
        sink(day, x);
    }
    return std::nullopt;
}

}  // namespace

void SirConstants::validate() const
{
    if (!(gamma > 0.0) || !(nu > 0.0)) throw ConfigError("SIR constants gamma and nu must be positive");
}

bool SirParams::admissible() const
{
    return b0 > 0.0 && b0 <= 3000.0 && b1 >= 0.0 && b1 <= 1.0 && phi >= 0.0 && phi <= 2.0 * std::numbers::pi &&
           alpha > 0.0 && alpha <= 2000.0 && i0 >= 0.0 && i0 <= 0.5 && r0 >= 0.0 && r0 <= 0.5 && i0 + r0 <= 1.0;
}

void SirParams::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("SIR parameter out of range: ") + what);
    };
    require(b0 > 0.0 && b0 <= 3000.0, "b0 must lie in (0, 3000]");
    require(b1 >= 0.0 && b1 <= 1.0, "b1 must lie in [0, 1]");
    require(phi >= 0.0 && phi <= 2.0 * std::numbers::pi, "phi must lie in [0, 2pi]");
    require(alpha > 0.0 && alpha <= 2000.0, "alpha must lie in (0, 2000]");
    require(i0 >= 0.0 && i0 <= 0.5, "i0 must lie in [0, 0.5]");
    require(r0 >= 0.0 && r0 <= 0.5, "r0 must lie in [0, 0.5]");
}

ParamBounds ParamBounds::admissible_range()
{
    return {{1e-3, 0.0, 0.0, 1e-3, 0.0, 0.0}, {3000.0, 1.0, 2.0 * std::numbers::pi, 2000.0, 0.5, 0.5}};
}

double season_time(Date d) { return static_cast<double>(day_of_year(d) - 1) / kDaysPerYear; }

Trajectory integrate(const SirParams& p, const SirConstants& c, Date t_start, Date t_end, double step_days)
{
    if (!(t_start < t_end)) throw ConfigError("integration window is empty");
    c.validate();
    const int substeps = substeps_for(step_days);
    const auto n_days = static_cast<std::size_t>(days_between(t_start, t_end));

    Trajectory traj;
    traj.start = t_start;
    traj.times.resize(n_days + 1);
    traj.s.resize(n_days + 1);
    traj.i.resize(n_days + 1);
    traj.r.resize(n_days + 1);
    traj.h_sir.resize(n_days + 1);
    const double t0 = season_time(t_start);
    const auto failed = run_rk4(p, c, t_start, n_days, substeps, [&](std::size_t day, const State& x) {
        traj.times[day] = t0 + static_cast<double>(day) / kDaysPerYear;
        traj.s[day] = x.s;
        traj.i[day] = x.i;
        traj.r[day] = x.r;
        traj.h_sir[day] = p.alpha * x.i;
    });
    if (failed) throw BlowupError(*failed);
    return traj;
}

std::optional<std::size_t> simulate_hospitalizations(const SirParams& p, const SirConstants& c, Date t_start,
                                                     std::size_t n_days, int substeps, double* h_out)
{
    return run_rk4(p, c, t_start, n_days, substeps,
                   [&](std::size_t day, const State& x) { h_out[day] = p.alpha * x.i; });
}

PeakEstimate peak(const Trajectory& traj, Date search_start, Date search_end)
{
    if (traj.size() == 0 || search_end < search_start)
        throw ConfigError("peak search window is empty");
    if (search_start < traj.start || traj.last_date() < search_end)
        throw ConfigError("peak search window " + format_date(search_start) + ".." + format_date(search_end) +
                          " lies outside the trajectory");
    const auto first = static_cast<std::size_t>(days_between(traj.start, search_start));
    const auto last = static_cast<std::size_t>(days_between(traj.start, search_end));
    std::size_t best = first;
    for (std::size_t k = first + 1; k <= last; ++k)
        if (traj.h_sir[k] > traj.h_sir[best]) best = k;
    return {traj.date_at(best), traj.h_sir[best]};
}

}  // namespace peakcast
