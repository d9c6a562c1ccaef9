#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <vector>

#include "peakcast/date.hpp"

namespace peakcast {

/// Fixed rates in 1/year.
struct SirConstants {
    double gamma = 1.8;  ///< loss of immunity
    double nu = 36.0;    ///< recovery

    void validate() const;
};

/// Calibrated parameters. Rates are per year, alpha maps infectious
/// prevalence to admissions/day.
struct SirParams {
    double b0 = 70.0;
    double b1 = 0.3;
    double phi = 3.8;
    double alpha = 150.0;
    double i0 = 1e-4;
    double r0 = 0.4;

    static constexpr std::size_t dimension = 6;

    std::array<double, dimension> to_array() const { return {b0, b1, phi, alpha, i0, r0}; }
    static SirParams from_array(const std::array<double, dimension>& v) { return {v[0], v[1], v[2], v[3], v[4], v[5]}; }

    /// True when every field lies in its admissible range.
    bool admissible() const;
    /// Throws ConfigError naming the first out-of-range field.
    void validate() const;
};

/// Box bounds used by calibration. The open lower ends of b0 and alpha are
/// closed at a small positive value.
struct ParamBounds {
    std::array<double, SirParams::dimension> lower;
    std::array<double, SirParams::dimension> upper;

    static ParamBounds admissible_range();
};

/// Daily-sampled solution. times are years since January 1 of the start
/// date's year.
struct Trajectory {
    Date start{};
    std::vector<double> times;
    std::vector<double> s;
    std::vector<double> i;
    std::vector<double> r;
    std::vector<double> h_sir;

    std::size_t size() const { return h_sir.size(); }
    Date date_at(std::size_t k) const { return add_days(start, static_cast<long>(k)); }
    Date last_date() const { return date_at(h_sir.size() - 1); }
};

struct PeakEstimate {
    Date t_sir{};
    double h_sir = 0.0;
};

inline constexpr double kDaysPerYear = 365.0;

/// Seasonal transmission rate at t years: b0 (1 + b1 cos(2 pi t + phi)).
inline double beta(double t_years, const SirParams& p)
{
    return p.b0 * (1.0 + p.b1 * std::cos(2.0 * std::numbers::pi * t_years + p.phi));
}

/// Years elapsed since January 1 of the same calendar year.
double season_time(Date d);

/// Classical RK4 with step step_days/365 years, starting from
/// (1 - i0 - r0, i0, r0) at t_start, sampled once per day through t_end.
/// step_days must divide one day. Throws BlowupError if a compartment leaves
/// [-1e-6, 1 + 1e-6].
Trajectory integrate(const SirParams& p, const SirConstants& c, Date t_start, Date t_end, double step_days = 1.0);

/// Non-throwing kernel behind integrate(): writes alpha*I for days 0..n_days
/// into h_out (size n_days + 1). Returns the failing RK4 step, if any.
std::optional<std::size_t> simulate_hospitalizations(const SirParams& p, const SirConstants& c, Date t_start,
                                                     std::size_t n_days, int substeps, double* h_out);

/// Grid argmax of h_sir over [search_start, search_end]; ties go to the
/// earliest day.
PeakEstimate peak(const Trajectory& traj, Date search_start, Date search_end);

}  // namespace peakcast
