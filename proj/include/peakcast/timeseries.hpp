#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "peakcast/date.hpp"

namespace peakcast {

/// Gap-free daily admission counts for one facility. Day k of the series is
/// start + k days.
struct DailySeries {
    std::string facility;
    Date start{};
    std::vector<double> counts;

    std::size_t size() const { return counts.size(); }
    bool empty() const { return counts.empty(); }
    Date date_at(std::size_t k) const { return add_days(start, static_cast<long>(k)); }
    Date last_date() const { return date_at(counts.size() - 1); }
    std::optional<std::size_t> index_of(Date d) const;
    std::vector<Date> dates() const;
};

enum class EdgePolicy {
    truncate_window,  ///< only observed days enter a window (causal at the right edge)
    mirror,           ///< reflect the series about its end points (retrospective use)
};

struct SgConfig {
    int window = 15;
    int order = 2;
    friend bool operator==(const SgConfig&, const SgConfig&) = default;
};

struct SmoothingConfig {
    int ma_window = 15;
    std::vector<SgConfig> sg_configs{{11, 2}, {15, 2}, {15, 3}, {21, 3}};
    EdgePolicy edge_policy = EdgePolicy::truncate_window;

    /// Throws ConfigError on an even/short window or an order >= window.
    void validate() const;
    int max_sg_window() const;
};

/// H, dH and d2H on the daily grid. Derivative units are admissions/day^k.
struct SmoothedCurve {
    Date start{};
    std::vector<double> h;
    std::vector<double> dh;
    std::vector<double> d2h;

    std::size_t size() const { return h.size(); }
    Date date_at(std::size_t k) const { return add_days(start, static_cast<long>(k)); }
    Date last_date() const { return date_at(h.size() - 1); }
    std::optional<std::size_t> index_of(Date d) const;
};

struct LoadOptions {
    std::optional<std::string> facility;
    /// Keep rows whose age is strictly below this many years. Rows without an
    /// age (pre-aggregated) always pass.
    std::optional<int> age_max;
    std::set<int> excluded_years;
};

/// Reads `date,facility,age,count` or `date,count` CSV. A missing or empty
/// count column means one admission per row. Absent days are zero-filled.
DailySeries load_records(const std::filesystem::path& path, const LoadOptions& options);
DailySeries parse_records(std::istream& in, const LoadOptions& options);

/// Like load_records but split by calendar year. Each year is gap-filled
/// between its own first and last record; years without rows are absent.
std::map<int, DailySeries> load_seasons(const std::filesystem::path& path, const LoadOptions& options);
std::map<int, DailySeries> split_by_year(const DailySeries& series);

std::vector<double> moving_average(std::span<const double> values, int window, EdgePolicy edges);
DailySeries moving_average(const DailySeries& series, int window, EdgePolicy edges);

/// Least-squares polynomial smoothing/differentiation with precomputed
/// convolution weights for every window placement.
class SavitzkyGolayFilter {
public:
    SavitzkyGolayFilter(int window, int order, int deriv);

    int window() const { return window_; }
    int order() const { return order_; }
    int deriv() const { return deriv_; }

    /// Throws ConfigError if the series is shorter than the window.
    std::vector<double> apply(std::span<const double> values, EdgePolicy edges) const;

private:
    int window_;
    int order_;
    int deriv_;
    // Row j (window entries) evaluates the derivative at window position j;
    // the centered weights are row window/2.
    std::vector<double> weights_;
};

std::vector<double> savitzky_golay(std::span<const double> values, int window, int order, int deriv,
                                   EdgePolicy edges = EdgePolicy::truncate_window);

/// Moving average followed by the mean of several Savitzky-Golay fits.
class EnsembleSmoother {
public:
    explicit EnsembleSmoother(SmoothingConfig config);

    const SmoothingConfig& config() const { return config_; }
    SmoothedCurve smooth(const DailySeries& series) const;
    /// Same as smooth() with the edge policy overridden.
    SmoothedCurve smooth(const DailySeries& series, EdgePolicy edges) const;

private:
    struct FilterSet {
        SavitzkyGolayFilter value;
        SavitzkyGolayFilter slope;
        SavitzkyGolayFilter curvature;
    };
    SmoothingConfig config_;
    std::vector<FilterSet> filters_;
};

SmoothedCurve ensemble_smooth(const DailySeries& series, const SmoothingConfig& config);

/// Index of the maximum of h; ties go to the earliest day.
std::size_t peak_index(const SmoothedCurve& curve);

/// Prefix of `series` ending at `day` (inclusive). This is the only way the
/// forecasting pipeline sees data.
DailySeries truncate_to(const DailySeries& series, Date day);

}  // namespace peakcast
