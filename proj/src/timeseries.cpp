#include "peakcast/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <string_view>

#include <Eigen/Dense>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        fields.push_back(trim(line.substr(pos, comma == std::string_view::npos ? line.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return fields;
}

template <class T>
bool parse_number(std::string_view text, T& out)
{
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

struct Columns {
    int date = -1;
    int facility = -1;
    int age = -1;
    int count = -1;
    std::size_t width = 0;
};

Columns parse_header(std::string_view line)
{
    Columns cols;
    const auto names = split_fields(line);
    cols.width = names.size();
    for (std::size_t k = 0; k < names.size(); ++k) {
        const auto name = names[k];
        const int idx = static_cast<int>(k);
        if (name == "date") cols.date = idx;
        else if (name == "facility") cols.facility = idx;
        else if (name == "age") cols.age = idx;
        else if (name == "count") cols.count = idx;
        else throw ParseError("unknown column '" + std::string(name) + "'", 1);
    }
    if (cols.date < 0) throw ParseError("header must contain a 'date' column", 1);
    return cols;
}

// Sums accepted rows per date. Returns the facility name seen.
std::string read_daily_totals(std::istream& in, const LoadOptions& options, std::map<Date, double>& totals)
{
    std::string line;
    std::size_t line_no = 0;
    Columns cols;
    bool have_header = false;
    std::set<std::string> facilities;

    while (std::getline(in, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty()) continue;
        if (!have_header) {
            cols = parse_header(text);
            have_header = true;
            continue;
        }
        const auto fields = split_fields(text);
        if (fields.size() != cols.width)
            throw ParseError("expected " + std::to_string(cols.width) + " fields, got " + std::to_string(fields.size()),
                             line_no);

        Date date;
        try {
            date = parse_date(fields[static_cast<std::size_t>(cols.date)]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }

        std::string facility = cols.facility >= 0 ? std::string(fields[static_cast<std::size_t>(cols.facility)]) : "";
        if (options.facility && facility != *options.facility) continue;

        if (cols.age >= 0) {
            const auto age_text = fields[static_cast<std::size_t>(cols.age)];
            if (!age_text.empty()) {
                int age = 0;
                if (!parse_number(age_text, age) || age < 0)
                    throw ParseError("invalid age '" + std::string(age_text) + "'", line_no);
                if (options.age_max && age >= *options.age_max) continue;
            }
        }

        double count = 1.0;
        if (cols.count >= 0) {
            const auto count_text = fields[static_cast<std::size_t>(cols.count)];
            if (!count_text.empty()) {
                if (!parse_number(count_text, count) || !(count >= 0.0))
                    throw ParseError("invalid count '" + std::string(count_text) + "'", line_no);
            }
        }

        if (options.excluded_years.contains(year_of(date))) continue;

        facilities.insert(facility);
        totals[date] += count;
    }
    if (!have_header) throw ParseError("missing header row");
    if (facilities.size() > 1)
        throw ConfigError("records span several facilities; select one with a facility filter");
    if (options.facility) return *options.facility;
    return facilities.empty() ? std::string{} : *facilities.begin();
}

DailySeries fill_range(const std::string& facility, std::map<Date, double>::const_iterator first, std::map<Date, double>::const_iterator last)
{
    DailySeries series;
    series.facility = facility;
    series.start = first->first;
    series.counts.assign(static_cast<std::size_t>(days_between(first->first, last->first)) + 1, 0.0);
    for (auto it = first;; ++it) {
        series.counts[static_cast<std::size_t>(days_between(series.start, it->first))] = it->second;
        if (it == last) break;
    }
    return series;
}

// Index into [0, n) after reflecting about both end points (no edge repeat).
std::size_t reflect(long m, long n)
{
    if (n == 1) return 0;
    const long period = 2 * (n - 1);
    long r = m % period;
    if (r < 0) r += period;
    if (r >= n) r = period - r;
    return static_cast<std::size_t>(r);
}

void check_odd_window(int window, int minimum, const char* what)
{
    if (window < minimum || window % 2 == 0)
        throw ConfigError(std::string(what) + " window must be odd and >= " + std::to_string(minimum) + ", got " +
                          std::to_string(window));
}

}  // namespace

std::optional<std::size_t> DailySeries::index_of(Date d) const
{
    const long k = days_between(start, d);
    if (k < 0 || static_cast<std::size_t>(k) >= counts.size()) return std::nullopt;
    return static_cast<std::size_t>(k);
}

std::vector<Date> DailySeries::dates() const
{
    std::vector<Date> out;
    out.reserve(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) out.push_back(date_at(k));
    return out;
}

std::optional<std::size_t> SmoothedCurve::index_of(Date d) const
{
    const long k = days_between(start, d);
    if (k < 0 || static_cast<std::size_t>(k) >= h.size()) return std::nullopt;
    return static_cast<std::size_t>(k);
}

void SmoothingConfig::validate() const
{
    check_odd_window(ma_window, 3, "moving-average");
    if (sg_configs.empty()) throw ConfigError("at least one Savitzky-Golay configuration is required");
    for (const auto& sg : sg_configs) {
        check_odd_window(sg.window, 5, "Savitzky-Golay");
        if (sg.order < 2 || sg.order >= sg.window)
            throw ConfigError("Savitzky-Golay order must satisfy 2 <= order < window, got order " +
                              std::to_string(sg.order) + " for window " + std::to_string(sg.window));
    }
}

int SmoothingConfig::max_sg_window() const
{
    int w = 0;
    for (const auto& sg : sg_configs) w = std::max(w, sg.window);
    return w;
}

DailySeries parse_records(std::istream& in, const LoadOptions& options)
{
    std::map<Date, double> totals;
    const auto facility = read_daily_totals(in, options, totals);
    if (totals.empty()) throw EmptySeriesError("empty series after filtering");
    return fill_range(facility, totals.begin(), std::prev(totals.end()));
}

DailySeries load_records(const std::filesystem::path& path, const LoadOptions& options)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        return parse_records(in, options);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::map<int, DailySeries> load_seasons(const std::filesystem::path& path, const LoadOptions& options)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::map<Date, double> totals;
    std::string facility;
    try {
        facility = read_daily_totals(in, options, totals);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (totals.empty()) throw EmptySeriesError("empty series after filtering: " + path.string());

    std::map<int, DailySeries> seasons;
    auto first = totals.begin();
    while (first != totals.end()) {
        const int year = year_of(first->first);
        auto last = first;
        for (auto it = first; it != totals.end() && year_of(it->first) == year; ++it) last = it;
        seasons.emplace(year, fill_range(facility, first, last));
        first = std::next(last);
    }
    return seasons;
}

std::map<int, DailySeries> split_by_year(const DailySeries& series)
{
    std::map<int, DailySeries> out;
    for (std::size_t k = 0; k < series.size(); ++k) {
        const Date d = series.date_at(k);
        auto& part = out[year_of(d)];
        if (part.counts.empty()) {
            part.facility = series.facility;
            part.start = d;
        }
        part.counts.push_back(series.counts[k]);
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> values, int window, EdgePolicy edges)
{
    check_odd_window(window, 3, "moving-average");
    const long n = static_cast<long>(values.size());
    const long half = window / 2;
    std::vector<double> out(values.size());
    for (long i = 0; i < n; ++i) {
        double sum = 0.0;
        double lo = values[static_cast<std::size_t>(std::clamp(i, 0L, n - 1))];
        double hi = lo;
        long used = 0;
        for (long m = i - half; m <= i + half; ++m) {
            std::size_t idx;
            if (edges == EdgePolicy::mirror) {
                idx = reflect(m, n);
            } else {
                if (m < 0 || m >= n) continue;
                idx = static_cast<std::size_t>(m);
            }
            const double v = values[idx];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            ++used;
        }
        // Clamp so rounding can never push the mean outside the window range.
        out[static_cast<std::size_t>(i)] = std::clamp(sum / static_cast<double>(used), lo, hi);
    }
    return out;
}

DailySeries moving_average(const DailySeries& series, int window, EdgePolicy edges)
{
    DailySeries out{series.facility, series.start, moving_average(series.counts, window, edges)};
    return out;
}

SavitzkyGolayFilter::SavitzkyGolayFilter(int window, int order, int deriv)
    : window_(window), order_(order), deriv_(deriv)
{
    if (window < 3 || window % 2 == 0)
        throw ConfigError("Savitzky-Golay window must be odd and >= 3, got " + std::to_string(window));
    if (order < 0 || order >= window)
        throw ConfigError("Savitzky-Golay order must be below the window, got " + std::to_string(order));
    if (deriv < 0 || deriv > order)
        throw ConfigError("Savitzky-Golay derivative order must not exceed the polynomial order");

    double factorial = 1.0;
    for (int k = 2; k <= deriv; ++k) factorial *= k;

    const auto w = static_cast<std::size_t>(window);
    weights_.assign(w * w, 0.0);
    Eigen::MatrixXd design(window, order + 1);
    for (int j = 0; j < window; ++j) {
        for (int m = 0; m < window; ++m) {
            double p = 1.0;
            for (int q = 0; q <= order; ++q) {
                design(m, q) = p;
                p *= static_cast<double>(m - j);
            }
        }
        const Eigen::MatrixXd pinv = design.completeOrthogonalDecomposition().pseudoInverse();
        for (int m = 0; m < window; ++m)
            weights_[static_cast<std::size_t>(j) * w + static_cast<std::size_t>(m)] = factorial * pinv(deriv, m);
    }
}

std::vector<double> SavitzkyGolayFilter::apply(std::span<const double> values, EdgePolicy edges) const
{
    const long n = static_cast<long>(values.size());
    const long w = window_;
    const long half = w / 2;
    if (n < w)
        throw ConfigError("Savitzky-Golay window " + std::to_string(w) + " is longer than the series (" +
                          std::to_string(n) + " days)");
    std::vector<double> out(values.size());
    const double* centered = weights_.data() + static_cast<std::size_t>(half * w);
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        if (i >= half && i < n - half) {
            for (long m = 0; m < w; ++m) acc += centered[m] * values[static_cast<std::size_t>(i - half + m)];
        } else if (edges == EdgePolicy::mirror) {
            for (long m = 0; m < w; ++m) acc += centered[m] * values[reflect(i - half + m, n)];
        } else {
            // Fit the nearest full window and evaluate off-center.
            const long first = i < half ? 0 : n - w;
            const double* row = weights_.data() + static_cast<std::size_t>((i - first) * w);
            for (long m = 0; m < w; ++m) acc += row[m] * values[static_cast<std::size_t>(first + m)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

std::vector<double> savitzky_golay(std::span<const double> values, int window, int order, int deriv,
                                   EdgePolicy edges)
{
    return SavitzkyGolayFilter(window, order, deriv).apply(values, edges);
}

EnsembleSmoother::EnsembleSmoother(SmoothingConfig config) : config_(std::move(config))
{
    config_.validate();
    for (const auto& sg : config_.sg_configs)
        filters_.push_back({SavitzkyGolayFilter(sg.window, sg.order, 0), SavitzkyGolayFilter(sg.window, sg.order, 1),
                            SavitzkyGolayFilter(sg.window, sg.order, 2)});
}

SmoothedCurve EnsembleSmoother::smooth(const DailySeries& series) const
{
    return smooth(series, config_.edge_policy);
}

SmoothedCurve EnsembleSmoother::smooth(const DailySeries& series, EdgePolicy edges) const
{
    if (series.empty()) throw EmptySeriesError("cannot smooth an empty series");
    const auto averaged = moving_average(series.counts, config_.ma_window, edges);

    SmoothedCurve curve;
    curve.start = series.start;
    curve.h.assign(series.size(), 0.0);
    curve.dh.assign(series.size(), 0.0);
    curve.d2h.assign(series.size(), 0.0);
    auto accumulate = [](std::vector<double>& into, const std::vector<double>& part) {
        for (std::size_t k = 0; k < into.size(); ++k) into[k] += part[k];
    };
    for (const auto& f : filters_) {
        accumulate(curve.h, f.value.apply(averaged, edges));
        accumulate(curve.dh, f.slope.apply(averaged, edges));
        accumulate(curve.d2h, f.curvature.apply(averaged, edges));
    }
    const double scale = static_cast<double>(filters_.size());
    for (std::size_t k = 0; k < curve.size(); ++k) {
        curve.h[k] /= scale;
        curve.dh[k] /= scale;
        curve.d2h[k] /= scale;
    }
    return curve;
}

SmoothedCurve ensemble_smooth(const DailySeries& series, const SmoothingConfig& config)
{
    return EnsembleSmoother(config).smooth(series);
}

std::size_t peak_index(const SmoothedCurve& curve)
{
    if (curve.size() == 0) throw EmptySeriesError("cannot locate the peak of an empty curve");
    std::size_t best = 0;
    for (std::size_t k = 1; k < curve.size(); ++k)
        if (curve.h[k] > curve.h[best]) best = k;
    return best;
}

DailySeries truncate_to(const DailySeries& series, Date day)
{
    if (series.empty() || day < series.start)
        throw EmptySeriesError("empty series: " + format_date(day) + " precedes the first observation");
    DailySeries out;
    out.facility = series.facility;
    out.start = series.start;
    const auto keep = std::min<std::size_t>(series.size(), static_cast<std::size_t>(days_between(series.start, day)) + 1);
    out.counts.assign(series.counts.begin(), series.counts.begin() + static_cast<long>(keep));
    return out;
}

}  // namespace peakcast
