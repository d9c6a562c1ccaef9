#include "peakcast/report_io.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "peakcast/errors.hpp"

namespace peakcast {

using json = nlohmann::ordered_json;

namespace {

json date_or_null(const std::optional<Date>& d) { return d ? json(format_date(*d)) : json(nullptr); }
json real_or_null(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

std::optional<Date> read_date(const json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return parse_date(j[key].get<std::string>());
}

std::optional<double> read_real(const json& j, const char* key)
{
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<double>();
}

double parse_real(const std::string& text, int line)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) throw ParseError("bad number '" + text + "'", line);
    return value;
}

std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }
std::string opt_date(const std::optional<Date>& d) { return d ? format_date(*d) : std::string(); }

struct Summary {
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
};

Summary summarize(const std::vector<double>& v)
{
    Summary s;
    s.n = v.size();
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

}  // namespace

static DailyForecast forecast_from(const json& j);

std::string format_real(double x)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string calibration_to_json(const CalibrationResult& c)
{
    json j;
    j["theta"] = {{"b0", c.theta.b0}, {"b1", c.theta.b1}, {"phi", c.theta.phi},
                  {"alpha", c.theta.alpha}, {"i0", c.theta.i0}, {"r0", c.theta.r0}};
    j["loss"] = c.loss;
    j["t_sir"] = format_date(c.peak.t_sir);
    j["h_sir"] = c.peak.h_sir;
    j["generations"] = c.generations;
    j["converged"] = c.converged;
    j["seed"] = c.seed;
    return j.dump();
}

std::string forecast_to_json(const DailyForecast& f)
{
    json j;
    j["date"] = format_date(f.evaluated_at);
    j["t0"] = date_or_null(f.alert.t0);
    j["tmin"] = date_or_null(f.alert.tmin);
    j["t1"] = date_or_null(f.alert.t1);
    j["t_hat"] = date_or_null(f.t_hat);
    j["t_lo"] = f.t_interval ? json(format_date(f.t_interval->first)) : json(nullptr);
    j["t_hi"] = f.t_interval ? json(format_date(f.t_interval->second)) : json(nullptr);
    j["h_hat"] = real_or_null(f.h_hat);
    j["h_lo"] = f.h_interval ? json(f.h_interval->first) : json(nullptr);
    j["h_hi"] = f.h_interval ? json(f.h_interval->second) : json(nullptr);
    j["t_sir"] = date_or_null(f.t_sir);
    j["h_sir"] = real_or_null(f.h_sir);
    j["t_m"] = date_or_null(f.t_m);
    j["omega_mobile"] = real_or_null(f.omega_mobile);
    if (f.calibration) j["calibration"] = json::parse(calibration_to_json(*f.calibration));
    if (!f.warnings.empty()) j["warnings"] = f.warnings;
    return j.dump();
}

DailyForecast forecast_from_json(const std::string& line)
{
    try {
        return forecast_from(json::parse(line));
    } catch (const json::exception& e) {
        throw ParseError(e.what(), 0);
    }
}

static DailyForecast forecast_from(const json& j)
{
    DailyForecast f;
    f.evaluated_at = parse_date(j.at("date").get<std::string>());
    f.alert.evaluated_at = f.evaluated_at;
    f.alert.t0 = read_date(j, "t0");
    f.alert.tmin = read_date(j, "tmin");
    f.alert.t1 = read_date(j, "t1");
    f.t_hat = read_date(j, "t_hat");
    const auto t_lo = read_date(j, "t_lo");
    const auto t_hi = read_date(j, "t_hi");
    if (t_lo && t_hi) f.t_interval = std::make_pair(*t_lo, *t_hi);
    f.h_hat = read_real(j, "h_hat");
    const auto h_lo = read_real(j, "h_lo");
    const auto h_hi = read_real(j, "h_hi");
    if (h_lo && h_hi) f.h_interval = std::make_pair(*h_lo, *h_hi);
    f.t_sir = read_date(j, "t_sir");
    f.h_sir = read_real(j, "h_sir");
    f.t_m = read_date(j, "t_m");
    f.omega_mobile = read_real(j, "omega_mobile");
    if (j.contains("warnings")) f.warnings = j["warnings"].get<std::vector<std::string>>();
    return f;
}

std::string alert_event_to_json(const std::string& facility, const AlertEvent& e)
{
    const json j{{"facility", facility},
                 {"alert", alert_name(e.kind)},
                 {"date", format_date(e.date)},
                 {"confirmed_at", format_date(e.confirmed_at)}};
    return j.dump();
}

void write_forecasts_jsonl(std::ostream& out, std::span<const DailyForecast> forecasts)
{
    for (const auto& f : forecasts) out << forecast_to_json(f) << '\n';
}

std::vector<DailyForecast> read_forecasts_jsonl(std::istream& in)
{
    std::vector<DailyForecast> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(forecast_from_json(line));
        } catch (const ParseError&) {
            throw ParseError("malformed forecast record", n);
        }
    }
    return out;
}

void write_forecasts_csv(std::ostream& out, std::span<const DailyForecast> forecasts)
{
    out << "date,field,value\n";
    for (const auto& f : forecasts) {
        const std::string day = format_date(f.evaluated_at);
        auto row = [&](const char* field, const std::string& value) {
            if (!value.empty()) out << day << ',' << field << ',' << value << '\n';
        };
        row("evaluated_at", day);
        row("t0", opt_date(f.alert.t0));
        row("tmin", opt_date(f.alert.tmin));
        row("t1", opt_date(f.alert.t1));
        row("t_hat", opt_date(f.t_hat));
        if (f.t_interval) {
            row("t_lo", format_date(f.t_interval->first));
            row("t_hi", format_date(f.t_interval->second));
        }
        row("h_hat", opt_real(f.h_hat));
        if (f.h_interval) {
            row("h_lo", format_real(f.h_interval->first));
            row("h_hi", format_real(f.h_interval->second));
        }
        row("t_sir", opt_date(f.t_sir));
        row("h_sir", opt_real(f.h_sir));
        row("t_m", opt_date(f.t_m));
        row("omega_mobile", opt_real(f.omega_mobile));
    }
}

std::vector<DailyForecast> read_forecasts_csv(std::istream& in)
{
    std::vector<DailyForecast> out;
    std::map<std::string, std::string> pending;
    std::string current;

    auto flush = [&] {
        if (current.empty()) return;
        DailyForecast f;
        f.evaluated_at = parse_date(current);
        f.alert.evaluated_at = f.evaluated_at;
        auto date = [&](const char* k) -> std::optional<Date> {
            const auto it = pending.find(k);
            return it == pending.end() ? std::nullopt : std::optional<Date>(parse_date(it->second));
        };
        auto real = [&](const char* k) -> std::optional<double> {
            const auto it = pending.find(k);
            return it == pending.end() ? std::nullopt : std::optional<double>(parse_real(it->second, 0));
        };
        f.alert.t0 = date("t0");
        f.alert.tmin = date("tmin");
        f.alert.t1 = date("t1");
        f.t_hat = date("t_hat");
        if (auto lo = date("t_lo"), hi = date("t_hi"); lo && hi) f.t_interval = std::make_pair(*lo, *hi);
        f.h_hat = real("h_hat");
        if (auto lo = real("h_lo"), hi = real("h_hi"); lo && hi) f.h_interval = std::make_pair(*lo, *hi);
        f.t_sir = date("t_sir");
        f.h_sir = real("h_sir");
        f.t_m = date("t_m");
        f.omega_mobile = real("omega_mobile");
        out.push_back(std::move(f));
        pending.clear();
    };

    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (n == 1 && line == "date,field,value")) continue;
        const auto a = line.find(',');
        const auto b = a == std::string::npos ? a : line.find(',', a + 1);
        if (b == std::string::npos) throw ParseError("expected date,field,value", n);
        const std::string day = line.substr(0, a);
        if (day != current) {
            flush();
            current = day;
        }
        pending[line.substr(a + 1, b - a - 1)] = line.substr(b + 1);
    }
    flush();
    return out;
}

void write_report_csv(std::ostream& out, std::span<const SeasonReport> reports)
{
    out << "facility,year,true_peak_date,true_peak_magnitude,stabilization_day,anticipation_days,"
           "peak_date_error_days,peak_magnitude_error,n\n";
    std::vector<double> anticipation, date_error, magnitude_error;
    for (const auto& r : reports) {
        const auto& m = r.metrics;
        out << r.facility << ',' << r.year << ',' << format_date(r.truth.peak_date) << ','
            << format_real(r.truth.peak_magnitude) << ',' << opt_date(m.stabilization_day) << ','
            << (m.anticipation_days ? std::to_string(*m.anticipation_days) : "") << ','
            << (m.date_error_days ? std::to_string(*m.date_error_days) : "") << ','
            << opt_real(m.magnitude_error) << ",1\n";
        if (m.anticipation_days) anticipation.push_back(static_cast<double>(*m.anticipation_days));
        if (m.date_error_days) date_error.push_back(static_cast<double>(*m.date_error_days));
        if (m.magnitude_error) magnitude_error.push_back(*m.magnitude_error);
    }
    const Summary a = summarize(anticipation), d = summarize(date_error), g = summarize(magnitude_error);
    auto cell = [](const Summary& s, double v) { return s.n ? format_real(v) : std::string(); };
    out << "mean,,,,," << cell(a, a.mean) << ',' << cell(d, d.mean) << ',' << cell(g, g.mean) << ','
        << std::max({a.n, d.n, g.n}) << '\n';
    out << "std,,,,," << cell(a, a.std) << ',' << cell(d, d.std) << ',' << cell(g, g.std) << ','
        << std::max({a.n, d.n, g.n}) << '\n';
}

void write_anticipation_csv(std::ostream& out, std::span<const AnticipationRow> rows)
{
    out << "facility,year,true_peak_date,true_peak_magnitude,days_before,snapshot_day,t_hat,t_lo,t_hi,date_hit,"
           "h_hat,h_lo,h_hi,magnitude_hit\n";
    for (const auto& r : rows) {
        for (const auto& s : r.snapshots) {
            out << r.facility << ',' << r.year << ',' << format_date(r.truth.peak_date) << ','
                << format_real(r.truth.peak_magnitude) << ',' << s.days_before << ',' << format_date(s.day) << ',';
            const DailyForecast* f = s.forecast ? &*s.forecast : nullptr;
            if (f && f->t_hat && f->t_interval)
                out << format_date(*f->t_hat) << ',' << format_date(f->t_interval->first) << ','
                    << format_date(f->t_interval->second);
            else
                out << ",,";
            out << ',' << hit_label(s.date_class) << ',';
            if (f && f->h_hat && f->h_interval)
                out << format_real(*f->h_hat) << ',' << format_real(f->h_interval->first) << ','
                    << format_real(f->h_interval->second);
            else
                out << ",,";
            out << ',' << hit_label(s.magnitude_class) << '\n';
        }
    }
}

void write_anticipation_text(std::ostream& out, std::span<const AnticipationRow> rows)
{
    out << std::left << std::setw(12) << "facility" << std::setw(6) << "year" << std::setw(12) << "true peak"
        << std::setw(10) << "height";
    for (int w : kAnticipationWindows) out << std::setw(34) << ("-" + std::to_string(w) + " days");
    out << '\n';
    for (const auto& r : rows) {
        std::ostringstream height;
        height << std::fixed << std::setprecision(1) << r.truth.peak_magnitude;
        out << std::setw(12) << r.facility << std::setw(6) << r.year << std::setw(12) << format_date(r.truth.peak_date)
            << std::setw(10) << height.str();
        for (const auto& s : r.snapshots) {
            std::ostringstream cell;
            const DailyForecast* f = s.forecast ? &*s.forecast : nullptr;
            if (f && f->t_hat && f->t_interval) {
                const long half = days_between(*f->t_hat, f->t_interval->second);
                cell << format_date(*f->t_hat) << "+-" << half << ' ' << hit_label(s.date_class);
                if (f->h_hat) cell << " h " << hit_label(s.magnitude_class);
            } else {
                cell << hit_label(s.date_class);
            }
            out << std::setw(34) << cell.str();
        }
        out << '\n';
    }
}

void write_lambda_sweep_csv(std::ostream& out, std::span<const LambdaRun> runs)
{
    out << "lambda,date,predicted_date,date_error_days,predicted_magnitude,magnitude_error\n";
    for (const auto& run : runs) {
        const auto& truth = run.report.truth;
        for (const auto& f : run.report.forecasts) {
            if (!f.t_hat) continue;
            out << format_real(run.lambda) << ',' << format_date(f.evaluated_at) << ',' << format_date(*f.t_hat) << ','
                << std::abs(days_between(truth.peak_date, *f.t_hat)) << ',' << opt_real(f.h_hat) << ','
                << (f.h_hat ? format_real(std::abs(*f.h_hat - truth.peak_magnitude)) : std::string()) << '\n';
        }
    }
}

void write_lambda_summary_csv(std::ostream& out, std::span<const LambdaRun> runs)
{
    out << "lambda,anticipation_days,peak_date_error_days,peak_magnitude_error,outliers\n";
    for (const auto& run : runs) {
        const auto& m = run.report.metrics;
        out << format_real(run.lambda) << ',' << (m.anticipation_days ? std::to_string(*m.anticipation_days) : "")
            << ',' << (m.date_error_days ? std::to_string(*m.date_error_days) : "") << ','
            << opt_real(m.magnitude_error) << ',' << run.outliers << '\n';
    }
}

void write_series_csv(std::ostream& out, const DailySeries& series)
{
    out << "date,facility,age,count\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        out << format_date(series.date_at(k)) << ',' << series.facility << ",," << format_real(series.counts[k]) << '\n';
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << "date,s,i,r,h_sir\n";
    for (std::size_t k = 0; k < traj.size(); ++k)
        out << format_date(traj.date_at(k)) << ',' << format_real(traj.s[k]) << ',' << format_real(traj.i[k]) << ','
            << format_real(traj.r[k]) << ',' << format_real(traj.h_sir[k]) << '\n';
}

void write_curve_csv(std::ostream& out, const SmoothedCurve& curve)
{
    out << "date,h,dh,d2h\n";
    for (std::size_t k = 0; k < curve.size(); ++k)
        out << format_date(curve.date_at(k)) << ',' << format_real(curve.h[k]) << ',' << format_real(curve.dh[k])
            << ',' << format_real(curve.d2h[k]) << '\n';
}

}  // namespace peakcast
