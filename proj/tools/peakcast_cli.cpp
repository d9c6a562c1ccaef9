#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peakcast/backtest.hpp"
#include "peakcast/config.hpp"
#include "peakcast/errors.hpp"
#include "peakcast/report_io.hpp"

namespace fs = std::filesystem;
using namespace peakcast;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoAlert = 2;

struct GlobalOptions {
    std::optional<fs::path> config;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<fs::path> out_dir;
    std::string format = "json";
    std::optional<fs::path> data;
    std::optional<fs::path> history_dir;
    std::optional<std::string> facility;
};

RunConfig resolve_config(const GlobalOptions& g)
{
    RunConfig cfg;
    if (g.config) cfg = load_config(*g.config, cfg);
    if (g.preset) cfg.apply_preset(*g.preset);
    if (g.seed) cfg.pipeline.seed = *g.seed;
    if (g.out_dir) cfg.out_dir = *g.out_dir;
    if (g.data) cfg.data = *g.data;
    if (g.history_dir) cfg.history_dir = *g.history_dir;
    if (g.facility) cfg.load.facility = *g.facility;
    cfg.validate();
    return cfg;
}

std::ofstream open_output(const fs::path& path)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

// Every *.csv under the directory (sorted by name), split by calendar year.
std::map<int, DailySeries> load_history_dir(const fs::path& dir, const LoadOptions& options)
{
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw HistoryEmptyError("no .csv files in " + dir.string());

    std::map<int, DailySeries> seasons;
    for (const auto& file : files) {
        for (auto& [year, series] : load_seasons(file, options)) {
            if (!seasons.emplace(year, std::move(series)).second)
                throw ConfigError("year " + std::to_string(year) + " appears in more than one history file");
        }
    }
    return seasons;
}

std::vector<DailySeries> seasons_except(const std::map<int, DailySeries>& seasons, int year)
{
    std::vector<DailySeries> out;
    for (const auto& [y, s] : seasons)
        if (y != year) out.push_back(s);
    return out;
}

void write_forecasts(std::ostream& out, std::span<const DailyForecast> forecasts, const std::string& format)
{
    if (format == "csv")
        write_forecasts_csv(out, forecasts);
    else
        write_forecasts_jsonl(out, forecasts);
}

std::string forecast_extension(const std::string& format) { return format == "csv" ? ".csv" : ".jsonl"; }

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings) std::cerr << "peakcast: warning: " << w << '\n';
}

int cmd_forecast(const GlobalOptions& g, const std::string& as_of_text)
{
    const RunConfig cfg = resolve_config(g);
    if (!cfg.data) throw ConfigError("forecast needs --data");
    if (!cfg.history_dir) throw ConfigError("forecast needs --history-dir");
    const Date as_of = parse_date(as_of_text);
    const int year = year_of(as_of);

    const auto current = load_seasons(*cfg.data, cfg.load);
    const auto it = current.find(year);
    if (it == current.end() || as_of < it->second.start)
        throw EmptySeriesError("empty series: no data for " + std::to_string(year) + " up to " + as_of_text);

    const SeasonHistory history = build_history(seasons_except(load_history_dir(*cfg.history_dir, cfg.load), year),
                                                cfg.pipeline);
    print_warnings(history.warnings);

    const DailyForecast f = run_day(truncate_to(it->second, as_of), history, cfg.pipeline);
    if (g.format == "csv")
        write_forecasts_csv(std::cout, std::span(&f, 1));
    else
        std::cout << forecast_to_json(f) << '\n';
    return f.t_hat ? kExitOk : kExitNoAlert;
}

struct SeasonJob {
    DailySeries series;
    SeasonHistory history;
};

int cmd_backtest(const GlobalOptions& g, std::optional<int> only_year, bool full_season)
{
    const RunConfig cfg = resolve_config(g);
    if (!cfg.history_dir) throw ConfigError("backtest needs --history-dir");
    auto seasons = load_history_dir(*cfg.history_dir, cfg.load);
    if (cfg.data)
        for (auto& [year, series] : load_seasons(*cfg.data, cfg.load)) seasons.insert_or_assign(year, std::move(series));

    std::vector<int> years;
    if (only_year) {
        if (!seasons.contains(*only_year)) throw EmptySeriesError("no data for " + std::to_string(*only_year));
        years.push_back(*only_year);
    } else {
        for (const auto& [year, series] : seasons) years.push_back(year);
    }

    std::vector<SeasonReport> reports;
    for (int year : years) {
        const DailySeries& series = seasons.at(year);
        const SeasonHistory history = build_history(seasons_except(seasons, year), cfg.pipeline);
        print_warnings(history.warnings);
        const SeasonTruth truth = true_peak(series, cfg.pipeline.smoothing);
        const Date from = cfg.pipeline.alerts.season_start.in_year(year);
        const Date to = full_season ? series.last_date() : truth.peak_date;
        reports.push_back(run_season(series, history, cfg.pipeline, from, to, cfg.pipeline.de.execution));
        std::cerr << "peakcast: " << year << " done\n";
    }

    std::vector<DailyForecast> all;
    for (const auto& r : reports) all.insert(all.end(), r.forecasts.begin(), r.forecasts.end());
    {
        auto out = open_output(cfg.out_dir / ("forecasts" + forecast_extension(g.format)));
        write_forecasts(out, all, g.format);
    }
    {
        auto out = open_output(cfg.out_dir / "report.csv");
        write_report_csv(out, reports);
    }
    const auto rows = anticipation_table(reports);
    {
        auto out = open_output(cfg.out_dir / "anticipation.csv");
        write_anticipation_csv(out, rows);
    }
    {
        auto out = open_output(cfg.out_dir / "anticipation.txt");
        write_anticipation_text(out, rows);
    }
    write_anticipation_text(std::cout, rows);
    return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, int year, const std::optional<std::string>& grid_text,
              std::optional<double> rho)
{
    RunConfig cfg = resolve_config(g);
    if (grid_text) cfg.lambda_grid = parse_real_list(*grid_text);
    if (!cfg.history_dir) throw ConfigError("sweep needs --history-dir");
    auto seasons = load_history_dir(*cfg.history_dir, cfg.load);
    if (cfg.data)
        for (auto& [y, series] : load_seasons(*cfg.data, cfg.load)) seasons.insert_or_assign(y, std::move(series));
    if (!seasons.contains(year)) throw EmptySeriesError("no data for " + std::to_string(year));

    const DailySeries& series = seasons.at(year);
    const SeasonHistory history = build_history(seasons_except(seasons, year), cfg.pipeline);
    print_warnings(history.warnings);
    const SeasonTruth truth = true_peak(series, cfg.pipeline.smoothing);
    const auto runs = grid_search_lambda(series, history, cfg.lambda_grid, rho.value_or(cfg.pipeline.rho), cfg.pipeline,
                                         cfg.pipeline.alerts.season_start.in_year(year), truth.peak_date,
                                         cfg.pipeline.de.execution);
    {
        auto out = open_output(cfg.out_dir / "lambda_sweep.csv");
        write_lambda_sweep_csv(out, runs);
    }
    {
        auto out = open_output(cfg.out_dir / "lambda_summary.csv");
        write_lambda_summary_csv(out, runs);
    }
    write_lambda_summary_csv(std::cout, runs);
    return kExitOk;
}

int cmd_synth(const GlobalOptions& g, std::optional<int> year, int count, std::optional<double> noise,
              const std::optional<fs::path>& out_path)
{
    const RunConfig cfg = resolve_config(g);
    const int first = year.value_or(cfg.synth_year);
    const double sigma = noise.value_or(cfg.synth_noise);
    if (count < 1) throw ConfigError("--count must be at least 1");
    if (out_path && count > 1) throw ConfigError("--out takes a single season; use --out-dir with --count");

    for (int k = 0; k < count; ++k) {
        const int y = first + k;
        const SyntheticSeason s = generate_synthetic_season(cfg.synth_theta, cfg.pipeline.constants, sigma,
                                                            cfg.pipeline.seed + static_cast<std::uint64_t>(k), y);
        const fs::path path = out_path ? *out_path : cfg.out_dir / ("synthetic_" + std::to_string(y) + ".csv");
        auto out = open_output(path);
        write_series_csv(out, s.series);
        std::cout << y << ' ' << format_date(s.truth.peak_date) << ' ' << format_real(s.truth.peak_magnitude) << ' '
                  << path.string() << '\n';
    }
    return kExitOk;
}

int cmd_simulate(const GlobalOptions& g, const std::string& from, const std::string& to,
                 const std::optional<fs::path>& out_path)
{
    const RunConfig cfg = resolve_config(g);
    const Trajectory traj = integrate(cfg.synth_theta, cfg.pipeline.constants, parse_date(from), parse_date(to));
    if (out_path) {
        auto out = open_output(*out_path);
        write_trajectory_csv(out, traj);
    } else {
        write_trajectory_csv(std::cout, traj);
    }
    const PeakEstimate top = peak(traj, traj.start, traj.last_date());
    std::cerr << "peakcast: peak " << format_date(top.t_sir) << ' ' << format_real(top.h_sir) << '\n';
    return kExitOk;
}

int cmd_smooth(const GlobalOptions& g, const std::optional<std::string>& edges, const std::optional<fs::path>& out_path)
{
    RunConfig cfg = resolve_config(g);
    if (!cfg.data) throw ConfigError("smooth needs --data");
    if (edges) {
        if (*edges == "mirror") cfg.pipeline.smoothing.edge_policy = EdgePolicy::mirror;
        else if (*edges == "truncate_window") cfg.pipeline.smoothing.edge_policy = EdgePolicy::truncate_window;
        else throw ConfigError("--edges must be 'mirror' or 'truncate_window'");
    }
    const SmoothedCurve curve = ensemble_smooth(load_records(*cfg.data, cfg.load), cfg.pipeline.smoothing);
    if (out_path) {
        auto out = open_output(*out_path);
        write_curve_csv(out, curve);
    } else {
        write_curve_csv(std::cout, curve);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Seasonal hospitalization peak forecasting"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config, "Key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--preset", g.preset, "Facility preset: hlcm, hegc, hfb, hrdr");
    app.add_option("--seed", g.seed, "Base random seed");
    app.add_option("--out-dir", g.out_dir, "Directory for output files");
    app.add_option("--format", g.format, "Forecast serialization")->check(CLI::IsMember({"json", "jsonl", "csv"}));
    app.add_option("--data", g.data, "Daily records CSV");
    app.add_option("--history-dir", g.history_dir, "Directory of past-season CSVs");
    app.add_option("--facility", g.facility, "Keep only this facility");

    std::string as_of;
    auto* forecast = app.add_subcommand("forecast", "Forecast for one monitoring day");
    forecast->add_option("--as-of", as_of, "Monitoring day (YYYY-MM-DD)")->required();

    std::optional<int> bt_year;
    bool full_season = false;
    auto* backtest = app.add_subcommand("backtest", "Leave-one-year-out replay");
    backtest->add_option("--year", bt_year, "Only this season (default: every season)");
    backtest->add_flag("--full-season", full_season, "Monitor through the end of the data instead of the true peak");

    int sw_year = 0;
    std::optional<std::string> grid;
    std::optional<double> rho;
    auto* sweep = app.add_subcommand("sweep", "Lambda grid search on one season");
    sweep->add_option("--year", sw_year, "Season under test")->required();
    sweep->add_option("--grid", grid, "Comma-separated lambda values");
    sweep->add_option("--rho", rho, "Fixed rho");

    std::optional<int> syn_year;
    int syn_count = 1;
    std::optional<double> noise;
    std::optional<fs::path> syn_out;
    auto* synth = app.add_subcommand("synth", "Write synthetic seasons");
    synth->add_option("--year", syn_year, "First season year");
    synth->add_option("--count", syn_count, "Number of consecutive seasons");
    synth->add_option("--noise", noise, "Noise sigma as a fraction of the peak");
    synth->add_option("--out", syn_out, "Output file (single season)");

    std::string sim_from, sim_to;
    std::optional<fs::path> sim_out;
    auto* simulate = app.add_subcommand("simulate", "Integrate the SIR model");
    simulate->add_option("--from", sim_from, "First day")->required();
    simulate->add_option("--to", sim_to, "Last day")->required();
    simulate->add_option("--out", sim_out, "Output file (default: stdout)");

    std::optional<std::string> edges;
    std::optional<fs::path> sm_out;
    auto* smooth = app.add_subcommand("smooth", "Smooth a series and write H, dH, d2H");
    smooth->add_option("--edges", edges, "mirror or truncate_window");
    smooth->add_option("--out", sm_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*forecast) return cmd_forecast(g, as_of);
        if (*backtest) return cmd_backtest(g, bt_year, full_season);
        if (*sweep) return cmd_sweep(g, sw_year, grid, rho);
        if (*synth) return cmd_synth(g, syn_year, syn_count, noise, syn_out);
        if (*simulate) return cmd_simulate(g, sim_from, sim_to, sim_out);
        if (*smooth) return cmd_smooth(g, edges, sm_out);
    } catch (const std::exception& e) {
        std::cerr << "peakcast: error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
