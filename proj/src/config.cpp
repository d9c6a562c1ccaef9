#include "peakcast/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "peakcast/errors.hpp"

namespace peakcast {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view text)
{
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("'" + std::string(key) + "': not a number: '" + std::string(text) + "'");
    return value;
}

bool parse_bool(std::string_view key, std::string_view text)
{
    const std::string v = lower(trim(text));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw ConfigError("'" + std::string(key) + "': expected a boolean");
}

std::vector<std::string_view> split(std::string_view text, char sep)
{
    std::vector<std::string_view> out;
    std::size_t from = 0;
    while (true) {
        const auto at = text.find(sep, from);
        out.push_back(trim(text.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from)));
        if (at == std::string_view::npos) break;
        from = at + 1;
    }
    return out;
}

void flatten(const boost::property_tree::ptree& tree, const std::string& prefix,
             std::map<std::string, std::string>& out)
{
    for (const auto& [key, child] : tree) {
        const std::string name = prefix.empty() ? lower(key) : prefix + "." + lower(key);
        if (child.empty())
            out[name] = child.data();
        else
            flatten(child, name, out);
    }
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value)
{
    PipelineConfig& p = cfg.pipeline;
    auto real = [&] { return parse_number<double>(key, value); };
    auto integer = [&] { return parse_number<int>(key, value); };

    if (key == "lambda") p.lambda = real();
    else if (key == "rho") p.rho = real();
    else if (key == "seed") p.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "weight_convention") {
        const std::string v = lower(trim(value));
        if (v == "prose") p.convention = WeightConvention::prose;
        else if (v == "verbatim") p.convention = WeightConvention::verbatim;
        else throw ConfigError("weight_convention must be 'prose' or 'verbatim'");
    }
    else if (key == "data") cfg.data = std::string(trim(value));
    else if (key == "history_dir") cfg.history_dir = std::string(trim(value));
    else if (key == "out_dir") cfg.out_dir = std::string(trim(value));
    else if (key == "facility") cfg.load.facility = std::string(trim(value));
    else if (key == "age_max") cfg.load.age_max = integer();
    else if (key == "exclude_years") {
        cfg.load.excluded_years.clear();
        if (!trim(value).empty())
            for (auto y : split(value, ',')) cfg.load.excluded_years.insert(parse_number<int>(key, y));
    }
    else if (key == "lambda_grid") cfg.lambda_grid = parse_real_list(value);
    else if (key == "alerts.mu" || key == "mu") p.alerts.mu = real();
    else if (key == "alerts.mu_fraction") p.alerts.mu_fraction = real();
    else if (key == "alerts.season_start") p.alerts.season_start = parse_month_day(trim(value));
    else if (key == "alerts.season_end") p.alerts.season_end = parse_month_day(trim(value));
    else if (key == "alerts.confirmation_lag") p.alerts.confirmation_lag = integer();
    else if (key == "smoothing.ma_window") p.smoothing.ma_window = integer();
    else if (key == "smoothing.sg") p.smoothing.sg_configs = parse_sg_list(value);
    else if (key == "smoothing.edge_policy") {
        const std::string v = lower(trim(value));
        if (v == "truncate_window") p.smoothing.edge_policy = EdgePolicy::truncate_window;
        else if (v == "mirror") p.smoothing.edge_policy = EdgePolicy::mirror;
        else throw ConfigError("smoothing.edge_policy must be 'truncate_window' or 'mirror'");
    }
    else if (key == "smoothing.edge_guard") p.edge_guard = integer();
    else if (key == "alerts.history") {
        const std::string v = lower(trim(value));
        if (v == "replay") p.history_alerts = HistoryAlerts::replay;
        else if (v == "retrospective") p.history_alerts = HistoryAlerts::retrospective;
        else throw ConfigError("alerts.history must be 'replay' or 'retrospective'");
    }
    else if (key == "de.population") p.de.population_size = integer();
    else if (key == "de.generations") p.de.max_generations = integer();
    else if (key == "de.crossover") p.de.crossover_prob = real();
    else if (key == "de.mutation_min") p.de.mutation_min = real();
    else if (key == "de.mutation_max") p.de.mutation_max = real();
    else if (key == "de.tolerance") p.de.tolerance = real();
    else if (key == "de.parallel") p.de.execution = parse_bool(key, value) ? Execution::parallel : Execution::serial;
    else if (key == "sir.gamma") p.constants.gamma = real();
    else if (key == "sir.nu") p.constants.nu = real();
    else if (key == "synth.b0") cfg.synth_theta.b0 = real();
    else if (key == "synth.b1") cfg.synth_theta.b1 = real();
    else if (key == "synth.phi") cfg.synth_theta.phi = real();
    else if (key == "synth.alpha") cfg.synth_theta.alpha = real();
    else if (key == "synth.i0") cfg.synth_theta.i0 = real();
    else if (key == "synth.r0") cfg.synth_theta.r0 = real();
    else if (key == "synth.noise") cfg.synth_noise = real();
    else if (key == "synth.year") cfg.synth_year = integer();
    else throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

const std::vector<FacilityPreset>& facility_presets()
{
    static const std::vector<FacilityPreset> presets{
        {"hlcm", 0.9981, 0.97},
        {"hegc", 0.998, 0.93},
        {"hfb", 0.9991, 0.8},
        {"hrdr", 0.9991, 0.2},
    };
    return presets;
}

const FacilityPreset& find_preset(std::string_view name)
{
    const std::string key = lower(trim(name));
    for (const auto& p : facility_presets())
        if (p.name == key) return p;
    throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void RunConfig::apply_preset(std::string_view name)
{
    const FacilityPreset& p = find_preset(name);
    preset = p.name;
    pipeline.lambda = p.lambda;
    pipeline.rho = p.rho;
}

void RunConfig::validate() const
{
    if (!(pipeline.lambda >= 0.0 && pipeline.lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (!(pipeline.rho >= 0.0)) throw ConfigError("rho must be non-negative");
    if (!(pipeline.alerts.mu_fraction >= 0.0)) throw ConfigError("alerts.mu_fraction must be non-negative");
    if (pipeline.alerts.mu && !(*pipeline.alerts.mu >= 0.0)) throw ConfigError("alerts.mu must be non-negative");
    if (pipeline.alerts.confirmation_lag < 0) throw ConfigError("alerts.confirmation_lag must be non-negative");
    if (pipeline.edge_guard && *pipeline.edge_guard < 0) throw ConfigError("smoothing.edge_guard must be non-negative");
    pipeline.smoothing.validate();
    pipeline.de.validate();
    pipeline.constants.validate();
    for (double l : lambda_grid)
        if (!(l >= 0.0 && l <= 1.0)) throw ConfigError("lambda_grid values must lie in [0, 1]");
    if (!(synth_noise >= 0.0)) throw ConfigError("synth.noise must be non-negative");
    if (data && !std::filesystem::exists(*data)) throw ConfigError("data file not found: " + data->string());
    if (history_dir && !std::filesystem::is_directory(*history_dir))
        throw ConfigError("history directory not found: " + history_dir->string());
}

RunConfig parse_config(std::istream& in, RunConfig base)
{
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ParseError(e.message(), static_cast<int>(e.line()));
    }
    std::map<std::string, std::string> entries;
    flatten(tree, "", entries);

    if (auto it = entries.find("preset"); it != entries.end()) {
        base.apply_preset(it->second);
        entries.erase(it);
    }
    for (const auto& [key, value] : entries) apply_key(base, key, value);
    return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    RunConfig cfg = parse_config(in, std::move(base));
    // Relative paths in the file are resolved against the file's directory.
    const auto dir = path.parent_path();
    auto anchor = [&](std::optional<std::filesystem::path>& p) {
        if (p && p->is_relative()) p = dir / *p;
    };
    anchor(cfg.data);
    anchor(cfg.history_dir);
    return cfg;
}

std::vector<double> parse_real_list(std::string_view text)
{
    std::vector<double> out;
    for (auto item : split(text, ',')) {
        if (item.empty()) throw ConfigError("empty entry in list '" + std::string(text) + "'");
        out.push_back(parse_number<double>("list", item));
    }
    return out;
}

std::vector<SgConfig> parse_sg_list(std::string_view text)
{
    std::vector<SgConfig> out;
    for (auto item : split(text, ',')) {
        const auto parts = split(item, ':');
        if (parts.size() != 2) throw ConfigError("smoothing.sg entries look like window:order, got '" + std::string(item) + "'");
        out.push_back({parse_number<int>("smoothing.sg", parts[0]), parse_number<int>("smoothing.sg", parts[1])});
    }
    return out;
}

}  // namespace peakcast
