#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "peakcast/ensemble.hpp"
#include "peakcast/timeseries.hpp"

namespace peakcast {

/// Per-facility loss weights.
struct FacilityPreset {
    std::string name;
    double lambda = 0.998;
    double rho = 0.9;
};

const std::vector<FacilityPreset>& facility_presets();
/// Case-insensitive lookup; throws ConfigError for an unknown name.
const FacilityPreset& find_preset(std::string_view name);

inline const std::vector<double> kDefaultLambdaGrid{0.8, 0.9, 0.99, 0.998, 0.9991};

struct RunConfig {
    PipelineConfig pipeline;
    std::optional<std::string> preset;

    std::optional<std::filesystem::path> data;
    std::optional<std::filesystem::path> history_dir;
    std::filesystem::path out_dir = ".";
    LoadOptions load;

    std::vector<double> lambda_grid = kDefaultLambdaGrid;

    SirParams synth_theta;
    double synth_noise = 0.05;
    int synth_year = 2023;

    /// Sets lambda and rho from a named preset.
    void apply_preset(std::string_view name);
    /// Range checks plus existence of the referenced paths.
    void validate() const;
};

/// Reads a key = value file (optional [section] headers join as
/// section.key) on top of `base`. A `preset` key is applied before the
/// explicit lambda/rho keys. Unknown keys raise ConfigError.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig parse_config(std::istream& in, RunConfig base = {});

/// "0.8,0.9" -> {0.8, 0.9}; throws ConfigError on a malformed entry.
std::vector<double> parse_real_list(std::string_view text);
/// "11:2,15:2" -> Savitzky-Golay (window, order) pairs.
std::vector<SgConfig> parse_sg_list(std::string_view text);

}  // namespace peakcast
