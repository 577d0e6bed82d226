#pragma once

#include "kvnsim/config.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace kvnsim {

std::string_view version();

/// Raised for failures while executing a valid scenario (I/O, numerics).
class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FileRecord {
    std::string path;    // relative to the manifest directory
    std::string sha256;  // lowercase hex
    std::uintmax_t bytes = 0;
};

/// Extremes of the diagnostics columns over the recorded times.
struct RunSummary {
    std::size_t records = 0;
    double final_norm = 0.0;
    double norm_drift = 0.0;    // max |norm(t) - norm(0)|
    double energy_drift = 0.0;  // max |energy(t) - energy(0)|
    double min_value = 0.0;     // min of min_density_or_wigner
    double max_residual = 0.0;
};

struct RunManifest {
    std::string tool = "kvnsim";
    std::string version;
    std::string started;
    std::string finished;
    std::string mode;
    std::string config;  // canonical echo, re-parses to the run's config
    std::vector<FileRecord> files;
    RunSummary summary;
    std::vector<std::string> warnings;

    std::string to_json() const;
    static RunManifest from_json(std::string_view text);
};

struct RunOptions {
    std::filesystem::path out_dir;  // overrides output.directory when set
    bool quiet = true;
};

/// Executes the selected mode and writes, into the output directory:
///   diagnostics.tsv  columns t, norm, energy, min_density_or_wigner, residual
///   snap_NNNNN.bin / .hdr for each recorded time
///   manifest.json, written last and only when everything else succeeded.
/// Identical configs give byte-identical diagnostics and snapshots.
RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& options = {});

/// Plot data selectors.
inline constexpr std::string_view kPlotSelectors[] = {"density", "phase", "wigner", "poynting",
                                                      "wigner_min_timeseries", "energy_timeseries"};

/// Emits gnuplot-friendly text next to the manifest and records it (and any
/// warning) in the manifest. `index` picks a snapshot; -1 is the last one.
/// Unknown selectors throw ConfigError; missing or unsuitable inputs throw RunError.
std::filesystem::path emit_plot_data(const std::filesystem::path& manifest_path, std::string_view what, long index = -1);

/// Lowercase hex SHA-256 of a file.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace kvnsim
