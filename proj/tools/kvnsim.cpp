#include "criteria.hpp"

#include "kvnsim/config.hpp"
#include "kvnsim/parallel.hpp"
#include "kvnsim/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntime = 2;

void report(const kvnsim::ConfigError& e) {
    for (const auto& msg : e.errors()) std::cerr << "error: " << msg << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-space wave function simulator"};
    app.set_version_flag("--version", std::string(kvnsim::version()));
    app.require_subcommand(1);

    std::size_t threads = 0;
    bool quiet = false;
    std::string out_dir;
    app.add_option("--threads", threads, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.add_flag("--quiet", quiet, "Print errors only");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run a scenario and write its outputs and manifest");
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory, overrides output.directory");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario file and print its canonical form");
    validate->add_option("config", validate_path, "Scenario file")->required();

    std::string manifest;
    std::string what;
    long index = -1;
    auto* plot = app.add_subcommand("plot", "Write plot data for a finished run");
    plot->add_option("manifest", manifest, "manifest.json of the run")->required();
    plot->add_option("--what", what, "density, phase, wigner, poynting, wigner_min_timeseries or energy_timeseries")->required();
    plot->add_option("--index", index, "Snapshot index, negative counts from the end");

    std::vector<int> only;
    auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");
    selftest->add_option("--only", only, "Criterion numbers")->check(CLI::Range(1, 12));

    for (auto* sub : {run, validate, plot, selftest}) {
        sub->add_option("--threads", threads, "Worker threads (0: hardware concurrency)")->check(CLI::NonNegativeNumber);
        sub->add_flag("--quiet", quiet, "Print errors only");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }
    kvnsim::set_thread_count(threads);

    try {
        if (*run) {
            const auto cfg = kvnsim::load_config(config_path);
            kvnsim::RunOptions options;
            options.out_dir = out_dir;
            options.quiet = quiet;
            kvnsim::run_scenario(cfg, options);
        } else if (*validate) {
            const auto cfg = kvnsim::load_config(validate_path);
            if (!quiet) std::cout << kvnsim::to_text(cfg);
        } else if (*plot) {
            const auto path = kvnsim::emit_plot_data(manifest, what, index);
            if (!quiet) std::cout << path.string() << "\n";
        } else if (*selftest) {
            acceptance::set_cli_executable(std::filesystem::read_symlink("/proc/self/exe"));
            if (acceptance::run_criteria(only, std::cout) != 0) return kRuntime;
        }
    } catch (const kvnsim::ConfigError& e) {
        report(e);
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
