#pragma once

#include "kvnsim/phase_grid.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kvnsim {

/// Thrown by parse_config with every problem found, one message per entry.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

enum class RunMode { Kvn, Hybrid, Em, Transform, Wigner };
enum class PotentialKind { Free, Harmonic, Quartic, Tabulated };
enum class InitialKind { Gaussian, Cat, PlaneWaveEm, CustomFile };

std::string_view to_string(RunMode m);
std::string_view to_string(PotentialKind k);
std::string_view to_string(InitialKind k);

struct GridSection {
    std::size_t n_q = 0;
    std::size_t n_p = 0;
    double q_min = 0.0;
    double q_max = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
    std::size_t n_z = 0;   // em mode
    double length = 0.0;   // em mode

    bool operator==(const GridSection&) const = default;
};

struct PotentialSection {
    PotentialKind kind = PotentialKind::Free;
    double omega = 1.0;
    double a = 1.0;
    double b = 0.5;
    std::string file;  // tabulated: one "V V'" pair per q point

    bool operator==(const PotentialSection&) const = default;
};

/// Gaussian: amplitude exp(-(q-q0)^2/(2 width_q^2) - (p-p0)^2/(2 width_p^2)) exp(i S)
/// with S = phase_q q + phase_p p + phase_qp q p. In wigner mode and for
/// cat states the Gaussian is the 1-D wave function exp(-(x-q0)^2/(2 width_q^2) + i p0 x / hbar).
struct InitialSection {
    InitialKind kind = InitialKind::Gaussian;
    double q0 = 0.0;
    double p0 = 0.0;
    double width_q = 1.0;
    double width_p = 1.0;
    double phase_q = 0.0;
    double phase_p = 0.0;
    double phase_qp = 0.0;
    double separation = 2.0;      // cat: packets at +-separation
    std::size_t mode = 1;         // plane_wave_em: k = 2 pi mode / length
    double amplitude = 1.0;       // plane_wave_em
    std::string polarization = "x";
    std::string file;             // custom_file: snapshot header path

    bool operator==(const InitialSection&) const = default;
};

struct RunSection {
    RunMode mode = RunMode::Kvn;
    double dt = 1e-3;
    std::size_t steps = 1000;
    std::size_t record_every = 100;
    double kappa = 1.0;
    double hbar = 1.0;
    Rep representation = Rep::QP;

    bool operator==(const RunSection&) const = default;
};

/// Key "formats": comma-separated subset of {tsv, bin}.
struct OutputSection {
    std::string directory = "out";
    bool diagnostics = true;  // tsv
    bool snapshots = true;    // bin

    bool operator==(const OutputSection&) const = default;
};

struct ScenarioConfig {
    GridSection grid;
    PotentialSection potential;
    InitialSection initial;
    RunSection run;
    OutputSection output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates the sectioned key=value format. Throws ConfigError
/// listing every unknown or duplicate key, type mismatch, missing required
/// key and out-of-range value.
ScenarioConfig parse_config(std::string_view text);

/// Reads a file and parses it; unreadable files become a ConfigError.
ScenarioConfig load_config(const std::string& path);

/// Canonical text with every key written out; parse_config(to_text(c)) == c.
std::string to_text(const ScenarioConfig& cfg);

}  // namespace kvnsim
