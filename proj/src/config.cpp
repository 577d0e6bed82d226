#include "kvnsim/config.hpp"

#include "kvnsim/em_spinor.hpp"
#include "kvnsim/hybrid.hpp"
#include "kvnsim/potential.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace kvnsim {

namespace {

std::string join(const std::vector<std::string>& errors) {
    std::string out = "invalid configuration:";
    for (const auto& e : errors) out += "\n  " + e;
    return out;
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

template <typename Enum>
struct EnumNames {
    std::vector<std::pair<std::string_view, Enum>> names;

    std::string_view name(Enum e) const {
        for (const auto& [n, v] : names)
            if (v == e) return n;
        return "?";
    }
    std::string list() const {
        std::string out;
        for (const auto& [n, v] : names) out += (out.empty() ? "" : ", ") + std::string(n);
        return out;
    }
};

const EnumNames<RunMode> kModes{{{"kvn", RunMode::Kvn},
                                 {"hybrid", RunMode::Hybrid},
                                 {"em", RunMode::Em},
                                 {"transform", RunMode::Transform},
                                 {"wigner", RunMode::Wigner}}};
const EnumNames<PotentialKind> kPotentials{{{"free", PotentialKind::Free},
                                            {"harmonic", PotentialKind::Harmonic},
                                            {"quartic", PotentialKind::Quartic},
                                            {"tabulated", PotentialKind::Tabulated}}};
const EnumNames<InitialKind> kInitials{{{"gaussian", InitialKind::Gaussian},
                                        {"cat", InitialKind::Cat},
                                        {"plane_wave_em", InitialKind::PlaneWaveEm},
                                        {"custom_file", InitialKind::CustomFile}}};

struct Entry {
    std::string value;
    std::size_t line;
};

// section -> key -> entry
using RawConfig = std::map<std::string, std::map<std::string, Entry>>;

class Parser {
public:
    ScenarioConfig run(std::string_view text) {
        const RawConfig raw = split(text);
        ScenarioConfig cfg;
        bind(cfg);
        for (const auto& [section, keys] : raw) {
            for (const auto& [key, entry] : keys) {
                const std::string full = section + "." + key;
                auto it = setters_.find(full);
                if (it == setters_.end()) {
                    error(entry.line, "unknown key '" + full + "'");
                    continue;
                }
                seen_.insert(full);
                it->second(entry);
            }
        }
        validate(cfg);
        if (!errors_.empty()) throw ConfigError(errors_);
        return cfg;
    }

private:
    std::vector<std::string> errors_;
    std::map<std::string, std::function<void(const Entry&)>> setters_;
    std::set<std::string> seen_;
    std::set<std::string> incomplete_;

    void error(std::size_t line, const std::string& msg) {
        errors_.push_back(line ? "line " + std::to_string(line) + ": " + msg : msg);
    }

    RawConfig split(std::string_view text) {
        RawConfig raw;
        std::string section;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto nl = text.find('\n', pos);
            const auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
            pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
            ++line_no;
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3) {
                    error(line_no, "malformed section header '" + std::string(line) + "'");
                    continue;
                }
                section = std::string(trim(line.substr(1, line.size() - 2)));
                static const std::set<std::string> known{"grid", "potential", "initial", "run", "output"};
                if (!known.count(section)) {
                    error(line_no, "unknown section [" + section + "]");
                    section = "?" + section;
                }
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                error(line_no, "expected key = value, got '" + std::string(line) + "'");
                continue;
            }
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (section.empty()) {
                error(line_no, "key '" + key + "' appears before any [section]");
                continue;
            }
            if (section.front() == '?') continue;  // already reported
            if (key.empty()) {
                error(line_no, "empty key");
                continue;
            }
            auto& keys = raw[section];
            if (auto it = keys.find(key); it != keys.end()) {
                error(line_no, "duplicate key '" + section + "." + key + "' (first set on line " +
                                   std::to_string(it->second.line) + ")");
                continue;
            }
            keys.emplace(key, Entry{value, line_no});
        }
        return raw;
    }

    void real(const std::string& key, double& field) {
        setters_[key] = [this, key, &field](const Entry& e) {
            double v = 0.0;
            const auto* end = e.value.data() + e.value.size();
            const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
            if (ec != std::errc() || ptr != end || e.value.empty())
                bad(e.line, key, key + ": expected a number, got '" + e.value + "'");
            else if (!std::isfinite(v))
                bad(e.line, key, key + ": must be finite");
            else
                field = v;
        };
    }

    void count(const std::string& key, std::size_t& field) {
        setters_[key] = [this, key, &field](const Entry& e) {
            std::size_t v = 0;
            const auto* end = e.value.data() + e.value.size();
            const auto [ptr, ec] = std::from_chars(e.value.data(), end, v);
            if (ec != std::errc() || ptr != end || e.value.empty())
                bad(e.line, key, key + ": expected a non-negative integer, got '" + e.value + "'");
            else
                field = v;
        };
    }

    void text(const std::string& key, std::string& field) {
        setters_[key] = [this, key, &field](const Entry& e) {
            if (e.value.empty())
                bad(e.line, key, key + ": empty value");
            else
                field = e.value;
        };
    }

    template <typename Enum>
    void choice(const std::string& key, Enum& field, const EnumNames<Enum>& names) {
        setters_[key] = [this, key, &field, &names](const Entry& e) {
            for (const auto& [n, v] : names.names)
                if (n == e.value) {
                    field = v;
                    return;
                }
            bad(e.line, key, key + ": unknown value '" + e.value + "' (expected one of " + names.list() + ")");
        };
    }

    void bind(ScenarioConfig& c) {
        count("grid.n_q", c.grid.n_q);
        count("grid.n_p", c.grid.n_p);
        real("grid.q_min", c.grid.q_min);
        real("grid.q_max", c.grid.q_max);
        real("grid.p_min", c.grid.p_min);
        real("grid.p_max", c.grid.p_max);
        count("grid.n_z", c.grid.n_z);
        real("grid.length", c.grid.length);

        choice("potential.kind", c.potential.kind, kPotentials);
        real("potential.omega", c.potential.omega);
        real("potential.a", c.potential.a);
        real("potential.b", c.potential.b);
        text("potential.file", c.potential.file);

        choice("initial.kind", c.initial.kind, kInitials);
        real("initial.q0", c.initial.q0);
        real("initial.p0", c.initial.p0);
        real("initial.width_q", c.initial.width_q);
        real("initial.width_p", c.initial.width_p);
        real("initial.phase_q", c.initial.phase_q);
        real("initial.phase_p", c.initial.phase_p);
        real("initial.phase_qp", c.initial.phase_qp);
        real("initial.separation", c.initial.separation);
        count("initial.mode", c.initial.mode);
        real("initial.amplitude", c.initial.amplitude);
        text("initial.polarization", c.initial.polarization);
        text("initial.file", c.initial.file);

        choice("run.mode", c.run.mode, kModes);
        real("run.dt", c.run.dt);
        count("run.steps", c.run.steps);
        count("run.record_every", c.run.record_every);
        real("run.kappa", c.run.kappa);
        real("run.hbar", c.run.hbar);
        setters_["run.representation"] = [this, &c](const Entry& e) {
            try {
                c.run.representation = rep_from_string(e.value);
            } catch (const std::invalid_argument& ex) {
                error(e.line, std::string("run.representation: ") + ex.what());
            }
        };

        text("output.directory", c.output.directory);
        setters_["output.formats"] = [this, &c](const Entry& e) {
            c.output.diagnostics = false;
            c.output.snapshots = false;
            std::stringstream ss(e.value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto f = trim(item);
                if (f == "tsv")
                    c.output.diagnostics = true;
                else if (f == "bin")
                    c.output.snapshots = true;
                else if (!(f == "none" || f.empty()))
                    error(e.line, "output.formats: unknown format '" + std::string(f) + "' (expected tsv, bin or none)");
            }
        };
    }

    // A value that failed to parse; cross-field checks of its section are skipped.
    void bad(std::size_t line, const std::string& key, const std::string& msg) {
        incomplete_.insert(key.substr(0, key.find('.')));
        error(line, msg);
    }

    void require(const std::string& key) {
        if (!seen_.count(key)) bad(0, key, "missing required key '" + key + "'");
    }

    // Runs a module constructor or check and turns invalid_argument into an error.
    void check(const std::string& context, const std::function<void()>& f) {
        if (incomplete_.count(context)) return;
        try {
            f();
        } catch (const std::invalid_argument& e) {
            error(0, context + ": " + e.what());
        }
    }

    void validate(const ScenarioConfig& c) {
        require("run.mode");
        require("initial.kind");
        if (!seen_.count("run.mode")) return;
        const RunMode mode = c.run.mode;
        const bool phase_space = mode != RunMode::Em;

        if (phase_space) {
            for (const char* k : {"grid.n_q", "grid.n_p", "grid.q_min", "grid.q_max", "grid.p_min", "grid.p_max"}) require(k);
            check("grid", [&] { make_grid(c.grid.n_q, c.grid.n_p, {c.grid.q_min, c.grid.q_max}, {c.grid.p_min, c.grid.p_max}); });
        } else {
            require("grid.n_z");
            require("grid.length");
            check("grid", [&] { EmState(c.grid.n_z, c.grid.length); });
        }

        if (mode == RunMode::Kvn || mode == RunMode::Hybrid) require("potential.kind");
        switch (c.potential.kind) {
            case PotentialKind::Free: break;
            case PotentialKind::Harmonic: check("potential", [&] { PotentialSpec::harmonic(c.potential.omega); }); break;
            case PotentialKind::Quartic: check("potential", [&] { PotentialSpec::quartic(c.potential.a, c.potential.b); }); break;
            case PotentialKind::Tabulated: require("potential.file"); break;
        }

        if (!(c.run.hbar > 0.0)) error(0, "run.hbar = " + format_double(c.run.hbar) + " must be positive");
        if (!(c.run.kappa >= 0.0 && c.run.kappa <= 1.0))
            error(0, "run.kappa = " + format_double(c.run.kappa) + " is outside the bound [0, 1]");
        if (c.run.record_every == 0) error(0, "run.record_every must be at least 1");

        const InitialKind init = c.initial.kind;
        auto allow = [&](std::initializer_list<InitialKind> kinds) {
            for (auto k : kinds)
                if (k == init) return;
            error(0, "initial.kind = " + std::string(to_string(init)) + " is not available in " +
                         std::string(to_string(mode)) + " mode");
        };
        switch (mode) {
            case RunMode::Kvn:
            case RunMode::Transform: allow({InitialKind::Gaussian, InitialKind::CustomFile}); break;
            case RunMode::Hybrid: allow({InitialKind::Gaussian, InitialKind::Cat, InitialKind::CustomFile}); break;
            case RunMode::Em: allow({InitialKind::PlaneWaveEm}); break;
            case RunMode::Wigner: allow({InitialKind::Gaussian, InitialKind::Cat}); break;
        }
        if (init == InitialKind::Gaussian && !(c.initial.width_q > 0.0 && c.initial.width_p > 0.0))
            error(0, "initial.width_q and initial.width_p must be positive");
        if (init == InitialKind::CustomFile) require("initial.file");
        if (mode == RunMode::Hybrid && init == InitialKind::Gaussian &&
            (c.initial.phase_q != 0.0 || c.initial.phase_p != 0.0 || c.initial.phase_qp != 0.0))
            error(0, "hybrid mode reads the initial state as a Wigner function, so initial.phase_* must be 0");
        if (init == InitialKind::PlaneWaveEm) {
            if (c.initial.mode == 0 || 2 * c.initial.mode >= c.grid.n_z)
                error(0, "initial.mode must lie in [1, n_z / 2)");
            if (c.initial.polarization != "x" && c.initial.polarization != "y")
                error(0, "initial.polarization must be x or y");
        }

        if (mode == RunMode::Hybrid && c.run.kappa > 0.0 && c.potential.kind == PotentialKind::Tabulated)
            error(0, "hybrid mode with kappa > 0 needs an analytic potential; tabulated is rejected");
        const bool needs_bridge = mode == RunMode::Wigner || (mode == RunMode::Hybrid && init == InitialKind::Cat);
        if (needs_bridge) {
            if (!(c.run.kappa > 0.0)) error(0, "run.kappa must be positive when a Wigner transform is taken");
            if (c.grid.n_q > 0 && c.grid.n_p > 0 && c.run.kappa > 0.0 && c.run.hbar > 0.0) {
                const double dq = (c.grid.q_max - c.grid.q_min) / static_cast<double>(c.grid.n_q);
                const double dp = (c.grid.p_max - c.grid.p_min) / static_cast<double>(c.grid.n_p);
                const double limit = kPi * c.run.hbar * c.run.kappa / (2.0 * dq);
                // The p axis holds p_min + j dp for j < n_p.
                if (std::max(std::abs(c.grid.p_min), std::abs(c.grid.p_max - dp)) >= limit)
                    error(0, "grid p range must stay inside |p| < pi hbar kappa / (2 dq) = " + format_double(limit));
            }
        }
    }
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

std::string_view to_string(RunMode m) { return kModes.name(m); }
std::string_view to_string(PotentialKind k) { return kPotentials.name(k); }
std::string_view to_string(InitialKind k) { return kInitials.name(k); }

ScenarioConfig parse_config(std::string_view text) { return Parser().run(text); }

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_text(const ScenarioConfig& c) {
    std::ostringstream o;
    auto num = [](double v) { return format_double(v); };
    o << "[grid]\n"
      << "n_q = " << c.grid.n_q << "\n"
      << "n_p = " << c.grid.n_p << "\n"
      << "q_min = " << num(c.grid.q_min) << "\n"
      << "q_max = " << num(c.grid.q_max) << "\n"
      << "p_min = " << num(c.grid.p_min) << "\n"
      << "p_max = " << num(c.grid.p_max) << "\n"
      << "n_z = " << c.grid.n_z << "\n"
      << "length = " << num(c.grid.length) << "\n\n";
    o << "[potential]\n"
      << "kind = " << to_string(c.potential.kind) << "\n"
      << "omega = " << num(c.potential.omega) << "\n"
      << "a = " << num(c.potential.a) << "\n"
      << "b = " << num(c.potential.b) << "\n";
    if (!c.potential.file.empty()) o << "file = " << c.potential.file << "\n";
    o << "\n[initial]\n"
      << "kind = " << to_string(c.initial.kind) << "\n"
      << "q0 = " << num(c.initial.q0) << "\n"
      << "p0 = " << num(c.initial.p0) << "\n"
      << "width_q = " << num(c.initial.width_q) << "\n"
      << "width_p = " << num(c.initial.width_p) << "\n"
      << "phase_q = " << num(c.initial.phase_q) << "\n"
      << "phase_p = " << num(c.initial.phase_p) << "\n"
      << "phase_qp = " << num(c.initial.phase_qp) << "\n"
      << "separation = " << num(c.initial.separation) << "\n"
      << "mode = " << c.initial.mode << "\n"
      << "amplitude = " << num(c.initial.amplitude) << "\n"
      << "polarization = " << c.initial.polarization << "\n";
    if (!c.initial.file.empty()) o << "file = " << c.initial.file << "\n";
    o << "\n[run]\n"
      << "mode = " << to_string(c.run.mode) << "\n"
      << "dt = " << num(c.run.dt) << "\n"
      << "steps = " << c.run.steps << "\n"
      << "record_every = " << c.run.record_every << "\n"
      << "kappa = " << num(c.run.kappa) << "\n"
      << "hbar = " << num(c.run.hbar) << "\n"
      << "representation = " << to_string(c.run.representation) << "\n\n";
    std::string formats;
    if (c.output.diagnostics) formats += "tsv";
    if (c.output.snapshots) formats += formats.empty() ? "bin" : ",bin";
    o << "[output]\n"
      << "directory = " << c.output.directory << "\n"
      << "formats = " << (formats.empty() ? "none" : formats) << "\n";
    return o.str();
}

}  // namespace kvnsim
