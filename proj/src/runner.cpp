#include "kvnsim/runner.hpp"

#include "kvnsim/em_spinor.hpp"
#include "kvnsim/errors.hpp"
#include "kvnsim/hybrid.hpp"
#include "kvnsim/kvn_propagator.hpp"
#include "kvnsim/phase_diagnostics.hpp"
#include "kvnsim/snapshot_io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#ifndef KVNSIM_VERSION
#define KVNSIM_VERSION "0.0.0"
#endif

namespace kvnsim {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Row {
    double t = 0.0;
    double norm = 0.0;
    double energy = 0.0;
    double min_value = 0.0;
    double residual = 0.0;
};

std::string format_double(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string snapshot_name(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%05zu", k);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (!out) throw RunError("failed writing '" + path.string() + "'");
}

void prepare_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw RunError("cannot create output directory '" + dir.string() + "'");
    const fs::path probe = dir / ".kvnsim_write_probe";
    {
        std::ofstream out(probe);
        if (!out) throw RunError("output directory '" + dir.string() + "' is not writable");
    }
    fs::remove(probe, ec);
    // A manifest from an earlier run would outlive a failure of this one.
    fs::remove(dir / "manifest.json", ec);
}

PotentialSpec build_potential(const PotentialSection& p, const ScenarioConfig& cfg) {
    switch (p.kind) {
        case PotentialKind::Free: return PotentialSpec::free();
        case PotentialKind::Harmonic: return PotentialSpec::harmonic(p.omega);
        case PotentialKind::Quartic: return PotentialSpec::quartic(p.a, p.b);
        case PotentialKind::Tabulated: {
            std::ifstream in(p.file);
            if (!in) throw RunError("cannot read tabulated potential '" + p.file + "'");
            std::vector<double> v, dv;
            std::string line;
            while (std::getline(in, line)) {
                const auto first = line.find_first_not_of(" \t\r");
                if (first == std::string::npos || line[first] == '#') continue;
                std::istringstream ls(line);
                double a = 0.0, b = 0.0;
                if (!(ls >> a >> b)) throw RunError("tabulated potential '" + p.file + "': expected two numbers per line");
                v.push_back(a);
                dv.push_back(b);
            }
            if (v.size() != cfg.grid.n_q)
                throw RunError("tabulated potential '" + p.file + "' has " + std::to_string(v.size()) +
                               " rows, grid.n_q is " + std::to_string(cfg.grid.n_q));
            return PotentialSpec::tabulated(std::move(v), std::move(dv));
        }
    }
    throw std::logic_error("unhandled potential kind");
}

PhaseGrid build_grid(const GridSection& g) { return make_grid(g.n_q, g.n_p, {g.q_min, g.q_max}, {g.p_min, g.p_max}); }

KvnState load_custom(const InitialSection& init, const PhaseGrid& grid) {
    const auto snap = read_snapshot(init.file);
    KvnState s = state_from_snapshot(snap);
    if (!(s.grid() == grid)) throw RunError("initial.file '" + init.file + "' was written on a different grid");
    return s;
}

// Phase-space Gaussian times exp(i S), S = phase_q q + phase_p p + phase_qp q p.
KvnState gaussian_state(const InitialSection& in, const PhaseGrid& grid) {
    return KvnState::sample(grid, Rep::QP, [&](double q, double p) {
        const double dq = (q - in.q0) / in.width_q;
        const double dp = (p - in.p0) / in.width_p;
        const double s = in.phase_q * q + in.phase_p * p + in.phase_qp * q * p;
        return std::exp(-0.5 * (dq * dq + dp * dp)) * std::polar(1.0, s);
    });
}

// 1-D wave function: Gaussian or cat (Gaussians at q0 +- separation), normalized on the axis.
std::vector<cplx> wave_function(const InitialSection& in, const UniformAxis& ax, double hbar) {
    std::vector<cplx> psi(ax.n);
    auto g = [&](double x, double c) {
        const double d = (x - c) / in.width_q;
        return std::exp(-0.5 * d * d) * std::polar(1.0, in.p0 * x / hbar);
    };
    for (std::size_t k = 0; k < ax.n; ++k) {
        const double x = ax.at(k);
        psi[k] = in.kind == InitialKind::Cat ? g(x, in.q0 - in.separation) + g(x, in.q0 + in.separation) : g(x, in.q0);
    }
    double n2 = 0.0;
    for (const auto& v : psi) n2 += std::norm(v);
    n2 *= ax.step();
    if (!(n2 > 0.0)) throw RunError("initial wave function vanishes on the grid");
    for (auto& v : psi) v /= std::sqrt(n2);
    return psi;
}

KvnState field_to_state(const WignerField& w) {
    std::vector<cplx> amp(w.values.begin(), w.values.end());
    return KvnState(w.grid, Rep::QP, std::move(amp));
}

double weighted_energy(const KvnState& qp, const std::vector<double>& v, bool squared) {
    const auto& g = qp.grid();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < qp.rows(); ++i)
        for (std::size_t j = 0; j < qp.cols(); ++j) {
            const double w = squared ? std::norm(qp(i, j)) : qp(i, j).real();
            num += w * (0.5 * g.p(j) * g.p(j) + v[i]);
            den += w;
        }
    return den != 0.0 ? num / den : 0.0;
}

class Writer {
public:
    Writer(fs::path dir, const OutputSection& out) : dir_(std::move(dir)), out_(out) {}

    template <typename Values>
    void snapshot(const SnapshotHeader& h, const Values& values) {
        if (!out_.snapshots) return;
        try {
            for (const auto& p : write_snapshot(dir_, h, values)) files_.push_back(p);
        } catch (const std::runtime_error& e) {
            throw RunError(e.what());
        }
    }

    void diagnostics(const std::vector<Row>& rows) {
        if (!out_.diagnostics) return;
        std::string text = "# t\tnorm\tenergy\tmin_density_or_wigner\tresidual\n";
        for (const auto& r : rows)
            text += format_double(r.t) + "\t" + format_double(r.norm) + "\t" + format_double(r.energy) + "\t" +
                    format_double(r.min_value) + "\t" + format_double(r.residual) + "\n";
        const fs::path p = dir_ / "diagnostics.tsv";
        write_text(p, text);
        files_.push_back(p);
    }

    const std::vector<fs::path>& files() const { return files_; }

private:
    fs::path dir_;
    OutputSection out_;
    std::vector<fs::path> files_;
};

struct ModeResult {
    std::vector<Row> rows;
    std::vector<std::string> warnings;
};

Row phase_space_row(double t, const KvnState& s, const std::vector<double>& v, bool wigner, double norm0) {
    const KvnState qp = to_representation(s, Rep::QP);
    Row r;
    r.t = t;
    r.norm = s.norm_squared();
    r.energy = weighted_energy(qp, v, !wigner);
    if (wigner) {
        r.min_value = wigner_from_state(qp).min();
    } else {
        const auto d = density(qp);
        r.min_value = *std::min_element(d.begin(), d.end());
    }
    r.residual = std::abs(r.norm - norm0);
    return r;
}

ModeResult run_phase_space(const ScenarioConfig& cfg, Writer& w, bool hybrid) {
    const PhaseGrid grid = build_grid(cfg.grid);
    const PotentialSpec V = build_potential(cfg.potential, cfg);
    const HybridParams params{cfg.run.hbar, cfg.run.kappa};
    KvnState s0(grid, Rep::QP);
    switch (cfg.initial.kind) {
        case InitialKind::CustomFile: s0 = load_custom(cfg.initial, grid); break;
        case InitialKind::Cat: {
            const auto psi = wave_function(cfg.initial, grid.q_axis(), cfg.run.hbar);
            s0 = field_to_state(wigner_from_density(DensityMatrix::from_pure(grid.q_axis(), psi), params, grid));
            break;
        }
        default: {
            s0 = gaussian_state(cfg.initial, grid);
            if (hybrid) {
                // Read as W: unit integral.
                double total = 0.0;
                for (const auto& a : s0.amp()) total += a.real();
                s0 *= 1.0 / (total * grid.dq() * grid.dp());
            } else {
                s0 *= 1.0 / s0.norm();
            }
        }
    }

    StepperConfig sc;
    sc.dt = cfg.run.dt;
    sc.steps = cfg.run.steps;
    sc.record_every = cfg.run.record_every;
    sc.record_rep = cfg.run.representation;
    const Trajectory traj = hybrid ? hqc_evolve(s0, V, params, sc) : evolve(s0, V, sc);

    ModeResult res;
    if (traj.aliasing_warning)
        res.warnings.push_back("aliasing guard: a phase increment per step exceeds pi on this grid; reduce dt or refine the grid");
    const auto v = V.values_on(grid.q_axis());
    const double norm0 = traj.snapshots.front().state.norm_squared();
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const auto& snap = traj.snapshots[k];
        res.rows.push_back(phase_space_row(snap.time, snap.state, v, hybrid, norm0));
        w.snapshot(header_for(snapshot_name(k), snap.state, snap.time), snap.state.amp());
    }
    return res;
}

ModeResult run_transform(const ScenarioConfig& cfg, Writer& w) {
    const PhaseGrid grid = build_grid(cfg.grid);
    KvnState s0 = cfg.initial.kind == InitialKind::CustomFile ? load_custom(cfg.initial, grid) : gaussian_state(cfg.initial, grid);
    if (cfg.initial.kind != InitialKind::CustomFile) s0 *= 1.0 / s0.norm();
    const KvnState t = to_representation(s0, cfg.run.representation);
    const KvnState back = to_representation(t, s0.rep());
    Row r;
    r.norm = t.norm_squared();
    const auto d = density(t);
    r.min_value = *std::min_element(d.begin(), d.end());
    for (std::size_t k = 0; k < s0.amp().size(); ++k) r.residual = std::max(r.residual, std::abs(back.amp()[k] - s0.amp()[k]));
    r.energy = 0.0;
    if (cfg.potential.kind != PotentialKind::Tabulated || !cfg.potential.file.empty()) {
        const PotentialSpec V = build_potential(cfg.potential, cfg);
        r.energy = weighted_energy(to_representation(s0, Rep::QP), V.values_on(grid.q_axis()), true);
    }
    w.snapshot(header_for(snapshot_name(0), t, 0.0), t.amp());
    return {{r}, {}};
}

ModeResult run_wigner(const ScenarioConfig& cfg, Writer& w) {
    const PhaseGrid grid = build_grid(cfg.grid);
    const PotentialSpec V = build_potential(cfg.potential, cfg);
    const HybridParams params{cfg.run.hbar, cfg.run.kappa};
    const auto psi0 = wave_function(cfg.initial, grid.q_axis(), cfg.run.hbar);
    const auto traj = schrodinger_oracle(grid.q_axis(), psi0, V, cfg.run.hbar, cfg.run.dt, cfg.run.steps, cfg.run.record_every);
    const auto v = V.values_on(grid.q_axis());
    ModeResult res;
    for (std::size_t k = 0; k < traj.psi.size(); ++k) {
        const WignerField wf = wigner_from_density(traj.density(k), params, grid);
        Row r;
        r.t = traj.times[k];
        r.norm = wf.integral();
        r.energy = weighted_energy(field_to_state(wf), v, false);
        r.min_value = wf.min();
        r.residual = wf.max_imag;
        res.rows.push_back(r);
        w.snapshot(header_for_field(snapshot_name(k), grid, r.t), wf.values);
    }
    return res;
}

ModeResult run_em(const ScenarioConfig& cfg, Writer& w) {
    const double k = 2.0 * kPi * static_cast<double>(cfg.initial.mode) / cfg.grid.length;
    const double amp = cfg.initial.amplitude;
    const bool along_x = cfg.initial.polarization == "x";
    // Travelling along +z: E x B points along +z for either polarization.
    const EmState s0 = EmState::from_fields(
        cfg.grid.n_z, cfg.grid.length,
        [&](double z) -> EmState::Vec3 {
            const cplx f = amp * std::cos(k * z);
            return along_x ? EmState::Vec3{f, 0.0, 0.0} : EmState::Vec3{0.0, f, 0.0};
        },
        [&](double z) -> EmState::Vec3 {
            const cplx f = amp * std::cos(k * z);
            return along_x ? EmState::Vec3{0.0, f, 0.0} : EmState::Vec3{-f, 0.0, 0.0};
        });
    const auto traj = em_evolve(s0, cfg.run.dt, cfg.run.steps, cfg.run.record_every);
    ModeResult res;
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const auto& s = traj.snapshots[i];
        const auto d = diagnostics(s);
        Row r;
        r.t = static_cast<double>(i) * traj.record_interval;
        r.norm = s.norm_squared();
        r.energy = d.energy;
        r.min_value = *std::min_element(d.energy_density.begin(), d.energy_density.end());
        r.residual = std::max(d.div_e, d.div_b);
        res.rows.push_back(r);
        std::vector<cplx> flat;
        flat.reserve(6 * s.n_z());
        for (std::size_t c = 0; c < 6; ++c) flat.insert(flat.end(), s.component(c).begin(), s.component(c).end());
        w.snapshot(header_for(snapshot_name(i), s, r.t), flat);
    }
    return res;
}

RunSummary summarize(const std::vector<Row>& rows) {
    RunSummary s;
    s.records = rows.size();
    if (rows.empty()) return s;
    s.final_norm = rows.back().norm;
    s.min_value = rows.front().min_value;
    for (const auto& r : rows) {
        s.norm_drift = std::max(s.norm_drift, std::abs(r.norm - rows.front().norm));
        s.energy_drift = std::max(s.energy_drift, std::abs(r.energy - rows.front().energy));
        s.min_value = std::min(s.min_value, r.min_value);
        s.max_residual = std::max(s.max_residual, r.residual);
    }
    return s;
}

FileRecord record_file(const fs::path& dir, const fs::path& path) {
    return {fs::relative(path, dir).generic_string(), sha256_file(path), fs::file_size(path)};
}

void write_manifest(const fs::path& dir, const RunManifest& m) { write_text(dir / "manifest.json", m.to_json()); }

}  // namespace

std::string_view version() { return KVNSIM_VERSION; }

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunError("cannot read '" + path.string() + "' for hashing");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw RunError("SHA-256 initialisation failed");
    std::vector<char> buf(1 << 16);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string RunManifest::to_json() const {
    json j;
    j["tool"] = tool;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    j["mode"] = mode;
    j["config"] = config;
    j["files"] = json::array();
    for (const auto& f : files) j["files"].push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["summary"] = {{"records", summary.records},       {"final_norm", summary.final_norm},
                    {"norm_drift", summary.norm_drift}, {"energy_drift", summary.energy_drift},
                    {"min_value", summary.min_value},   {"max_residual", summary.max_residual}};
    j["warnings"] = warnings;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunManifest m;
        m.tool = j.at("tool").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.started = j.at("started").get<std::string>();
        m.finished = j.at("finished").get<std::string>();
        m.mode = j.at("mode").get<std::string>();
        m.config = j.at("config").get<std::string>();
        for (const auto& f : j.at("files"))
            m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(), f.at("bytes").get<std::uintmax_t>()});
        const auto& s = j.at("summary");
        m.summary.records = s.at("records").get<std::size_t>();
        m.summary.final_norm = s.at("final_norm").get<double>();
        m.summary.norm_drift = s.at("norm_drift").get<double>();
        m.summary.energy_drift = s.at("energy_drift").get<double>();
        m.summary.min_value = s.at("min_value").get<double>();
        m.summary.max_residual = s.at("max_residual").get<double>();
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        return m;
    } catch (const json::exception& e) {
        throw RunError(std::string("malformed manifest: ") + e.what());
    }
}

RunManifest run_scenario(const ScenarioConfig& cfg, const RunOptions& options) {
    const fs::path dir = options.out_dir.empty() ? fs::path(cfg.output.directory) : options.out_dir;
    RunManifest m;
    m.version = std::string(version());
    m.started = utc_now();
    m.mode = std::string(to_string(cfg.run.mode));
    m.config = to_text(cfg);
    prepare_directory(dir);

    Writer writer(dir, cfg.output);
    ModeResult res;
    const std::string context = std::string(to_string(cfg.run.mode)) + " scenario: ";
    try {
        switch (cfg.run.mode) {
            case RunMode::Kvn: res = run_phase_space(cfg, writer, false); break;
            case RunMode::Hybrid: res = run_phase_space(cfg, writer, true); break;
            case RunMode::Em: res = run_em(cfg, writer); break;
            case RunMode::Transform: res = run_transform(cfg, writer); break;
            case RunMode::Wigner: res = run_wigner(cfg, writer); break;
        }
        writer.diagnostics(res.rows);
    } catch (const RunError& e) {
        throw RunError(context + e.what());
    } catch (const std::exception& e) {
        throw RunError(context + e.what());
    }

    m.summary = summarize(res.rows);
    m.warnings = res.warnings;
    for (const auto& p : writer.files()) m.files.push_back(record_file(dir, p));
    m.finished = utc_now();
    write_manifest(dir, m);
    if (!options.quiet) {
        std::cout << "mode " << m.mode << ": " << m.summary.records << " records, norm drift "
                  << format_double(m.summary.norm_drift) << ", energy drift " << format_double(m.summary.energy_drift)
                  << ", min " << format_double(m.summary.min_value) << ", max residual "
                  << format_double(m.summary.max_residual) << "\n";
        for (const auto& wmsg : m.warnings) std::cout << "warning: " << wmsg << "\n";
        std::cout << "manifest: " << (dir / "manifest.json").string() << "\n";
    }
    return m;
}

}  // namespace kvnsim
