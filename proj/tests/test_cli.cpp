#include "doctest.h"

#include "kvnsim/config.hpp"
#include "kvnsim/em_spinor.hpp"
#include "kvnsim/kvn_propagator.hpp"
#include "kvnsim/parallel.hpp"
#include "kvnsim/runner.hpp"
#include "kvnsim/snapshot_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace kvnsim;
namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little, "raw snapshot reader below assumes a little-endian host");

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kvnsim_cli_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Hash via the system tool, independent of the library's OpenSSL path.
std::string system_sha256(const fs::path& p) {
    const std::string cmd = "sha256sum '" + p.string() + "'";
    FILE* f = ::popen(cmd.c_str(), "r");
    REQUIRE(f != nullptr);
    char buf[65] = {};
    const std::size_t n = std::fread(buf, 1, 64, f);
    ::pclose(f);
    return std::string(buf, n);
}

// Raw c128 reader: reinterprets the file bytes directly.
std::vector<cplx> raw_complex(const fs::path& bin) {
    const std::string bytes = slurp(bin);
    std::vector<cplx> v(bytes.size() / sizeof(cplx));
    std::memcpy(v.data(), bytes.data(), v.size() * sizeof(cplx));
    return v;
}

std::vector<std::vector<double>> table(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> row;
        for (double x; ls >> x;) row.push_back(x);
        rows.push_back(row);
    }
    return rows;
}

const char* kHarmonicKvn = R"(# harmonic oscillator
[grid]
n_q = 64
n_p = 64
q_min = -8
q_max = 8
p_min = -8
p_max = 8

[potential]
kind = harmonic
omega = 1

[initial]
kind = gaussian
q0 = 1.5
p0 = 0
width_q = 0.7
width_p = 0.7

[run]
mode = kvn
dt = 0.01
steps = 1000
record_every = 250
)";

const char* kPlaneWave = R"([grid]
n_z = 64
length = 6.283185307179586

[initial]
kind = plane_wave_em
mode = 3
amplitude = 1.5
polarization = y

[run]
mode = em
dt = 0.001
steps = 10000
record_every = 2500
)";

std::string with_dir(std::string text, const fs::path& dir) {
    return text + "\n[output]\ndirectory = " + dir.string() + "\n";
}

std::vector<std::string> errors_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.errors();
    }
    return {};
}

bool mentions(const std::vector<std::string>& errors, const std::string& needle) {
    for (const auto& e : errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("minimal kvn config fills documented defaults") {
    const auto c = parse_config(
        "[grid]\nn_q=32\nn_p=32\nq_min=-4\nq_max=4\np_min=-4\np_max=4\n"
        "[potential]\nkind=free\n[initial]\nkind=gaussian\n[run]\nmode=kvn\n");
    CHECK(c.run.dt == 1e-3);
    CHECK(c.run.steps == 1000);
    CHECK(c.run.record_every == 100);
    CHECK(c.run.kappa == 1.0);
    CHECK(c.run.hbar == 1.0);
    CHECK(c.run.representation == Rep::QP);
    CHECK(c.initial.width_q == 1.0);
    CHECK(c.initial.width_p == 1.0);
    CHECK(c.initial.q0 == 0.0);
    CHECK(c.output.directory == "out");
    CHECK(c.output.diagnostics);
    CHECK(c.output.snapshots);
}

TEST_CASE("kappa outside [0, 1] names the field and the bound") {
    const auto errs = errors_of(std::string(kHarmonicKvn) + "kappa = 1.5\n");
    REQUIRE(errs.size() == 1);
    CHECK(mentions(errs, "run.kappa"));
    CHECK(mentions(errs, "[0, 1]"));
}

TEST_CASE("duplicate key reports both lines") {
    const auto errs = errors_of("[run]\nmode = kvn\ndt = 0.1\ndt = 0.2\n");
    CHECK(mentions(errs, "line 4: duplicate key 'run.dt' (first set on line 3)"));
}

TEST_CASE("all errors are collected, not just the first") {
    const auto errs = errors_of(
        "[grid]\nn_q = many\nn_p = 32\nq_min=-4\nq_max=4\np_min=-4\n"
        "[potential]\nkind = harmonic\nomgea = 2\n[run]\nmode = kvn\nsteps = -3\n[mystery]\nx = 1\n");
    CHECK(mentions(errs, "grid.n_q"));
    CHECK(mentions(errs, "omgea"));
    CHECK(mentions(errs, "run.steps"));
    CHECK(mentions(errs, "mystery"));
    CHECK(mentions(errs, "missing required key 'grid.p_max'"));
    CHECK(mentions(errs, "missing required key 'initial.kind'"));
    CHECK(errs.size() >= 6);
}

TEST_CASE("mode-specific validation") {
    // Plane waves belong to em mode only.
    CHECK(mentions(errors_of("[grid]\nn_q=8\nn_p=8\nq_min=-1\nq_max=1\np_min=-1\np_max=1\n[potential]\nkind=free\n"
                             "[initial]\nkind=plane_wave_em\n[run]\nmode=kvn\n"),
                   "not available in kvn mode"));
    // Mode number must sit below Nyquist.
    CHECK(mentions(errors_of("[grid]\nn_z=16\nlength=1\n[initial]\nkind=plane_wave_em\nmode=8\n[run]\nmode=em\n"),
                   "initial.mode"));
    CHECK(mentions(errors_of("[grid]\nn_z=16\nlength=1\n[initial]\nkind=plane_wave_em\npolarization=z\n[run]\nmode=em\n"),
                   "polarization"));
    CHECK(errors_of("[grid]\nn_z=16\nlength=1\n[initial]\nkind=plane_wave_em\n[run]\nmode=em\n").empty());
}

TEST_CASE("config echo re-parses to an equal config") {
    for (const char* text : {kHarmonicKvn, kPlaneWave}) {
        const auto c = parse_config(text);
        CHECK(parse_config(to_text(c)) == c);
    }
    auto c = parse_config(kHarmonicKvn);
    c.run.dt = 0.1 + 0.2;  // not representable in a short decimal
    c.initial.q0 = -1.0 / 3.0;
    c.output.snapshots = false;
    CHECK(parse_config(to_text(c)) == c);
}

TEST_CASE("harmonic kvn run: manifest, diagnostics and norm drift") {
    const fs::path dir = scratch("kvn");
    const auto cfg = parse_config(with_dir(kHarmonicKvn, dir));
    const RunManifest m = run_scenario(cfg);

    CHECK(m.summary.records == 5);
    CHECK(m.summary.norm_drift <= 1e-10);
    CHECK(std::abs(m.summary.final_norm - 1.0) <= 1e-10);
    CHECK(parse_config(m.config) == cfg);

    // Independent look at the diagnostics file.
    const auto rows = table(dir / "diagnostics.tsv");
    REQUIRE(rows.size() == 5);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        REQUIRE(rows[k].size() == 5);
        CHECK(rows[k][0] == doctest::Approx(2.5 * static_cast<double>(k)).epsilon(1e-12));
        CHECK(std::abs(rows[k][1] - rows[0][1]) <= 1e-10);
        // Harmonic energy is conserved up to the O(dt^2) splitting error.
        CHECK(std::abs(rows[k][2] - rows[0][2]) <= 1e-4);
        CHECK(rows[k][3] >= 0.0);
    }
    CHECK(slurp(dir / "diagnostics.tsv").rfind("# t\tnorm\tenergy\tmin_density_or_wigner\tresidual\n", 0) == 0);

    // Every emitted file is listed and its checksum verifies.
    std::size_t listed = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().filename() == "manifest.json") continue;
        ++listed;
        const auto name = entry.path().filename().string();
        auto it = std::find_if(m.files.begin(), m.files.end(), [&](const FileRecord& f) { return f.path == name; });
        REQUIRE_MESSAGE(it != m.files.end(), name);
        CHECK(it->sha256 == system_sha256(entry.path()));
        CHECK(it->bytes == fs::file_size(entry.path()));
    }
    CHECK(listed == m.files.size());
    CHECK(listed == 11);

    // The manifest on disk parses with a generic JSON reader and matches.
    const auto j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j.at("tool") == "kvnsim");
    CHECK(j.at("version") == std::string(version()));
    CHECK(j.at("files").size() == m.files.size());
    CHECK(RunManifest::from_json(slurp(dir / "manifest.json")).to_json() == m.to_json());
    fs::remove_all(dir);
}

TEST_CASE("snapshots round-trip bit-exactly against the in-memory trajectory") {
    const fs::path dir = scratch("roundtrip");
    auto cfg = parse_config(with_dir(kHarmonicKvn, dir));
    cfg.run.steps = 200;
    cfg.run.record_every = 100;
    cfg.run.representation = Rep::QLp;
    run_scenario(cfg);

    const PhaseGrid grid = make_grid(64, 64, {-8, 8}, {-8, 8});
    KvnState s0 = KvnState::sample(grid, Rep::QP, [](double q, double p) {
        const double dq = (q - 1.5) / 0.7, dp = p / 0.7;
        return cplx(std::exp(-0.5 * (dq * dq + dp * dp)));
    });
    s0 *= 1.0 / s0.norm();
    StepperConfig sc{0.01, 200, 100, Rep::QLp};
    const auto traj = evolve(s0, PotentialSpec::harmonic(1.0), sc);
    REQUIRE(traj.snapshots.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%05zu", k);
        const auto raw = raw_complex(dir / (std::string(name) + ".bin"));
        const auto& mem = traj.snapshots[k].state.amp();
        REQUIRE(raw.size() == mem.size());
        CHECK(std::memcmp(raw.data(), mem.data(), raw.size() * sizeof(cplx)) == 0);

        const auto snap = read_snapshot(dir / name);
        CHECK(snap.header.representation == "QLp");
        CHECK(snap.header.axes == std::vector<std::string>{"q", "lambda_p"});
        CHECK(snap.header.shape == std::vector<std::size_t>{64, 64});
        const KvnState back = state_from_snapshot(snap);
        CHECK(back.grid() == grid);
        CHECK(std::memcmp(back.amp().data(), mem.data(), raw.size() * sizeof(cplx)) == 0);
        CHECK(slurp(dir / (std::string(name) + ".hdr")).find("endianness little\n") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("header and array write/read round trip, including errors") {
    const fs::path dir = scratch("snapio");
    fs::create_directories(dir);
    SnapshotHeader h;
    h.name = "field";
    h.dtype = DType::F64;
    h.shape = {2, 3};
    h.axes = {"q", "p"};
    h.representation = "QP";
    h.time = 0.1 + 0.2;
    h.ranges = {{"q", UniformAxis{2, -1.0, 1.0}}, {"p", UniformAxis{3, -0.5, 2.0 / 3.0}}};
    const std::vector<double> v{1.0, -0.0, 1e-300, std::nextafter(1.0, 2.0), -7.25, 3.0e300};
    write_snapshot(dir, h, std::span<const double>(v));
    const auto back = read_snapshot(dir / "field.bin");
    CHECK(back.header == h);
    CHECK(std::memcmp(back.real.data(), v.data(), v.size() * sizeof(double)) == 0);

    CHECK_THROWS_AS(write_snapshot(dir, h, std::span<const double>(v.data(), 5)), std::invalid_argument);
    std::ofstream(dir / "field.bin", std::ios::binary | std::ios::trunc) << "short";
    CHECK_THROWS_AS(read_snapshot(dir / "field"), std::runtime_error);
    CHECK_THROWS_AS(read_snapshot(dir / "absent"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("em plane-wave run keeps energy within 1e-12") {
    const fs::path dir = scratch("em");
    const auto m = run_scenario(parse_config(with_dir(kPlaneWave, dir)));
    CHECK(m.summary.records == 5);
    CHECK(m.summary.energy_drift <= 1e-12);
    CHECK(m.summary.norm_drift <= 1e-12);
    CHECK(m.summary.max_residual <= 1e-12);
    // Energy of E_y = B_x = A cos(kz) over one box: A^2 L.
    const auto rows = table(dir / "diagnostics.tsv");
    CHECK(rows[0][2] == doctest::Approx(1.5 * 1.5 * 2.0 * kPi).epsilon(1e-12));

    // Plane wave travels along +z: Sz = 2 A^2 cos^2(kz) > 0 at t = 0.
    const auto p = emit_plot_data(dir / "manifest.json", "poynting", 0);
    const auto s = table(p);
    REQUIRE(s.size() == 64);
    for (const auto& row : s) {
        const double c = std::cos(3.0 * row[0]);
        CHECK(row[3] == doctest::Approx(2.0 * 1.5 * 1.5 * c * c).epsilon(1e-12));
        CHECK(std::abs(row[1]) + std::abs(row[2]) <= 1e-12);
    }
    fs::remove_all(dir);
}

TEST_CASE("unwritable output directory fails cleanly without a manifest") {
    const fs::path base = scratch("blocked");
    fs::create_directories(base);
    std::ofstream(base / "file") << "x";
    const auto cfg = parse_config(with_dir(kHarmonicKvn, base / "file" / "out"));
    CHECK_THROWS_AS(run_scenario(cfg), RunError);
    CHECK(!fs::exists(base / "file" / "out" / "manifest.json"));
    fs::remove_all(base);
}

TEST_CASE("a failing run removes the stale manifest of an earlier run") {
    const fs::path dir = scratch("stale");
    auto cfg = parse_config(with_dir(kHarmonicKvn, dir));
    cfg.run.steps = 10;
    cfg.run.record_every = 10;
    run_scenario(cfg);
    REQUIRE(fs::exists(dir / "manifest.json"));
    cfg.initial.kind = InitialKind::CustomFile;
    cfg.initial.file = (dir / "missing").string();
    try {
        run_scenario(cfg);
        FAIL("expected RunError");
    } catch (const RunError& e) {
        CHECK(std::string(e.what()).rfind("kvn scenario: ", 0) == 0);
    }
    CHECK(!fs::exists(dir / "manifest.json"));
    fs::remove_all(dir);
}

TEST_CASE("identical configs give byte-identical outputs") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    auto cfg = parse_config(kHarmonicKvn);
    cfg.run.steps = 300;
    cfg.run.record_every = 100;
    run_scenario(cfg, {a});
    run_scenario(cfg, {b});
    for (const auto* f : {"diagnostics.tsv", "snap_00000.bin", "snap_00003.bin", "snap_00003.hdr"})
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("thread count does not change the result") {
    const fs::path a = scratch("thr_a"), b = scratch("thr_b");
    auto cfg = parse_config(kHarmonicKvn);
    cfg.run.steps = 200;
    cfg.run.record_every = 200;
    const auto saved = thread_count();
    set_thread_count(1);
    run_scenario(cfg, {a});
    set_thread_count(4);
    run_scenario(cfg, {b});
    set_thread_count(saved);
    const auto x = raw_complex(a / "snap_00001.bin"), y = raw_complex(b / "snap_00001.bin");
    REQUIRE(x.size() == y.size());
    double diff = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) diff = std::max(diff, std::abs(x[k] - y[k]));
    CHECK(diff <= 1e-13);
    CHECK(slurp(a / "diagnostics.tsv") == slurp(b / "diagnostics.tsv"));
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("transform mode round trip residual") {
    const fs::path dir = scratch("transform");
    auto cfg = parse_config(with_dir(kHarmonicKvn, dir));
    cfg.run.mode = RunMode::Transform;
    cfg.run.representation = Rep::LqLp;
    const auto m = run_scenario(cfg);
    CHECK(m.summary.records == 1);
    CHECK(m.summary.max_residual <= 1e-12);
    CHECK(std::abs(m.summary.final_norm - 1.0) <= 1e-12);
    CHECK(read_snapshot(dir / "snap_00000").header.representation == "LqLp");
    fs::remove_all(dir);
}

TEST_CASE("hybrid and wigner modes") {
    const fs::path h = scratch("hybrid"), w = scratch("wigner");
    auto cfg = parse_config(kHarmonicKvn);
    cfg.run.mode = RunMode::Hybrid;
    cfg.run.steps = 100;
    cfg.run.record_every = 50;
    cfg.initial.width_q = cfg.initial.width_p = 1.0 / std::sqrt(2.0);
    const auto mh = run_scenario(cfg, {h});
    // W of a coherent state: unit integral, non-negative, conserved under harmonic flow.
    const auto rows = table(h / "diagnostics.tsv");
    REQUIRE(rows.size() == 3);
    CHECK(mh.summary.norm_drift <= 1e-10);
    CHECK(mh.summary.min_value >= -1e-10);
    CHECK(rows[0][2] == doctest::Approx(0.5 * 1.5 * 1.5 + 0.5).epsilon(1e-6));

    cfg.run.mode = RunMode::Wigner;
    cfg.initial.kind = InitialKind::Cat;
    cfg.initial.q0 = 0.0;
    cfg.initial.width_q = 1.0;
    cfg.grid.p_min = -6;
    cfg.grid.p_max = 6;
    const auto mw = run_scenario(cfg, {w});
    CHECK(mw.summary.min_value < -0.05);  // interference fringes
    CHECK(mw.summary.max_residual <= 1e-12);
    const auto wt = table(w / "diagnostics.tsv");
    for (const auto& r : wt) CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-6));
    const auto series = table(emit_plot_data(w / "manifest.json", "wigner_min_timeseries"));
    REQUIRE(series.size() == wt.size());
    for (std::size_t k = 0; k < wt.size(); ++k) {
        CHECK(series[k].size() == 2);
        CHECK(series[k][0] == wt[k][0]);
        CHECK(series[k][1] == wt[k][3]);
    }
    const auto wm = table(emit_plot_data(w / "manifest.json", "wigner", 1));
    CHECK(wm.size() == 64);
    CHECK(wm[0].size() == 64);
    fs::remove_all(h);
    fs::remove_all(w);
}

TEST_CASE("plot selectors") {
    const fs::path dir = scratch("plot");
    auto cfg = parse_config(with_dir(kHarmonicKvn, dir));
    cfg.run.steps = 20;
    cfg.run.record_every = 10;
    run_scenario(cfg);
    const fs::path manifest = dir / "manifest.json";

    const auto d = emit_plot_data(manifest, "density", 0);
    CHECK(d.filename() == "plot_density_00000.dat");
    const auto mat = table(d);
    REQUIRE(mat.size() == 64);
    for (const auto& row : mat) CHECK(row.size() == 64);
    const auto snap = state_from_snapshot(read_snapshot(dir / "snap_00000"));
    CHECK(mat[20][33] == std::norm(snap(20, 33)));

    const auto e = table(emit_plot_data(manifest, "energy_timeseries"));
    CHECK(e.size() == 3);

    const auto ph = table(emit_plot_data(manifest, "phase"));
    CHECK(!ph.empty());
    for (const auto& row : ph) CHECK(row.size() == 3);

    CHECK_THROWS_AS(emit_plot_data(manifest, "spectrum"), ConfigError);
    CHECK_THROWS_AS(emit_plot_data(manifest, "poynting"), RunError);
    CHECK_THROWS_AS(emit_plot_data(manifest, "wigner_min_timeseries"), RunError);
    CHECK_THROWS_AS(emit_plot_data(manifest, "density", 7), RunError);

    // Plot files are added to the manifest and their checksums verify.
    const auto m = RunManifest::from_json(slurp(manifest));
    for (const auto* f : {"plot_density_00000.dat", "plot_energy_timeseries.dat", "plot_phase_00002.dat"}) {
        auto it = std::find_if(m.files.begin(), m.files.end(), [&](const FileRecord& r) { return r.path == f; });
        REQUIRE_MESSAGE(it != m.files.end(), f);
        CHECK(it->sha256 == system_sha256(dir / f));
    }
    fs::remove_all(dir);
}

TEST_CASE("phase plot of an all-zero state: empty data and a manifest warning") {
    const fs::path dir = scratch("zero");
    fs::create_directories(dir);
    const PhaseGrid grid = make_grid(16, 16, {-2, 2}, {-2, 2});
    const KvnState zero(grid, Rep::QP);
    write_snapshot(dir, header_for("zero", zero, 0.0), zero.amp());

    const fs::path out = dir / "run";
    const auto cfg = parse_config(with_dir(
        "[grid]\nn_q=16\nn_p=16\nq_min=-2\nq_max=2\np_min=-2\np_max=2\n[potential]\nkind=free\n"
        "[initial]\nkind=custom_file\nfile=" + (dir / "zero.hdr").string() + "\n[run]\nmode=kvn\nsteps=2\nrecord_every=1\n",
        out));
    run_scenario(cfg);
    const auto p = emit_plot_data(out / "manifest.json", "phase");
    CHECK(table(p).empty());
    const auto m = RunManifest::from_json(slurp(out / "manifest.json"));
    REQUIRE(m.warnings.size() == 1);
    CHECK(m.warnings[0].find("phase") != std::string::npos);

    // A custom file on a different grid is refused.
    auto other = cfg;
    other.grid.n_q = 32;
    CHECK_THROWS_AS(run_scenario(other, {dir / "run2"}), RunError);
    fs::remove_all(dir);
}
