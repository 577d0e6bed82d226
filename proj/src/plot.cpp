#include "kvnsim/runner.hpp"

#include "kvnsim/em_spinor.hpp"
#include "kvnsim/hybrid.hpp"
#include "kvnsim/phase_diagnostics.hpp"
#include "kvnsim/snapshot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kvnsim {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[32];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RunError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.close();
    if (!out) throw RunError("failed writing '" + path.string() + "'");
}

std::vector<std::string> snapshot_names(const RunManifest& m) {
    std::vector<std::string> names;
    for (const auto& f : m.files) {
        const fs::path p(f.path);
        if (p.extension() == ".hdr" && p.stem().string().rfind("snap_", 0) == 0) names.push_back(p.stem().string());
    }
    std::sort(names.begin(), names.end());
    return names;
}

std::string pick_snapshot(const RunManifest& m, long index, std::size_t& chosen) {
    const auto names = snapshot_names(m);
    if (names.empty()) throw RunError("the run recorded no snapshots");
    const long n = static_cast<long>(names.size());
    const long k = index < 0 ? n + index : index;
    if (k < 0 || k >= n) throw RunError("snapshot index " + std::to_string(index) + " is out of range (" + std::to_string(n) + " recorded)");
    chosen = static_cast<std::size_t>(k);
    return names[chosen];
}

std::string axis_comment(const PhaseGrid& g) {
    return "# q " + std::to_string(g.n_q()) + " " + fmt(g.q(0)) + " " + fmt(g.q(g.n_q() - 1)) + "\n# p " +
           std::to_string(g.n_p()) + " " + fmt(g.p(0)) + " " + fmt(g.p(g.n_p() - 1)) + "\n";
}

std::string matrix_text(const std::string& title, const PhaseGrid& g, double time, const std::vector<double>& v) {
    std::string out = "# " + title + ", rows q, columns p\n# time " + fmt(time) + "\n" + axis_comment(g);
    for (std::size_t i = 0; i < g.n_q(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            if (j) out += ' ';
            out += fmt(v[i * g.n_p() + j]);
        }
        out += '\n';
    }
    return out;
}

struct Emitted {
    std::string text;
    std::vector<std::string> warnings;
};

Emitted snapshot_plot(const RunManifest& m, const fs::path& dir, std::string_view what, const std::string& name) {
    const SnapshotData snap = read_snapshot(dir / name);
    const double t = snap.header.time;
    const bool em = m.mode == "em";
    const bool field = snap.header.dtype == DType::F64;

    if (what == "poynting") {
        if (!em) throw RunError("poynting needs an em run, this run is " + m.mode);
        const EmState s = em_state_from_snapshot(snap);
        const auto d = diagnostics(s);
        std::string out = "# z Sx Sy Sz\n# time " + fmt(t) + "\n";
        for (std::size_t k = 0; k < s.n_z(); ++k)
            out += fmt(s.z(k)) + " " + fmt(d.poynting[k][0]) + " " + fmt(d.poynting[k][1]) + " " + fmt(d.poynting[k][2]) + "\n";
        return {out, {}};
    }
    if (what == "density") {
        if (em) {
            const EmState s = em_state_from_snapshot(snap);
            const auto d = diagnostics(s);
            std::string out = "# z density\n# time " + fmt(t) + "\n";
            for (std::size_t k = 0; k < s.n_z(); ++k) out += fmt(s.z(k)) + " " + fmt(d.energy_density[k]) + "\n";
            return {out, {}};
        }
        if (field) throw RunError("density needs a complex state snapshot, this run stores real Wigner fields");
        const KvnState qp = to_representation(state_from_snapshot(snap), Rep::QP);
        return {matrix_text("density |psi|^2", qp.grid(), t, density(qp)), {}};
    }
    if (what == "wigner") {
        if (m.mode == "wigner") return {matrix_text("wigner", grid_from_snapshot(snap.header), t, snap.real), {}};
        if (m.mode != "hybrid") throw RunError("wigner needs a hybrid or wigner run, this run is " + m.mode);
        const KvnState qp = to_representation(state_from_snapshot(snap), Rep::QP);
        return {matrix_text("wigner", qp.grid(), t, wigner_from_state(qp).values), {}};
    }
    // phase
    if (em || field) throw RunError("phase needs a complex phase-space state, this run is " + m.mode);
    const KvnState qp = to_representation(state_from_snapshot(snap), Rep::QP);
    std::string out = "# q p phase\n# time " + fmt(t) + "\n";
    bool any = false;
    for (const auto& a : qp.amp()) any = any || a != cplx{};
    if (!any) return {out, {"phase: " + name + " is identically zero, no points pass the amplitude mask"}};
    const auto pd = polar(qp);
    for (std::size_t i = 0; i < pd.rows; ++i)
        for (std::size_t j = 0; j < pd.cols; ++j)
            if (pd.mask[i * pd.cols + j]) out += fmt(qp.grid().q(i)) + " " + fmt(qp.grid().p(j)) + " " + fmt(pd.phase[i * pd.cols + j]) + "\n";
    std::vector<std::string> warnings;
    if (pd.masked_count() == 0) warnings.push_back("phase: no points of " + name + " pass the amplitude mask");
    return {out, warnings};
}

Emitted timeseries_plot(const RunManifest& m, const fs::path& dir, std::string_view what) {
    const bool wmin = what == "wigner_min_timeseries";
    if (wmin && m.mode != "hybrid" && m.mode != "wigner")
        throw RunError("wigner_min_timeseries needs a hybrid or wigner run, this run is " + m.mode);
    const fs::path tsv = dir / "diagnostics.tsv";
    if (!fs::exists(tsv)) throw RunError("the run wrote no diagnostics.tsv");
    std::istringstream in(read_all(tsv));
    std::string out = wmin ? "# t min_wigner\n" : "# t energy\n";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string t, norm, energy, min_value;
        if (!(ls >> t >> norm >> energy >> min_value)) throw RunError("malformed diagnostics line '" + line + "'");
        out += t + " " + (wmin ? min_value : energy) + "\n";
    }
    return {out, {}};
}

}  // namespace

fs::path emit_plot_data(const fs::path& manifest_path, std::string_view what, long index) {
    if (std::find(std::begin(kPlotSelectors), std::end(kPlotSelectors), what) == std::end(kPlotSelectors)) {
        std::string known;
        for (auto s : kPlotSelectors) known += (known.empty() ? "" : ", ") + std::string(s);
        throw ConfigError({"unknown plot selector '" + std::string(what) + "' (expected one of " + known + ")"});
    }
    RunManifest m = RunManifest::from_json(read_all(manifest_path));
    const fs::path dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();

    const bool series = what.ends_with("_timeseries");
    Emitted e;
    std::string file = "plot_" + std::string(what);
    try {
        if (series) {
            e = timeseries_plot(m, dir, what);
        } else {
            std::size_t chosen = 0;
            const std::string name = pick_snapshot(m, index, chosen);
            e = snapshot_plot(m, dir, what, name);
            char buf[32];
            std::snprintf(buf, sizeof buf, "_%05zu", chosen);
            file += buf;
        }
    } catch (const RunError&) {
        throw;
    } catch (const std::exception& ex) {
        throw RunError(std::string(what) + ": " + ex.what());
    }
    const fs::path out = dir / (file + ".dat");
    write_all(out, e.text);

    const FileRecord rec{out.filename().generic_string(), sha256_file(out), fs::file_size(out)};
    auto it = std::find_if(m.files.begin(), m.files.end(), [&](const FileRecord& f) { return f.path == rec.path; });
    if (it != m.files.end())
        *it = rec;
    else
        m.files.push_back(rec);
    for (const auto& w : e.warnings)
        if (std::find(m.warnings.begin(), m.warnings.end(), w) == m.warnings.end()) m.warnings.push_back(w);
    write_all(manifest_path, m.to_json());
    return out;
}

}  // namespace kvnsim
