#include "kvnsim/phase_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvnsim {

namespace {

double wrap_to_pi(double x) { return x - 2.0 * kPi * std::round(x / (2.0 * kPi)); }

// d_q d_lambda_p on a QLp state.
KvnState mixed_derivative(const KvnState& s) {
    return spectral_derivative(spectral_derivative(s, Axis::First), Axis::Second);
}

}  // namespace

std::size_t PolarDecomposition::masked_count() const {
    return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

std::vector<double> density(const KvnState& s) {
    std::vector<double> rho(s.amp().size());
    std::transform(s.amp().begin(), s.amp().end(), rho.begin(), [](const cplx& a) { return std::norm(a); });
    return rho;
}

PolarDecomposition polar(const KvnState& s, double phase_floor) {
    if (!(phase_floor > 0.0)) throw std::invalid_argument("polar: phase_floor must be positive");
    PolarDecomposition out;
    out.rows = s.rows();
    out.cols = s.cols();
    out.rho = density(s);
    const auto max_it = std::max_element(out.rho.begin(), out.rho.end());
    const double rho_max = *max_it;
    if (!(rho_max > 0.0)) throw std::invalid_argument("polar: all-zero state");
    const std::size_t peak_row = static_cast<std::size_t>(max_it - out.rho.begin()) / out.cols;

    const std::size_t rows = out.rows;
    const std::size_t cols = out.cols;
    out.phase.assign(rows * cols, 0.0);
    out.mask.assign(rows * cols, 0);
    for (std::size_t k = 0; k < rows * cols; ++k) out.mask[k] = out.rho[k] > phase_floor * rho_max ? 1 : 0;

    // Unwrap down each column.
    for (std::size_t j = 0; j < cols; ++j) {
        bool have_prev = false;
        double prev = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const std::size_t k = i * cols + j;
            if (!out.mask[k]) continue;
            const double raw = std::arg(s.amp()[k]);
            out.phase[k] = have_prev ? prev + wrap_to_pi(raw - prev) : raw;
            prev = out.phase[k];
            have_prev = true;
        }
    }

    // Align each column with its left neighbour, using the shared masked row
    // closest to the density peak.
    for (std::size_t j = 1; j < cols; ++j) {
        std::size_t best = rows;
        std::size_t best_dist = rows + 1;
        for (std::size_t i = 0; i < rows; ++i) {
            if (!out.mask[i * cols + j] || !out.mask[i * cols + j - 1]) continue;
            const std::size_t dist = i > peak_row ? i - peak_row : peak_row - i;
            if (dist < best_dist) {
                best = i;
                best_dist = dist;
            }
        }
        if (best == rows) continue;
        const double diff = out.phase[best * cols + j - 1] - out.phase[best * cols + j];
        const double shift = 2.0 * kPi * std::round(diff / (2.0 * kPi));
        if (shift == 0.0) continue;
        for (std::size_t i = 0; i < rows; ++i)
            if (out.mask[i * cols + j]) out.phase[i * cols + j] += shift;
    }
    return out;
}

std::vector<double> current_qlp(const KvnState& s, double* imag_residue) {
    if (s.rep() != Rep::QLp) throw std::invalid_argument("current_qlp: state must be in the QLp representation");
    KvnState conj_s = s;
    for (auto& a : conj_s.amp()) a = std::conj(a);
    const KvnState d = mixed_derivative(s);
    const KvnState d_conj = mixed_derivative(conj_s);

    std::vector<double> j_field(s.amp().size());
    double residue = 0.0;
    const cplx i_unit(0.0, 1.0);
    for (std::size_t k = 0; k < j_field.size(); ++k) {
        const cplx term = i_unit * (std::conj(s.amp()[k]) * d.amp()[k] - d_conj.amp()[k] * s.amp()[k]);
        j_field[k] = term.real();
        residue = std::max(residue, std::abs(term.imag()));
    }
    if (imag_residue != nullptr) *imag_residue = residue;
    return j_field;
}

ContinuityReport continuity_residual(const Trajectory& traj) {
    const auto& snaps = traj.snapshots;
    if (snaps.size() < 3) throw std::invalid_argument("continuity_residual: need at least 3 snapshots");
    if (!(traj.record_interval != 0.0)) throw std::invalid_argument("continuity_residual: zero recording interval");
    for (const auto& sn : snaps)
        if (sn.state.rep() != Rep::QLp)
            throw std::invalid_argument("continuity_residual: snapshots must be in the QLp representation");

    ContinuityReport report;
    const double h = traj.record_interval;
    for (std::size_t n = 1; n + 1 < snaps.size(); ++n) {
        const auto before = density(snaps[n - 1].state);
        const auto after = density(snaps[n + 1].state);
        const auto current = current_qlp(snaps[n].state);
        double worst = 0.0;
        for (std::size_t k = 0; k < current.size(); ++k)
            worst = std::max(worst, std::abs((after[k] - before[k]) / (2.0 * h) + current[k]));
        report.per_snapshot.push_back(worst);
        report.max = std::max(report.max, worst);
    }
    return report;
}

KvnState superselect(const KvnState& s) {
    KvnState out = s;
    for (auto& a : out.amp()) a = std::abs(a);
    return out;
}

}  // namespace kvnsim
