#include "kvnsim/em_spinor.hpp"

#include "fft.hpp"
#include "kvnsim/errors.hpp"
#include "kvnsim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvnsim {

using detail::FftSign;

namespace {

Matrix6 zero_matrix() {
    Matrix6 m{};
    for (auto& row : m) row.fill(0);
    return m;
}

// Sets 1-indexed entries, the way the matrices are usually written down.
void put(Matrix6& m, int row, int col, int v) { m[row - 1][col - 1] = v; }

void require_valid(const EmState& s, const char* where) {
    if (!s.is_finite()) throw NumericalError(std::string(where) + ": non-finite field value");
}

// d/dz of one periodic component, spectral, Nyquist bin dropped.
std::vector<cplx> ddz(std::span<const cplx> f, double length) {
    const std::size_t n = f.size();
    std::vector<cplx> work(f.begin(), f.end());
    detail::dft_inplace(work.data(), n, FftSign::Forward);
    for (std::size_t j = 0; j < n; ++j) work[j] *= cplx(0.0, em_wavenumber(j, n, length) / static_cast<double>(n));
    detail::dft_inplace(work.data(), n, FftSign::Backward);
    return work;
}

using Fields = std::array<std::vector<cplx>, 6>;

// Right-hand side of dE/dt = curl B, dB/dt = -curl E restricted to d_x = d_y = 0,
// written on the (E, B) components directly. Layout: 0..2 = E, 3..5 = B.
Fields maxwell_rhs(const Fields& eb, double length) {
    const std::size_t n = eb[0].size();
    const auto dex = ddz(eb[0], length);
    const auto dey = ddz(eb[1], length);
    const auto dbx = ddz(eb[3], length);
    const auto dby = ddz(eb[4], length);
    Fields out;
    for (auto& v : out) v.assign(n, cplx{});
    for (std::size_t k = 0; k < n; ++k) {
        out[0][k] = -dby[k];  // (curl B)_x = -d_z B_y
        out[1][k] = dbx[k];   // (curl B)_y =  d_z B_x
        out[3][k] = dey[k];   // -(curl E)_x = d_z E_y
        out[4][k] = -dex[k];  // -(curl E)_y = -d_z E_x
    }
    return out;
}

Fields axpy(const Fields& x, const Fields& y, double a) {
    Fields out = x;
    for (std::size_t c = 0; c < 6; ++c)
        for (std::size_t k = 0; k < out[c].size(); ++k) out[c][k] += a * y[c][k];
    return out;
}

struct Pair {
    std::size_t a;
    std::size_t b;
    double sigma;
};

std::vector<Pair> coupled_pairs(const Matrix6& m) {
    std::vector<Pair> out;
    for (std::size_t r = 0; r < 6; ++r)
        for (std::size_t c = r + 1; c < 6; ++c)
            if (m[r][c] != 0) {
                if (m[c][r] != m[r][c]) throw std::logic_error("em_step: beta_z is not symmetric");
                out.push_back({r, c, static_cast<double>(m[r][c])});
            }
    return out;
}

}  // namespace

BetaMatrices beta_matrices() {
    BetaMatrices b;
    Matrix6 bx = zero_matrix();
    put(bx, 2, 6, -1);
    put(bx, 3, 5, 1);
    put(bx, 5, 3, 1);
    put(bx, 6, 2, -1);
    Matrix6 by = zero_matrix();
    put(by, 1, 6, 1);
    put(by, 3, 4, -1);
    put(by, 4, 3, -1);
    put(by, 6, 1, 1);
    Matrix6 bz = zero_matrix();
    put(bz, 1, 5, -1);
    put(bz, 2, 4, 1);
    put(bz, 4, 2, 1);
    put(bz, 5, 1, -1);
    b.beta = {bx, by, bz};
    return b;
}

Matrix6 transpose(const Matrix6& m) {
    Matrix6 t{};
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) t[j][i] = m[i][j];
    return t;
}

Matrix6 multiply(const Matrix6& a, const Matrix6& b) {
    Matrix6 c = zero_matrix();
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t k = 0; k < 6; ++k)
            for (std::size_t j = 0; j < 6; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

Matrix6 scaled(const Matrix6& m, int s) {
    Matrix6 out = m;
    for (auto& row : out)
        for (auto& v : row) v *= s;
    return out;
}

Matrix6 commutator(const Matrix6& a, const Matrix6& b) {
    Matrix6 ab = multiply(a, b);
    const Matrix6 ba = multiply(b, a);
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) ab[i][j] -= ba[i][j];
    return ab;
}

bool is_symmetric(const Matrix6& m) { return transpose(m) == m; }

bool is_antisymmetric(const Matrix6& m) { return transpose(m) == scaled(m, -1); }

int levi_civita(std::size_t i, std::size_t j, std::size_t k) {
    if (i > 2 || j > 2 || k > 2) throw std::out_of_range("levi_civita index");
    if (i == j || j == k || i == k) return 0;
    // Even permutations of (0,1,2) are the cyclic shifts.
    return (j == (i + 1) % 3) ? 1 : -1;
}

std::optional<int> closure_sign(const std::array<Matrix6, 3>& g, const std::array<Matrix6, 3>& t) {
    for (int s : {1, -1}) {
        bool ok = true;
        for (std::size_t i = 0; i < 3 && ok; ++i) {
            for (std::size_t j = 0; j < 3 && ok; ++j) {
                Matrix6 expected = zero_matrix();
                for (std::size_t k = 0; k < 3; ++k) {
                    const int e = s * levi_civita(i, j, k);
                    if (e == 0) continue;
                    const Matrix6 term = scaled(t[k], e);
                    for (std::size_t r = 0; r < 6; ++r)
                        for (std::size_t c = 0; c < 6; ++c) expected[r][c] += term[r][c];
                }
                ok = commutator(g[i], g[j]) == expected;
            }
        }
        if (ok) return s;
    }
    return std::nullopt;
}

std::array<Matrix6, 3> rotation_generators() {
    std::array<Matrix6, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        Matrix6 m = zero_matrix();
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                const int v = -levi_civita(k, i, j);
                m[i][j] = v;
                m[i + 3][j + 3] = v;
            }
        out[k] = m;
    }
    return out;
}

EmState::EmState(std::size_t n_z, double length) : n_z_(n_z), length_(length) {
    if (n_z < 4 || n_z % 2 != 0) throw std::invalid_argument("EmState: n_z must be even and >= 4");
    if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("EmState: length must be positive");
    for (auto& c : comp_) c.assign(n_z, cplx{});
}

EmState EmState::from_fields(std::size_t n_z, double length, const std::function<Vec3(double)>& e_field,
                             const std::function<Vec3(double)>& b_field) {
    EmState s(n_z, length);
    for (std::size_t k = 0; k < n_z; ++k) {
        const Vec3 e = e_field(s.z(k));
        const Vec3 b = b_field(s.z(k));
        for (std::size_t a = 0; a < 3; ++a) {
            s.comp_[a][k] = e[a];
            s.comp_[3 + a][k] = -b[a];
        }
    }
    return s;
}

double EmState::norm_squared() const {
    double acc = 0.0;
    for (const auto& c : comp_)
        for (const auto& v : c) acc += std::norm(v);
    return acc * dz();
}

bool EmState::is_finite() const {
    for (const auto& c : comp_)
        for (const auto& v : c)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

double em_wavenumber(std::size_t j, std::size_t n_z, double length) {
    if (2 * j == n_z) return 0.0;
    const double m = j < n_z / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n_z);
    return 2.0 * kPi * m / length;
}

EmState em_step(const EmState& s, double dt) {
    if (!std::isfinite(dt)) throw std::invalid_argument("em_step: dt must be finite");
    require_valid(s, "em_step");
    const std::size_t n = s.n_z();
    // The round trip runs in long double: in double its rounding has a small
    // bias that grows the norm linearly with the step count.
    using ext = detail::cplx_ext;
    std::array<std::vector<ext>, 6> hat;
    for (std::size_t c = 0; c < 6; ++c) {
        const auto comp = s.component(c);
        hat[c].assign(comp.begin(), comp.end());
        detail::dft_inplace(hat[c].data(), n, FftSign::Forward);
    }

    // beta_z couples components in pairs (a, b) with beta_ab = beta_ba = sigma
    // and annihilates the rest, so on each pair beta_z^2 = 1 and
    //   exp(-i theta beta_z) = cos(theta) - i sigma sin(theta) [[0,1],[1,0]].
    const auto pairs = coupled_pairs(beta_matrices()[2]);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const long double theta = static_cast<long double>(em_wavenumber(j, n, s.length())) * dt;
            const long double c = std::cos(theta);
            const long double sn = std::sin(theta);
            for (const auto& pr : pairs) {
                const ext a = hat[pr.a][j];
                const ext b = hat[pr.b][j];
                const ext mix(0.0L, -static_cast<long double>(pr.sigma) * sn);
                hat[pr.a][j] = c * a + mix * b;
                hat[pr.b][j] = mix * a + c * b;
            }
        }
    });

    EmState out(n, s.length());
    const long double inv_n = 1.0L / static_cast<long double>(n);
    for (std::size_t c = 0; c < 6; ++c) {
        detail::dft_inplace(hat[c].data(), n, FftSign::Backward);
        for (std::size_t k = 0; k < n; ++k) {
            const ext v = hat[c][k] * inv_n;
            out.psi(c, k) = cplx(static_cast<double>(v.real()), static_cast<double>(v.imag()));
        }
    }
    require_valid(out, "em_step");
    return out;
}

EmState maxwell_fd_oracle(const EmState& s, double dt, std::size_t steps) {
    if (!std::isfinite(dt)) throw std::invalid_argument("maxwell_fd_oracle: dt must be finite");
    require_valid(s, "maxwell_fd_oracle");
    const std::size_t n = s.n_z();
    Fields eb;
    for (std::size_t a = 0; a < 3; ++a) {
        eb[a].resize(n);
        eb[3 + a].resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            eb[a][k] = s.E(a, k);
            eb[3 + a][k] = s.B(a, k);
        }
    }
    for (std::size_t step = 0; step < steps; ++step) {
        const Fields k1 = maxwell_rhs(eb, s.length());
        const Fields k2 = maxwell_rhs(axpy(eb, k1, 0.5 * dt), s.length());
        const Fields k3 = maxwell_rhs(axpy(eb, k2, 0.5 * dt), s.length());
        const Fields k4 = maxwell_rhs(axpy(eb, k3, dt), s.length());
        for (std::size_t c = 0; c < 6; ++c)
            for (std::size_t k = 0; k < n; ++k)
                eb[c][k] += dt / 6.0 * (k1[c][k] + 2.0 * k2[c][k] + 2.0 * k3[c][k] + k4[c][k]);
    }
    EmState out(n, s.length());
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t k = 0; k < n; ++k) {
            out.psi(a, k) = eb[a][k];
            out.psi(3 + a, k) = -eb[3 + a][k];
        }
    require_valid(out, "maxwell_fd_oracle");
    return out;
}

EmDiagnostics diagnostics(const EmState& s) {
    const std::size_t n = s.n_z();
    const auto beta = beta_matrices();
    EmDiagnostics d;
    d.energy_density.assign(n, 0.0);
    d.poynting.assign(n, {0.0, 0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) {
        double rho = 0.0;
        for (std::size_t c = 0; c < 6; ++c) rho += std::norm(s.psi(c, k));
        d.energy_density[k] = rho;
        for (std::size_t i = 0; i < 3; ++i) {
            cplx acc{};
            for (std::size_t r = 0; r < 6; ++r)
                for (std::size_t c = 0; c < 6; ++c)
                    if (beta[i][r][c] != 0) acc += std::conj(s.psi(r, k)) * static_cast<double>(beta[i][r][c]) * s.psi(c, k);
            d.poynting[k][i] = acc.real();
        }
    }
    double total = 0.0;
    for (double r : d.energy_density) total += r;
    d.energy = total * s.dz();

    const auto dez = ddz(s.component(2), s.length());
    const auto dbz = ddz(s.component(5), s.length());  // sign irrelevant for the norm
    for (std::size_t k = 0; k < n; ++k) {
        d.div_e = std::max(d.div_e, std::abs(dez[k]));
        d.div_b = std::max(d.div_b, std::abs(dbz[k]));
    }
    return d;
}

EmTrajectory em_evolve(const EmState& s, double dt, std::size_t steps, std::size_t record_every) {
    if (record_every == 0) throw std::invalid_argument("em_evolve: record_every must be positive");
    EmTrajectory traj;
    traj.record_interval = dt * static_cast<double>(record_every);
    traj.snapshots.push_back(s);
    EmState cur = s;
    for (std::size_t n = 1; n <= steps; ++n) {
        cur = em_step(cur, dt);
        if (n % record_every == 0) traj.snapshots.push_back(cur);
    }
    return traj;
}

double poynting_continuity_residual(const EmTrajectory& traj) {
    const auto& snaps = traj.snapshots;
    if (snaps.size() < 3) throw std::invalid_argument("poynting_continuity_residual: need at least 3 snapshots");
    if (!(traj.record_interval != 0.0)) throw std::invalid_argument("poynting_continuity_residual: zero interval");
    const double h = traj.record_interval;
    double worst = 0.0;
    for (std::size_t m = 1; m + 1 < snaps.size(); ++m) {
        const auto before = diagnostics(snaps[m - 1]);
        const auto after = diagnostics(snaps[m + 1]);
        const auto mid = diagnostics(snaps[m]);
        std::vector<cplx> sz(mid.poynting.size());
        for (std::size_t k = 0; k < sz.size(); ++k) sz[k] = mid.poynting[k][2];
        const auto dsz = ddz(sz, snaps[m].length());
        for (std::size_t k = 0; k < sz.size(); ++k) {
            const double drho = (after.energy_density[k] - before.energy_density[k]) / (2.0 * h);
            worst = std::max(worst, std::abs(drho + dsz[k].real()));
        }
    }
    return worst;
}

OscillatorMapping mode_to_oscillator(cplx e_amp, cplx b_amp, double k) {
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("mode_to_oscillator: k must be positive");
    if (!std::isfinite(e_amp.real()) || !std::isfinite(b_amp.real()))
        throw std::invalid_argument("mode_to_oscillator: non-finite amplitude");
    return {b_amp.real(), k * e_amp.real(), PotentialSpec::harmonic(k)};
}

std::array<OscillatorMapping, 2> mode_to_oscillators(const TransverseMode& mode) {
    constexpr double tol = 1e-12;
    const double scale = 1.0 + std::abs(mode.e[0]) + std::abs(mode.e[1]) + std::abs(mode.b[0]) + std::abs(mode.b[1]);
    if (std::abs(mode.e[2]) > tol * scale || std::abs(mode.b[2]) > tol * scale)
        throw std::invalid_argument("mode_to_oscillators: longitudinal component along the propagation axis");
    double dot = 0.0;
    for (std::size_t a = 0; a < 3; ++a) dot += mode.e[a].real() * mode.b[a].real();
    if (std::abs(dot) > tol * scale * scale) throw std::invalid_argument("mode_to_oscillators: E.B != 0");
    return {mode_to_oscillator(mode.e[0], mode.b[1], mode.k), mode_to_oscillator(mode.e[1], -mode.b[0], mode.k)};
}

EmState standing_mode(std::size_t n_z, double length, std::size_t mode_number, double q, double p) {
    if (mode_number == 0 || 2 * mode_number >= n_z)
        throw std::invalid_argument("standing_mode: mode number must be in [1, n_z/2)");
    const double k = 2.0 * kPi * static_cast<double>(mode_number) / length;
    return EmState::from_fields(
        n_z, length, [&](double z) { return EmState::Vec3{p / k * std::cos(k * z), 0.0, 0.0}; },
        [&](double z) { return EmState::Vec3{0.0, q * std::sin(k * z), 0.0}; });
}

std::pair<double, double> project_standing_mode(const EmState& s, std::size_t mode_number) {
    if (mode_number == 0 || 2 * mode_number >= s.n_z())
        throw std::invalid_argument("project_standing_mode: mode number must be in [1, n_z/2)");
    const double k = 2.0 * kPi * static_cast<double>(mode_number) / s.length();
    double ce = 0.0;
    double sb = 0.0;
    for (std::size_t i = 0; i < s.n_z(); ++i) {
        ce += s.E(0, i).real() * std::cos(k * s.z(i));
        sb += s.B(1, i).real() * std::sin(k * s.z(i));
    }
    const double w = 2.0 / static_cast<double>(s.n_z());
    return {sb * w, ce * w * k};
}

}  // namespace kvnsim
