#pragma once

#include "kvnsim/phase_grid.hpp"
#include "kvnsim/potential.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace kvnsim {

using Matrix6 = std::array<std::array<int, 6>, 6>;

/// The three 6x6 matrices of the spinor form of Maxwell's equations,
/// d psi/dt = -sum_i beta_i d_i psi with psi = (E_x, E_y, E_z, -B_x, -B_y, -B_z).
struct BetaMatrices {
    std::array<Matrix6, 3> beta;
    const Matrix6& operator[](std::size_t axis) const { return beta[axis]; }
};

BetaMatrices beta_matrices();

Matrix6 transpose(const Matrix6& m);
Matrix6 multiply(const Matrix6& a, const Matrix6& b);
Matrix6 commutator(const Matrix6& a, const Matrix6& b);
Matrix6 scaled(const Matrix6& m, int s);
bool is_symmetric(const Matrix6& m);
bool is_antisymmetric(const Matrix6& m);
int levi_civita(std::size_t i, std::size_t j, std::size_t k);

/// Returns s in {+1,-1} if [g_i, g_j] = s eps_ijk t_k holds exactly for all
/// i, j; std::nullopt if neither sign works.
std::optional<int> closure_sign(const std::array<Matrix6, 3>& g, const std::array<Matrix6, 3>& t);

/// Block-diagonal rotation generators diag(L_k, L_k), (L_k)_ij = -eps_kij.
std::array<Matrix6, 3> rotation_generators();

/// Six-component field on a periodic 1-D grid z_k = k L / n_z, propagation
/// along z (d_x = d_y = 0). Stored component-major.
class EmState {
public:
    EmState(std::size_t n_z, double length);

    using Vec3 = std::array<cplx, 3>;
    static EmState from_fields(std::size_t n_z, double length, const std::function<Vec3(double)>& e_field,
                               const std::function<Vec3(double)>& b_field);

    std::size_t n_z() const { return n_z_; }
    double length() const { return length_; }
    double dz() const { return length_ / static_cast<double>(n_z_); }
    double z(std::size_t k) const { return static_cast<double>(k) * dz(); }

    /// Spinor component c (0..5) at point k.
    cplx& psi(std::size_t c, std::size_t k) { return comp_[c][k]; }
    const cplx& psi(std::size_t c, std::size_t k) const { return comp_[c][k]; }
    std::span<cplx> component(std::size_t c) { return comp_[c]; }
    std::span<const cplx> component(std::size_t c) const { return comp_[c]; }

    cplx E(std::size_t axis, std::size_t k) const { return comp_[axis][k]; }
    cplx B(std::size_t axis, std::size_t k) const { return -comp_[3 + axis][k]; }

    /// sum_c |psi_c|^2 dz
    double norm_squared() const;
    bool is_finite() const;

private:
    std::size_t n_z_;
    double length_;
    std::array<std::vector<cplx>, 6> comp_;
};

/// Angular wavenumber of FFT bin j, with the Nyquist bin mapped to 0.
double em_wavenumber(std::size_t j, std::size_t n_z, double length);

/// Exact step: each spatial Fourier mode k is multiplied by
/// exp(-i k dt beta_z), applied as a rotation on each pair of components
/// that beta_z couples. The transform runs in long double. dt may be negative. Throws NumericalError on non-finite input.
EmState em_step(const EmState& s, double dt);

/// Classical RK4 on dE/dt = curl B, dB/dt = -curl E with a spectral d/dz.
/// Test oracle only.
EmState maxwell_fd_oracle(const EmState& s, double dt, std::size_t steps);

struct EmDiagnostics {
    double energy = 0.0;                          // sum rho dz
    std::vector<double> energy_density;           // rho = psi^dagger psi
    std::vector<std::array<double, 3>> poynting;  // S_i = psi^dagger beta_i psi
    double div_e = 0.0;                           // max |d_z E_z|
    double div_b = 0.0;                           // max |d_z B_z|
};

EmDiagnostics diagnostics(const EmState& s);

struct EmTrajectory {
    std::vector<EmState> snapshots;
    double record_interval = 0.0;
};

EmTrajectory em_evolve(const EmState& s, double dt, std::size_t steps, std::size_t record_every = 1);

/// max over interior snapshots of |central d rho/dt + d_z S_z|.
/// Throws with fewer than 3 snapshots.
double poynting_continuity_residual(const EmTrajectory& traj);

/// One polarization pair of a transverse standing mode treated as a KvN
/// oscillator: B is the coordinate, E the conjugate momentum. For a mode
///   E_x = (p / omega) cos(k z),  B_y = q sin(k z)
/// Maxwell's equations give dq/dt = p, dp/dt = -omega^2 q with omega = k.
struct OscillatorMapping {
    double q = 0.0;
    double p = 0.0;
    PotentialSpec potential = PotentialSpec::free();
};

/// (E_x, B_y) amplitudes of a mode with wavenumber k > 0:
/// q = Re B, p = k Re E, Harmonic(omega = k).
OscillatorMapping mode_to_oscillator(cplx e_amp, cplx b_amp, double k = 1.0);

/// Full transverse mode amplitudes along z. The (E_x, B_y) pair gives the
/// first oscillator, (E_y, -B_x) the second. Throws std::invalid_argument
/// for longitudinal components or E.B != 0.
struct TransverseMode {
    double k = 1.0;
    EmState::Vec3 e{};
    EmState::Vec3 b{};
};
std::array<OscillatorMapping, 2> mode_to_oscillators(const TransverseMode& mode);

/// Standing mode E_x = (p/omega) cos(kz), B_y = q sin(kz), k = 2 pi m / L.
EmState standing_mode(std::size_t n_z, double length, std::size_t mode_number, double q, double p);

/// Inverse of standing_mode: projects E_x onto cos and B_y onto sin.
std::pair<double, double> project_standing_mode(const EmState& s, std::size_t mode_number);

}  // namespace kvnsim
