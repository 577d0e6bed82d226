#pragma once

#include "kvnsim/kvn_propagator.hpp"
#include "kvnsim/phase_grid.hpp"

#include <cstdint>
#include <vector>

namespace kvnsim {

/// rho = |amp|^2 pointwise.
std::vector<double> density(const KvnState& s);

/// psi = sqrt(rho) exp(iS). S is only meaningful where mask != 0.
struct PolarDecomposition {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> rho;
    std::vector<double> phase;
    std::vector<std::uint8_t> mask;

    std::size_t masked_count() const;
};

inline constexpr double kDefaultPhaseFloor = 1e-6;

/// mask = rho > phase_floor * max(rho). Phases are unwrapped along the first
/// axis inside each column, then columns are shifted by multiples of 2 pi to
/// agree with their left neighbour on a shared masked row.
/// Throws for phase_floor <= 0 or an all-zero state.
PolarDecomposition polar(const KvnState& s, double phase_floor = kDefaultPhaseFloor);

/// J = i (psi* d_q d_lp psi - (d_q d_lp psi*) psi) with spectral
/// derivatives; both terms are computed independently and the imaginary
/// part of J (zero up to rounding on symmetric grids) is discarded after
/// being reported through imag_residue. Requires a QLp state.
std::vector<double> current_qlp(const KvnState& s, double* imag_residue = nullptr);

struct ContinuityReport {
    std::vector<double> per_snapshot;  // interior snapshots only (index 1..n-2)
    double max = 0.0;
};

/// max |(rho[n+1] - rho[n-1]) / (2 interval) + J[n]| over the grid for each
/// interior snapshot. Snapshots must be QLp. Throws with fewer than 3.
ContinuityReport continuity_residual(const Trajectory& traj);

/// amp <- |amp|. Idempotent, norm-preserving.
KvnState superselect(const KvnState& s);

}  // namespace kvnsim
