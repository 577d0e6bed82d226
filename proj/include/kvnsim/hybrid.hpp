#pragma once

#include "kvnsim/kvn_propagator.hpp"
#include "kvnsim/phase_grid.hpp"
#include "kvnsim/potential.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace kvnsim {

/// kappa = 0 is classical (Liouville) transport, kappa = 1 quantum (Moyal).
struct HybridParams {
    double hbar = 1.0;
    double kappa = 1.0;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// One Strang step generated by
///   H_QC / hbar = p lambda_q + (U(q - hbar kappa lambda_p / 2) - U(q + hbar kappa lambda_p / 2)) / (hbar kappa).
/// kappa = 0 is the limit -U'(q) lambda_p and calls liouville_step directly.
/// QP in, QP out. Tabulated potentials are rejected for kappa > 0.
KvnState hqc_step(const KvnState& s, const PotentialSpec& V, const HybridParams& params, double dt);

/// Repeated hqc_step with the same recording rules as evolve().
Trajectory hqc_evolve(const KvnState& s, const PotentialSpec& V, const HybridParams& params,
                      const StepperConfig& cfg);

/// rho(x_i, x_j) on an n x n position grid, row-major.
class DensityMatrix {
public:
    DensityMatrix(UniformAxis axis, std::vector<cplx> values);

    /// rho = psi psi^dagger.
    static DensityMatrix from_pure(const UniformAxis& axis, std::span<const cplx> psi);

    const UniformAxis& axis() const { return axis_; }
    std::size_t n() const { return axis_.n; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return values_[i * axis_.n + j]; }
    std::span<const cplx> values() const { return values_; }

    /// sum_i rho_ii dx
    double trace() const;
    /// sum_ij |rho_ij|^2 dx^2
    double purity() const;
    /// max |rho_ij - conj(rho_ji)|
    double hermiticity_error() const;

private:
    UniformAxis axis_;
    std::vector<cplx> values_;
};

/// Real phase-space field on the QP grid.
struct WignerField {
    PhaseGrid grid;
    std::vector<double> values;  // row-major, q first
    double max_imag = 0.0;       // largest discarded imaginary part

    double at(std::size_t i, std::size_t j) const { return values[i * grid.n_p() + j]; }
    double integral() const;
    double min() const;
    double max() const;
};

/// W(q_i, p) = (2 dx / (2 pi hbar kappa)) sum_l rho(x_{i-l}, x_{i+l}) exp(2 i p l dx / (hbar kappa)),
/// the discrete form of (1/(2 pi hbar kappa)) int dy rho(q - y/2, q + y/2) exp(i p y / (hbar kappa)).
/// Requires grid.q_axis() == rho.axis() and |p| < pi hbar kappa / (2 dx) on the p axis.
/// Throws for kappa = 0 and incompatible grids.
WignerField wigner_from_density(const DensityMatrix& rho, const HybridParams& params, const PhaseGrid& grid);

/// The QP amplitude of a hybrid state read as W. Hybrid states are
/// sampled from a unit-integral W and the dynamics conserves the integral,
/// so no rescaling is applied.
WignerField wigner_from_state(const KvnState& s);

/// Closed-form coherent state W = exp(-((q - q0)^2 + (p - p0)^2) / hbar) / (pi hbar),
/// sampled as a QP hybrid state.
KvnState coherent_wigner_state(const PhaseGrid& grid, double q0, double p0, double hbar);

struct QuantumTrajectory {
    UniformAxis axis;
    std::vector<double> times;
    std::vector<std::vector<cplx>> psi;

    DensityMatrix density(std::size_t k) const { return DensityMatrix::from_pure(axis, psi[k]); }
};

/// Split-operator Schroedinger propagation, H = p^2/2 + V(x): half potential
/// exp(-i dt V / (2 hbar)), kinetic exp(-i dt hbar k^2 / 2) in momentum
/// space, half potential. Records t = 0 and every record_every steps.
/// Throws for non-normalized psi0 (|1 - sum |psi|^2 dx| > 1e-8) and NaN.
QuantumTrajectory schrodinger_oracle(const UniformAxis& axis, std::span<const cplx> psi0, const PotentialSpec& V,
                                     double hbar, double dt, std::size_t steps, std::size_t record_every = 1);

struct Negativity {
    double min_value = 0.0;
    double negative_mass = 0.0;  // -sum min(W, 0) dq dp
};
Negativity negativity(const WignerField& w);

inline constexpr double kPositivityTolerance = 1e-6;
inline constexpr double kNegativityThreshold = 1e-3;  // relative to max W

struct PositivityRun {
    double kappa = 0.0;
    std::vector<double> times;
    std::vector<double> min_w;
    std::vector<double> max_w;
    double min_over_time = 0.0;
    bool stays_nonnegative = false;  // min W >= -kPositivityTolerance throughout
    bool became_negative = false;    // some min W < -kNegativityThreshold * max W
};

struct PositivityReport {
    std::vector<PositivityRun> runs;
};

/// Evolves `initial` (QP, W-normalized) to `horizon` with hqc_step for each
/// kappa, tracking min and max of W at every recorded step.
PositivityReport positivity_preservation_report(const PotentialSpec& V, std::span<const double> kappas, double hbar,
                                                const KvnState& initial, double horizon, double dt,
                                                std::size_t record_every = 1);

/// <q_Q>, <p_Q>, -<U'(q_Q)> with q_Q = q - hbar kappa lambda_p / 2 applied in
/// QLp and p_Q = p + hbar kappa lambda_q / 2 applied in LqP, where each is
/// multiplicative. Expectations are normalized by <psi|psi>.
struct HybridMoments {
    double q = 0.0;
    double p = 0.0;
    double force = 0.0;
};
HybridMoments hybrid_moments(const KvnState& s, const PotentialSpec& V, const HybridParams& params);

/// q_Q psi and p_Q psi, returned in the representation of the input.
KvnState apply_q_quantum(const KvnState& s, const HybridParams& params);
KvnState apply_p_quantum(const KvnState& s, const HybridParams& params);

/// |<psi|[q_Q, p_Q]|psi> / <psi|psi> - i hbar kappa|
double commutator_residual(const KvnState& s, const HybridParams& params);

}  // namespace kvnsim
