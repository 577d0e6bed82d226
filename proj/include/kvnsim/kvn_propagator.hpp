#pragma once

#include "kvnsim/phase_grid.hpp"
#include "kvnsim/potential.hpp"

#include <cstddef>
#include <vector>

namespace kvnsim {

struct StepperConfig {
    double dt = 1e-3;
    std::size_t steps = 1;
    std::size_t record_every = 1;
    Rep record_rep = Rep::QP;  // representation of recorded snapshots
};

struct Snapshot {
    double time;
    KvnState state;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;   // first entry is the initial state at t = 0
    double record_interval = 0.0;      // dt * record_every
    bool aliasing_warning = false;
};

struct StepResult {
    KvnState state;
    bool aliasing_warning = false;
};

/// Largest per-step phase increments |dt p lambda_q| and |dt V'(q) lambda_p|
/// over the grid. Both must stay below pi.
struct AliasingGuard {
    double kinetic_phase = 0.0;
    double potential_phase = 0.0;
    bool ok() const { return kinetic_phase < kPi && potential_phase < kPi; }
};
AliasingGuard check_aliasing(const PhaseGrid& grid, const PotentialSpec& V, double dt);

/// One Strang step of the Liouvillian for H = p^2/2 + V(q):
/// exp(+i dt/2 V'(q) lambda_p) in (q,lambda_p), exp(-i dt p lambda_q) in
/// (lambda_q,p), then the second potential half step. Input and output in QP.
/// Throws NumericalError on non-finite input or output.
StepResult liouville_step(const KvnState& s, const PotentialSpec& V, double dt);

/// Repeated liouville_step, snapshots at t = 0 and every record_every steps.
Trajectory evolve(const KvnState& s, const PotentialSpec& V, const StepperConfig& cfg);

/// Exact transport psi(q,p,t) = psi0(Phi_{-t}(q,p)) for Free and Harmonic
/// potentials, with psi0 evaluated off-grid through its trigonometric
/// interpolant. Returns a QP state.
KvnState characteristics_oracle(const KvnState& s0, const PotentialSpec& V, double t);

/// |<a|b>|^2 / (<a|a><b|b>)
double fidelity(const KvnState& a, const KvnState& b);

}  // namespace kvnsim
