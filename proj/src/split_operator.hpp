#pragma once

#include "axis_transform.hpp"
#include "kvnsim/kvn_propagator.hpp"
#include "kvnsim/phase_grid.hpp"

#include <functional>
#include <vector>

namespace kvnsim::detail {

// Strang step for a generator split into a phase that is diagonal in
// (q, lambda_p) and one that is diagonal in (lambda_q, p):
//   half potential (QLp) -> kinetic (LqP) -> half potential (QLp).
// Each factor multiplies by a unit-modulus field, so the step is unitary.
class SplitOperator {
public:
    // potential_phase(i, j) is the phase of the half step at (q_i, lambda_p_j),
    // kinetic_phase(i, j) the phase of the full kinetic step at (lambda_q_i, p_j).
    using PhaseFn = std::function<double(std::size_t, std::size_t)>;
    SplitOperator(const PhaseGrid& grid, const PhaseFn& potential_phase, const PhaseFn& kinetic_phase);

    const PhaseGrid& grid() const { return grid_; }

    // In-place step on a state held in QLp.
    void step_qlp(KvnState& s) const;

    // Takes a QP state, returns a QP state.
    KvnState step(const KvnState& s) const;

private:
    PhaseGrid grid_;
    AxisKernel q_kernel_;
    AxisKernel p_kernel_;
    std::vector<cplx> half_potential_;
    std::vector<cplx> kinetic_;
};

void require_finite(const KvnState& s, const char* where);

// Runs cfg.steps steps starting from a QP state, staying in QLp between
// records. Snapshots are converted to cfg.record_rep.
Trajectory run_split(const SplitOperator& op, const KvnState& s, const StepperConfig& cfg);

}  // namespace kvnsim::detail
