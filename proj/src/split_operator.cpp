#include "split_operator.hpp"

#include "kvnsim/errors.hpp"
#include "kvnsim/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kvnsim::detail {

namespace {
void multiply(std::span<cplx> data, const std::vector<cplx>& factor, std::size_t rows, std::size_t cols) {
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t k = b * cols; k < e * cols; ++k) data[k] *= factor[k];
    });
}
}  // namespace

SplitOperator::SplitOperator(const PhaseGrid& grid, const PhaseFn& potential_phase, const PhaseFn& kinetic_phase)
    : grid_(grid), q_kernel_(grid.q_axis()), p_kernel_(grid.p_axis()),
      half_potential_(grid.size()), kinetic_(grid.size()) {
    const std::size_t cols = grid.n_p();
    for (std::size_t i = 0; i < grid.n_q(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            half_potential_[i * cols + j] = std::polar(1.0, potential_phase(i, j));
            kinetic_[i * cols + j] = std::polar(1.0, kinetic_phase(i, j));
        }
    }
}

void SplitOperator::step_qlp(KvnState& s) const {
    if (s.rep() != Rep::QLp) throw std::logic_error("SplitOperator::step_qlp expects a QLp state");
    const std::size_t rows = grid_.n_q();
    const std::size_t cols = grid_.n_p();
    auto data = s.amp();
    multiply(data, half_potential_, rows, cols);
    p_kernel_.inverse_second(data, rows, cols);
    q_kernel_.forward_first(data, rows, cols);
    multiply(data, kinetic_, rows, cols);
    q_kernel_.inverse_first(data, rows, cols);
    p_kernel_.forward_second(data, rows, cols);
    multiply(data, half_potential_, rows, cols);
}

KvnState SplitOperator::step(const KvnState& s) const {
    if (s.rep() != Rep::QP) throw std::invalid_argument("step expects a state in the QP representation");
    KvnState t = s;
    p_kernel_.forward_second(t.amp(), grid_.n_q(), grid_.n_p());
    t.retag(Rep::QLp);
    step_qlp(t);
    p_kernel_.inverse_second(t.amp(), grid_.n_q(), grid_.n_p());
    t.retag(Rep::QP);
    return t;
}

void require_finite(const KvnState& s, const char* where) {
    if (!s.is_finite()) throw NumericalError(std::string(where) + ": non-finite amplitude");
}

Trajectory run_split(const SplitOperator& op, const KvnState& s, const StepperConfig& cfg) {
    if (s.rep() != Rep::QP) throw std::invalid_argument("evolve expects a state in the QP representation");
    if (!std::isfinite(cfg.dt)) throw std::invalid_argument("dt must be finite");
    if (cfg.record_every == 0) throw std::invalid_argument("record_every must be positive");
    require_finite(s, "evolve");

    Trajectory traj;
    traj.record_interval = cfg.dt * static_cast<double>(cfg.record_every);
    traj.snapshots.reserve(cfg.steps / cfg.record_every + 1);
    traj.snapshots.push_back({0.0, to_representation(s, cfg.record_rep)});

    KvnState work = to_representation(s, Rep::QLp);
    for (std::size_t n = 1; n <= cfg.steps; ++n) {
        op.step_qlp(work);
        if (n % cfg.record_every == 0) {
            require_finite(work, "evolve");
            traj.snapshots.push_back({static_cast<double>(n) * cfg.dt, to_representation(work, cfg.record_rep)});
        }
    }
    require_finite(work, "evolve");
    return traj;
}

}  // namespace kvnsim::detail
