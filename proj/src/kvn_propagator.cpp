#include "kvnsim/kvn_propagator.hpp"

#include "kvnsim/errors.hpp"
#include "kvnsim/parallel.hpp"
#include "split_operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kvnsim {

namespace {

detail::SplitOperator liouville_operator(const PhaseGrid& grid, const PotentialSpec& V, double dt) {
    const auto dv = V.derivatives_on(grid.q_axis());
    return detail::SplitOperator(
        grid,
        [&](std::size_t i, std::size_t j) { return 0.5 * dt * dv[i] * grid.lambda_p(j); },
        [&](std::size_t i, std::size_t j) { return -dt * grid.p(j) * grid.lambda_q(i); });
}

}  // namespace

AliasingGuard check_aliasing(const PhaseGrid& grid, const PotentialSpec& V, double dt) {
    AliasingGuard g;
    const double max_p = std::max(std::abs(grid.p(0)), std::abs(grid.p(grid.n_p() - 1)));
    const double max_lq = std::abs(grid.lambda_q(0));
    const double max_lp = std::abs(grid.lambda_p(0));
    double max_dv = 0.0;
    for (double d : V.derivatives_on(grid.q_axis())) max_dv = std::max(max_dv, std::abs(d));
    g.kinetic_phase = std::abs(dt) * max_p * max_lq;
    g.potential_phase = std::abs(dt) * max_dv * max_lp;
    return g;
}

StepResult liouville_step(const KvnState& s, const PotentialSpec& V, double dt) {
    if (!std::isfinite(dt)) throw std::invalid_argument("dt must be finite");
    detail::require_finite(s, "liouville_step");
    const auto op = liouville_operator(s.grid(), V, dt);
    StepResult r{op.step(to_representation(s, Rep::QP)), !check_aliasing(s.grid(), V, dt).ok()};
    detail::require_finite(r.state, "liouville_step");
    return r;
}

Trajectory evolve(const KvnState& s, const PotentialSpec& V, const StepperConfig& cfg) {
    const auto op = liouville_operator(s.grid(), V, cfg.dt);
    Trajectory traj = detail::run_split(op, s, cfg);
    traj.aliasing_warning = !check_aliasing(s.grid(), V, cfg.dt).ok();
    return traj;
}

KvnState characteristics_oracle(const KvnState& s0, const PotentialSpec& V, double t) {
    using Kind = PotentialSpec::Kind;
    if (V.kind() != Kind::Free && V.kind() != Kind::Harmonic)
        throw std::invalid_argument("characteristics_oracle supports only Free and Harmonic potentials");

    const auto& g = s0.grid();
    const KvnState coeffs = to_representation(s0, Rep::LqLp);
    const std::size_t nq = g.n_q();
    const std::size_t np = g.n_p();
    const double scale = g.dlambda_q() * g.dlambda_p() / (2.0 * kPi);

    // Source point of the backward flow.
    auto source = [&](double q, double p) -> std::pair<double, double> {
        if (V.kind() == Kind::Free) return {q - p * t, p};
        const double w = V.omega();
        const double c = std::cos(w * t);
        const double s = std::sin(w * t);
        return {q * c - (p / w) * s, p * c + w * q * s};
    };

    KvnState out(g, Rep::QP);
    parallel_for(nq, [&](std::size_t begin, std::size_t end) {
        std::vector<cplx> phase_p(np);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < np; ++j) {
                const auto [x, y] = source(g.q(i), g.p(j));
                for (std::size_t n = 0; n < np; ++n) phase_p[n] = std::polar(1.0, y * g.lambda_p(n));
                cplx total{0.0, 0.0};
                for (std::size_t m = 0; m < nq; ++m) {
                    cplx acc{0.0, 0.0};
                    const cplx* row = &coeffs(m, 0);
                    for (std::size_t n = 0; n < np; ++n) acc += row[n] * phase_p[n];
                    total += std::polar(1.0, x * g.lambda_q(m)) * acc;
                }
                out(i, j) = total * scale;
            }
        }
    });
    return out;
}

double fidelity(const KvnState& a, const KvnState& b) {
    const double overlap = std::norm(inner_product(a, b));
    return overlap / (a.norm_squared() * b.norm_squared());
}

}  // namespace kvnsim
