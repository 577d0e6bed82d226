#include "kvnsim/hybrid.hpp"

#include "axis_transform.hpp"
#include "kvnsim/errors.hpp"
#include "kvnsim/parallel.hpp"
#include "split_operator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace kvnsim {

namespace {

detail::SplitOperator hqc_operator(const PhaseGrid& grid, const PotentialSpec& V, const HybridParams& params,
                                   double dt) {
    const double hk = params.hbar * params.kappa;
    return detail::SplitOperator(
        grid,
        [&](std::size_t i, std::size_t j) {
            const double q = grid.q(i);
            const double eps = 0.5 * hk * grid.lambda_p(j);
            return -0.5 * dt * (V.value(q - eps) - V.value(q + eps)) / hk;
        },
        [&](std::size_t i, std::size_t j) { return -dt * grid.p(j) * grid.lambda_q(i); });
}

void require_hybrid_potential(const PotentialSpec& V) {
    if (!V.analytic())
        throw std::invalid_argument("hybrid dynamics needs an analytic potential; tabulated potentials are rejected");
}

double normalized_expectation(const KvnState& s, const std::function<double(std::size_t, std::size_t)>& f) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < s.rows(); ++i)
        for (std::size_t j = 0; j < s.cols(); ++j) {
            const double w = std::norm(s(i, j));
            num += w * f(i, j);
            den += w;
        }
    if (!(den > 0.0)) throw std::invalid_argument("expectation of a zero state");
    return num / den;
}

}  // namespace

void HybridParams::validate() const {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("hbar must be positive and finite");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("kappa must lie in [0, 1]");
}

KvnState hqc_step(const KvnState& s, const PotentialSpec& V, const HybridParams& params, double dt) {
    params.validate();
    if (params.kappa == 0.0) return liouville_step(s, V, dt).state;
    if (!std::isfinite(dt)) throw std::invalid_argument("dt must be finite");
    require_hybrid_potential(V);
    detail::require_finite(s, "hqc_step");
    const auto op = hqc_operator(s.grid(), V, params, dt);
    KvnState out = op.step(to_representation(s, Rep::QP));
    detail::require_finite(out, "hqc_step");
    return out;
}

Trajectory hqc_evolve(const KvnState& s, const PotentialSpec& V, const HybridParams& params,
                      const StepperConfig& cfg) {
    params.validate();
    if (params.kappa == 0.0) return evolve(s, V, cfg);
    require_hybrid_potential(V);
    const auto op = hqc_operator(s.grid(), V, params, cfg.dt);
    Trajectory traj = detail::run_split(op, s, cfg);
    // The classical generator bounds the potential phase for moderate lambda_p.
    traj.aliasing_warning = !check_aliasing(s.grid(), V, cfg.dt).ok();
    return traj;
}

DensityMatrix::DensityMatrix(UniformAxis axis, std::vector<cplx> values) : axis_(axis), values_(std::move(values)) {
    if (axis_.n == 0 || values_.size() != axis_.n * axis_.n)
        throw std::invalid_argument("DensityMatrix: value count does not match n x n");
}

DensityMatrix DensityMatrix::from_pure(const UniformAxis& axis, std::span<const cplx> psi) {
    if (psi.size() != axis.n) throw std::invalid_argument("DensityMatrix::from_pure: length mismatch");
    std::vector<cplx> v(axis.n * axis.n);
    for (std::size_t i = 0; i < axis.n; ++i)
        for (std::size_t j = 0; j < axis.n; ++j) v[i * axis.n + j] = psi[i] * std::conj(psi[j]);
    return DensityMatrix(axis, std::move(v));
}

double DensityMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < n(); ++i) t += (*this)(i, i).real();
    return t * axis_.step();
}

double DensityMatrix::purity() const {
    double acc = 0.0;
    for (const auto& v : values_) acc += std::norm(v);
    return acc * axis_.step() * axis_.step();
}

double DensityMatrix::hermiticity_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n(); ++i)
        for (std::size_t j = 0; j < n(); ++j) worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    return worst;
}

double WignerField::integral() const {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc * grid.dq() * grid.dp();
}

double WignerField::min() const { return *std::min_element(values.begin(), values.end()); }
double WignerField::max() const { return *std::max_element(values.begin(), values.end()); }

WignerField wigner_from_density(const DensityMatrix& rho, const HybridParams& params, const PhaseGrid& grid) {
    params.validate();
    if (params.kappa == 0.0) throw std::invalid_argument("wigner_from_density: undefined at kappa = 0");
    if (!(grid.q_axis() == rho.axis()))
        throw std::invalid_argument("wigner_from_density: phase grid q axis differs from the density matrix grid");
    const double hk = params.hbar * params.kappa;
    const double dx = rho.axis().step();
    const double p_limit = kPi * hk / (2.0 * dx);
    for (std::size_t j = 0; j < grid.n_p(); ++j)
        if (std::abs(grid.p(j)) >= p_limit)
            throw std::invalid_argument("wigner_from_density: p axis exceeds pi hbar kappa / (2 dx) = " +
                                        std::to_string(p_limit));

    const std::size_t n = rho.n();
    const std::size_t np = grid.n_p();
    WignerField w{grid, std::vector<double>(n * np, 0.0), 0.0};
    const double pref = 2.0 * dx / (2.0 * kPi * hk);
    std::vector<double> imag_part(n, 0.0);
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t reach = std::min(i, n - 1 - i);
            for (std::size_t j = 0; j < np; ++j) {
                const double k = 2.0 * grid.p(j) * dx / hk;
                cplx acc = rho(i, i);
                for (std::size_t l = 1; l <= reach; ++l)
                    acc += rho(i - l, i + l) * std::polar(1.0, k * static_cast<double>(l)) +
                           rho(i + l, i - l) * std::polar(1.0, -k * static_cast<double>(l));
                acc *= pref;
                w.values[i * np + j] = acc.real();
                imag_part[i] = std::max(imag_part[i], std::abs(acc.imag()));
            }
        }
    });
    w.max_imag = *std::max_element(imag_part.begin(), imag_part.end());
    return w;
}

WignerField wigner_from_state(const KvnState& s) {
    const KvnState qp = to_representation(s, Rep::QP);
    WignerField w{qp.grid(), std::vector<double>(qp.amp().size()), 0.0};
    for (std::size_t k = 0; k < w.values.size(); ++k) {
        w.values[k] = qp.amp()[k].real();
        w.max_imag = std::max(w.max_imag, std::abs(qp.amp()[k].imag()));
    }
    return w;
}

KvnState coherent_wigner_state(const PhaseGrid& grid, double q0, double p0, double hbar) {
    if (!(hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
    return KvnState::sample(grid, Rep::QP, [=](double q, double p) {
        return cplx(std::exp(-((q - q0) * (q - q0) + (p - p0) * (p - p0)) / hbar) / (kPi * hbar), 0.0);
    });
}

QuantumTrajectory schrodinger_oracle(const UniformAxis& axis, std::span<const cplx> psi0, const PotentialSpec& V,
                                     double hbar, double dt, std::size_t steps, std::size_t record_every) {
    if (psi0.size() != axis.n) throw std::invalid_argument("schrodinger_oracle: psi0 length mismatch");
    if (!(hbar > 0.0)) throw std::invalid_argument("schrodinger_oracle: hbar must be positive");
    if (!std::isfinite(dt)) throw std::invalid_argument("schrodinger_oracle: dt must be finite");
    if (record_every == 0) throw std::invalid_argument("schrodinger_oracle: record_every must be positive");
    double n2 = 0.0;
    for (const auto& v : psi0) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw NumericalError("schrodinger_oracle: NaN in psi0");
        n2 += std::norm(v);
    }
    n2 *= axis.step();
    if (std::abs(n2 - 1.0) > 1e-8) throw std::invalid_argument("schrodinger_oracle: psi0 is not normalized");

    const std::size_t n = axis.n;
    const auto v = V.values_on(axis);
    std::vector<cplx> half_pot(n);
    std::vector<cplx> kinetic(n);
    for (std::size_t k = 0; k < n; ++k) {
        half_pot[k] = std::polar(1.0, -0.5 * dt * v[k] / hbar);
        const double wave = axis.dual_at(k);
        kinetic[k] = std::polar(1.0, -0.5 * dt * hbar * wave * wave);
    }
    const detail::AxisKernel kernel(axis);

    QuantumTrajectory traj{axis, {0.0}, {std::vector<cplx>(psi0.begin(), psi0.end())}};
    std::vector<cplx> psi(psi0.begin(), psi0.end());
    for (std::size_t s = 1; s <= steps; ++s) {
        for (std::size_t k = 0; k < n; ++k) psi[k] *= half_pot[k];
        kernel.forward(psi.data(), 1);
        for (std::size_t k = 0; k < n; ++k) psi[k] *= kinetic[k];
        kernel.inverse(psi.data(), 1);
        for (std::size_t k = 0; k < n; ++k) psi[k] *= half_pot[k];
        if (s % record_every == 0) {
            for (const auto& x : psi)
                if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
                    throw NumericalError("schrodinger_oracle: non-finite amplitude");
            traj.times.push_back(static_cast<double>(s) * dt);
            traj.psi.push_back(psi);
        }
    }
    return traj;
}

Negativity negativity(const WignerField& w) {
    Negativity out;
    out.min_value = w.min();
    double mass = 0.0;
    for (double v : w.values) mass += std::min(v, 0.0);
    out.negative_mass = -mass * w.grid.dq() * w.grid.dp();
    return out;
}

PositivityReport positivity_preservation_report(const PotentialSpec& V, std::span<const double> kappas, double hbar,
                                                const KvnState& initial, double horizon, double dt,
                                                std::size_t record_every) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("positivity report: dt and horizon must be positive");
    PositivityReport report;
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    for (double kappa : kappas) {
        const HybridParams params{hbar, kappa};
        StepperConfig cfg;
        cfg.dt = dt;
        cfg.steps = steps;
        cfg.record_every = record_every;
        cfg.record_rep = Rep::QP;
        const Trajectory traj = hqc_evolve(initial, V, params, cfg);

        PositivityRun run;
        run.kappa = kappa;
        run.min_over_time = std::numeric_limits<double>::infinity();
        for (const auto& snap : traj.snapshots) {
            const WignerField w = wigner_from_state(snap.state);
            const double lo = w.min();
            const double hi = w.max();
            run.times.push_back(snap.time);
            run.min_w.push_back(lo);
            run.max_w.push_back(hi);
            run.min_over_time = std::min(run.min_over_time, lo);
            if (lo < -kNegativityThreshold * hi) run.became_negative = true;
        }
        run.stays_nonnegative = run.min_over_time >= -kPositivityTolerance;
        report.runs.push_back(std::move(run));
    }
    return report;
}

KvnState apply_q_quantum(const KvnState& s, const HybridParams& params) {
    const double hk = params.hbar * params.kappa;
    KvnState t = to_representation(s, Rep::QLp);
    multiply_pointwise(t, [hk](double q, double lp) { return cplx(q - 0.5 * hk * lp, 0.0); });
    return to_representation(t, s.rep());
}

KvnState apply_p_quantum(const KvnState& s, const HybridParams& params) {
    const double hk = params.hbar * params.kappa;
    KvnState t = to_representation(s, Rep::LqP);
    multiply_pointwise(t, [hk](double lq, double p) { return cplx(p + 0.5 * hk * lq, 0.0); });
    return to_representation(t, s.rep());
}

HybridMoments hybrid_moments(const KvnState& s, const PotentialSpec& V, const HybridParams& params) {
    params.validate();
    require_hybrid_potential(V);
    const double hk = params.hbar * params.kappa;
    const KvnState qlp = to_representation(s, Rep::QLp);
    const KvnState lqp = to_representation(s, Rep::LqP);
    const PhaseGrid& g = s.grid();
    HybridMoments m;
    m.q = normalized_expectation(qlp, [&](std::size_t i, std::size_t j) { return g.q(i) - 0.5 * hk * g.lambda_p(j); });
    m.force = -normalized_expectation(
        qlp, [&](std::size_t i, std::size_t j) { return V.derivative(g.q(i) - 0.5 * hk * g.lambda_p(j)); });
    m.p = normalized_expectation(lqp, [&](std::size_t i, std::size_t j) { return g.p(j) + 0.5 * hk * g.lambda_q(i); });
    return m;
}

double commutator_residual(const KvnState& s, const HybridParams& params) {
    const KvnState qp = apply_q_quantum(apply_p_quantum(s, params), params);
    const KvnState pq = apply_p_quantum(apply_q_quantum(s, params), params);
    const cplx value = (inner_product(s, qp) - inner_product(s, pq)) / s.norm_squared();
    return std::abs(value - cplx(0.0, params.hbar * params.kappa));
}

}  // namespace kvnsim
