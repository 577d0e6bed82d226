#include "kvnsim/phase_grid.hpp"

#include "axis_transform.hpp"

#include <cmath>
#include <stdexcept>

namespace kvnsim {

std::string_view to_string(Rep rep) {
    switch (rep) {
        case Rep::QP: return "QP";
        case Rep::QLp: return "QLp";
        case Rep::LqP: return "LqP";
        case Rep::LqLp: return "LqLp";
    }
    return "?";
}

Rep rep_from_string(std::string_view name) {
    if (name == "QP") return Rep::QP;
    if (name == "QLp") return Rep::QLp;
    if (name == "LqP") return Rep::LqP;
    if (name == "LqLp") return Rep::LqLp;
    throw std::invalid_argument("unknown representation '" + std::string(name) + "' (expected QP, QLp, LqP or LqLp)");
}

PhaseGrid make_grid(std::size_t n_q, std::size_t n_p, std::pair<double, double> q_range,
                    std::pair<double, double> p_range) {
    auto check_size = [](std::size_t n, const char* name) {
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument(std::string(name) + " must be even and >= 8, got " + std::to_string(n));
    };
    auto check_range = [](std::pair<double, double> r, const char* name) {
        if (!std::isfinite(r.first) || !std::isfinite(r.second) || !(r.second > r.first))
            throw std::invalid_argument(std::string(name) + " range must satisfy min < max");
    };
    check_size(n_q, "n_q");
    check_size(n_p, "n_p");
    check_range(q_range, "q");
    check_range(p_range, "p");
    return PhaseGrid(UniformAxis{n_q, q_range.first, q_range.second},
                     UniformAxis{n_p, p_range.first, p_range.second});
}

KvnState::KvnState(PhaseGrid grid, Rep rep) : grid_(grid), rep_(rep), amp_(grid.size()) {}

KvnState::KvnState(PhaseGrid grid, Rep rep, std::vector<cplx> amp)
    : grid_(grid), rep_(rep), amp_(std::move(amp)) {
    if (amp_.size() != grid_.size())
        throw std::invalid_argument("amplitude array size does not match the grid");
}

KvnState KvnState::sample(const PhaseGrid& grid, Rep rep, const std::function<cplx(double, double)>& f) {
    KvnState s(grid, rep);
    for (std::size_t i = 0; i < grid.n_q(); ++i) {
        const double x = grid.first_coord(rep, i);
        for (std::size_t j = 0; j < grid.n_p(); ++j) s(i, j) = f(x, grid.second_coord(rep, j));
    }
    return s;
}

double KvnState::norm_squared() const {
    double sum = 0.0;
    for (const auto& a : amp_) sum += std::norm(a);
    return sum * cell_volume();
}

double KvnState::norm() const { return std::sqrt(norm_squared()); }

bool KvnState::is_finite() const {
    for (const auto& a : amp_)
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    return true;
}

KvnState& KvnState::operator*=(cplx c) {
    for (auto& a : amp_) a *= c;
    return *this;
}

cplx inner_product(const KvnState& a, const KvnState& b) {
    if (a.rep() != b.rep()) throw std::invalid_argument("inner_product: representation mismatch");
    if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_product: grid mismatch");
    cplx sum{0.0, 0.0};
    const auto x = a.amp();
    const auto y = b.amp();
    for (std::size_t k = 0; k < x.size(); ++k) sum += std::conj(x[k]) * y[k];
    return sum * a.cell_volume();
}

KvnState to_representation(const KvnState& s, Rep target) {
    KvnState out = s;
    const auto& g = s.grid();
    const bool from_first = first_axis_dual(s.rep());
    const bool from_second = second_axis_dual(s.rep());
    const bool to_first = first_axis_dual(target);
    const bool to_second = second_axis_dual(target);

    if (from_second != to_second) {
        detail::AxisKernel k(g.p_axis());
        if (to_second) k.forward_second(out.amp(), g.n_q(), g.n_p());
        else k.inverse_second(out.amp(), g.n_q(), g.n_p());
    }
    if (from_first != to_first) {
        detail::AxisKernel k(g.q_axis());
        if (to_first) k.forward_first(out.amp(), g.n_q(), g.n_p());
        else k.inverse_first(out.amp(), g.n_q(), g.n_p());
    }
    out.retag(target);
    return out;
}

namespace {
void require_normalized(const KvnState& s, double tol) {
    const double n2 = s.norm_squared();
    if (!(std::abs(n2 - 1.0) <= tol))
        throw std::domain_error("expectation: state is not normalized (norm^2 = " + std::to_string(n2) + ")");
}
}  // namespace

double expectation(const KvnState& s, std::span<const double> f, double tol) {
    if (f.size() != s.grid().size()) throw std::invalid_argument("expectation: field size mismatch");
    require_normalized(s, tol);
    double sum = 0.0;
    const auto a = s.amp();
    for (std::size_t k = 0; k < a.size(); ++k) sum += f[k] * std::norm(a[k]);
    return sum * s.cell_volume();
}

double expectation(const KvnState& s, const std::function<double(double, double)>& f, double tol) {
    const auto& g = s.grid();
    std::vector<double> field(g.size());
    for (std::size_t i = 0; i < g.n_q(); ++i)
        for (std::size_t j = 0; j < g.n_p(); ++j)
            field[i * g.n_p() + j] = f(g.first_coord(s.rep(), i), g.second_coord(s.rep(), j));
    return expectation(s, field, tol);
}

void multiply_pointwise(KvnState& s, const std::function<cplx(double, double)>& f) {
    const auto& g = s.grid();
    for (std::size_t i = 0; i < g.n_q(); ++i) {
        const double x = g.first_coord(s.rep(), i);
        for (std::size_t j = 0; j < g.n_p(); ++j) s(i, j) *= f(x, g.second_coord(s.rep(), j));
    }
}

KvnState spectral_derivative(const KvnState& s, Axis axis) {
    // d/dx on a direct axis is i*lambda in the dual; d/dlambda on a dual axis
    // is -i*x back in the direct one. Index 0 of the multiplier axis (the
    // Nyquist mode, or the x_min edge) has no partner and is zeroed.
    const Rep rep = s.rep();
    const bool first = axis == Axis::First;
    const bool dual_now = first ? first_axis_dual(rep) : second_axis_dual(rep);
    const Rep work = first ? rep_from_axes(!dual_now, second_axis_dual(rep))
                           : rep_from_axes(first_axis_dual(rep), !dual_now);
    KvnState t = to_representation(s, work);
    const auto& g = s.grid();
    const cplx factor = dual_now ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
    for (std::size_t i = 0; i < g.n_q(); ++i) {
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const std::size_t idx = first ? i : j;
            const double coord = first ? g.first_coord(work, i) : g.second_coord(work, j);
            t(i, j) *= (idx == 0) ? cplx(0.0, 0.0) : factor * coord;
        }
    }
    return to_representation(t, rep);
}

}  // namespace kvnsim
