#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kvnsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Uniform periodic axis x_k = min + k*step, k = 0..n-1, step = (max-min)/n,
/// with its Fourier-dual axis lambda_m = (m - n/2) * dual_step,
/// dual_step = 2*pi / (n*step).
struct UniformAxis {
    std::size_t n = 0;
    double min = 0.0;
    double max = 0.0;

    double step() const { return (max - min) / static_cast<double>(n); }
    double at(std::size_t k) const { return min + static_cast<double>(k) * step(); }
    double dual_step() const { return 2.0 * kPi / (static_cast<double>(n) * step()); }
    double dual_at(std::size_t m) const {
        return (static_cast<double>(m) - static_cast<double>(n / 2)) * dual_step();
    }

    bool operator==(const UniformAxis&) const = default;
};

/// Which commuting pair is diagonal: (q,p), (q,lambda_p), (lambda_q,p), (lambda_q,lambda_p).
enum class Rep { QP, QLp, LqP, LqLp };

std::string_view to_string(Rep rep);
Rep rep_from_string(std::string_view name);

/// True when the first (q-like) axis holds lambda_q rather than q.
constexpr bool first_axis_dual(Rep r) { return r == Rep::LqP || r == Rep::LqLp; }
/// True when the second (p-like) axis holds lambda_p rather than p.
constexpr bool second_axis_dual(Rep r) { return r == Rep::QLp || r == Rep::LqLp; }
constexpr Rep rep_from_axes(bool first_dual, bool second_dual) {
    if (first_dual) return second_dual ? Rep::LqLp : Rep::LqP;
    return second_dual ? Rep::QLp : Rep::QP;
}

/// Discretization of one (q,p) degree of freedom together with the induced
/// (lambda_q, lambda_p) grids. Construct through make_grid.
class PhaseGrid {
public:
    const UniformAxis& q_axis() const { return q_; }
    const UniformAxis& p_axis() const { return p_; }

    std::size_t n_q() const { return q_.n; }
    std::size_t n_p() const { return p_.n; }
    std::size_t size() const { return q_.n * p_.n; }

    double dq() const { return q_.step(); }
    double dp() const { return p_.step(); }
    double dlambda_q() const { return q_.dual_step(); }
    double dlambda_p() const { return p_.dual_step(); }

    double q(std::size_t i) const { return q_.at(i); }
    double p(std::size_t j) const { return p_.at(j); }
    double lambda_q(std::size_t i) const { return q_.dual_at(i); }
    double lambda_p(std::size_t j) const { return p_.dual_at(j); }

    /// Coordinate of row i / column j in the given representation.
    double first_coord(Rep rep, std::size_t i) const {
        return first_axis_dual(rep) ? lambda_q(i) : q(i);
    }
    double second_coord(Rep rep, std::size_t j) const {
        return second_axis_dual(rep) ? lambda_p(j) : p(j);
    }

    /// Quadrature weight of one grid cell in the given representation.
    double cell_volume(Rep rep) const {
        return (first_axis_dual(rep) ? dlambda_q() : dq()) * (second_axis_dual(rep) ? dlambda_p() : dp());
    }

    bool operator==(const PhaseGrid&) const = default;

private:
    friend PhaseGrid make_grid(std::size_t, std::size_t, std::pair<double, double>, std::pair<double, double>);
    PhaseGrid(UniformAxis q, UniformAxis p) : q_(q), p_(p) {}

    UniformAxis q_;
    UniformAxis p_;
};

/// Throws std::invalid_argument for sizes that are odd or below 8, and for
/// empty or inverted ranges.
PhaseGrid make_grid(std::size_t n_q, std::size_t n_p, std::pair<double, double> q_range,
                    std::pair<double, double> p_range);

/// Complex amplitude field over a PhaseGrid, row-major with the q-like axis
/// first. The tag records which representation the numbers live in.
class KvnState {
public:
    KvnState(PhaseGrid grid, Rep rep);
    KvnState(PhaseGrid grid, Rep rep, std::vector<cplx> amp);

    /// Samples f(x, y) at the coordinates of the given representation.
    static KvnState sample(const PhaseGrid& grid, Rep rep, const std::function<cplx(double, double)>& f);

    const PhaseGrid& grid() const { return grid_; }
    Rep rep() const { return rep_; }
    std::size_t rows() const { return grid_.n_q(); }
    std::size_t cols() const { return grid_.n_p(); }

    std::span<const cplx> amp() const { return amp_; }
    std::span<cplx> amp() { return amp_; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return amp_[i * cols() + j]; }
    cplx& operator()(std::size_t i, std::size_t j) { return amp_[i * cols() + j]; }

    double cell_volume() const { return grid_.cell_volume(rep_); }
    double norm_squared() const;
    double norm() const;
    bool is_finite() const;

    /// Changes the tag without touching the numbers. Used by transforms.
    void retag(Rep rep) { rep_ = rep; }

    KvnState& operator*=(cplx c);

private:
    PhaseGrid grid_;
    Rep rep_;
    std::vector<cplx> amp_;
};

/// <a|b> = sum conj(a) b * cell volume. Requires matching grid and rep.
cplx inner_product(const KvnState& a, const KvnState& b);

/// Exact discrete unitary change of representation. Along each axis that
/// changes, forward (x -> lambda) is
///   psi(lambda) = (dx / sqrt(2 pi)) sum_x exp(-i x lambda) psi(x)
/// and the inverse uses exp(+i x lambda) with weight dlambda / sqrt(2 pi).
/// With this kernel, multiplication by lambda is the operator -i d/dx.
KvnState to_representation(const KvnState& s, Rep target);

/// Sum of f * |amp|^2 * cell volume for f sampled on the active grid.
/// Throws std::domain_error when the state is not normalized (|1 - norm^2| > tol).
double expectation(const KvnState& s, std::span<const double> f, double tol = 1e-8);
double expectation(const KvnState& s, const std::function<double(double, double)>& f, double tol = 1e-8);

/// Spectral derivative along one axis of the active representation, i.e.
/// d/dx of the trigonometric interpolant. The unpaired edge mode is dropped
/// so real data stays real.
enum class Axis { First, Second };
KvnState spectral_derivative(const KvnState& s, Axis axis);

/// Multiplies every row i, column j by f(first_coord(i), second_coord(j)).
void multiply_pointwise(KvnState& s, const std::function<cplx(double, double)>& f);

}  // namespace kvnsim
