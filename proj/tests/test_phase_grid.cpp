#include "doctest.h"
#include "oracles.hpp"

#include "kvnsim/phase_grid.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

using namespace kvnsim;

namespace {

const std::array<Rep, 4> kAllReps{Rep::QP, Rep::QLp, Rep::LqP, Rep::LqLp};

// Transforms by direct summation, one axis at a time.
std::vector<cplx> direct_to(const KvnState& s, Rep target) {
    const auto& g = s.grid();
    std::vector<cplx> v(s.amp().begin(), s.amp().end());
    if (first_axis_dual(s.rep()) != first_axis_dual(target))
        v = oracle::direct_axis_sum(v, s.rows(), s.cols(), g.q_axis(), true, first_axis_dual(target) ? -1 : +1);
    if (second_axis_dual(s.rep()) != second_axis_dual(target))
        v = oracle::direct_axis_sum(v, s.rows(), s.cols(), g.p_axis(), false, second_axis_dual(target) ? -1 : +1);
    return v;
}

KvnState standard_gaussian(const PhaseGrid& g, double q0 = 0.0, double p0 = 0.0) {
    return KvnState::sample(g, Rep::QP, [=](double q, double p) {
        return cplx(std::exp(-0.5 * ((q - q0) * (q - q0) + (p - p0) * (p - p0))) / std::sqrt(kPi), 0.0);
    });
}

}  // namespace

TEST_CASE("make_grid spacings") {
    const auto g = make_grid(8, 8, {-4, 4}, {-4, 4});
    CHECK(g.dq() == 1.0);
    CHECK(g.dlambda_q() == doctest::Approx(2 * kPi / 8).epsilon(1e-15));
    CHECK(g.lambda_q(0) == doctest::Approx(-kPi).epsilon(1e-15));
    CHECK(g.lambda_q(4) == 0.0);

    const auto h = make_grid(256, 256, {-10, 10}, {-10, 10});
    CHECK(h.dq() == doctest::Approx(20.0 / 256).epsilon(1e-15));
    CHECK(h.dp() == doctest::Approx(20.0 / 256).epsilon(1e-15));
    CHECK(h.dlambda_p() * h.dp() * 256 == doctest::Approx(2 * kPi).epsilon(1e-14));
}

TEST_CASE("make_grid rejects bad input") {
    CHECK_THROWS_AS(make_grid(7, 8, {-4, 4}, {-4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 6, {-4, 4}, {-4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, {4, -4}, {-4, 4}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, {-4, 4}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(8, 8, {-4, NAN}, {-4, 4}), std::invalid_argument);
}

TEST_CASE("rep names round trip") {
    for (Rep r : kAllReps) CHECK(rep_from_string(to_string(r)) == r);
    CHECK_THROWS(rep_from_string("qx"));
}

TEST_CASE("inner product basics") {
    const auto g = make_grid(64, 64, {-8, 8}, {-8, 8});
    const auto a = standard_gaussian(g);
    CHECK(std::abs(inner_product(a, a) - 1.0) < 1e-12);

    KvnState ia = a;
    ia *= cplx(0.0, 1.0);
    CHECK(std::abs(inner_product(a, ia) - cplx(0.0, a.norm_squared())) < 1e-13);

    const auto b = oracle::random_packets(g, 3);
    CHECK(std::abs(inner_product(a, b) - std::conj(inner_product(b, a))) < 1e-14);

    // Disjoint bumps.
    const auto left = KvnState::sample(g, Rep::QP, [](double q, double) { return q < -1 ? cplx(1.0) : cplx(0.0); });
    const auto right = KvnState::sample(g, Rep::QP, [](double q, double) { return q > 1 ? cplx(1.0) : cplx(0.0); });
    CHECK(inner_product(left, right) == cplx(0.0));

    CHECK_THROWS_AS(inner_product(a, to_representation(a, Rep::QLp)), std::invalid_argument);
    const auto g2 = make_grid(64, 64, {-8, 8}, {-9, 9});
    CHECK_THROWS_AS(inner_product(a, standard_gaussian(g2)), std::invalid_argument);
}

TEST_CASE("transforms agree with direct summation") {
    const auto g = make_grid(16, 12 + 4, {-3.0, 5.0}, {-2.5, 3.5});
    KvnState s(g, Rep::QP, oracle::random_field(g.size(), 11));
    for (Rep from : kAllReps) {
        const KvnState src = to_representation(s, from);
        for (Rep to : kAllReps) {
            const auto fast = to_representation(src, to);
            const auto slow = direct_to(src, to);
            CHECK(fast.rep() == to);
            CHECK(oracle::max_abs_diff(fast.amp(), slow) < 1e-12 * oracle::max_abs(slow));
        }
    }
}

TEST_CASE("unitarity and round trips for all ordered pairs") {
    const auto g = make_grid(32, 48, {-6, 6}, {-7, 5});
    for (unsigned seed = 0; seed < 5; ++seed) {
        KvnState s(g, Rep::QP, oracle::random_field(g.size(), seed));
        for (Rep from : kAllReps) {
            const KvnState a = to_representation(s, from);
            for (Rep to : kAllReps) {
                const KvnState b = to_representation(a, to);
                CHECK(std::abs(b.norm() - a.norm()) <= 1e-12 * a.norm());
                const KvnState back = to_representation(b, from);
                CHECK(oracle::max_abs_diff(back.amp(), a.amp()) <= 1e-12 * oracle::max_abs(a.amp()));
            }
        }
    }
}

TEST_CASE("one-hot p column maps to a plane wave in lambda_p") {
    const auto g = make_grid(8, 32, {-4, 4}, {-4, 4});
    const std::size_t j0 = 21;
    KvnState s(g, Rep::QP);
    for (std::size_t i = 0; i < g.n_q(); ++i) s(i, j0) = 1.0;
    const auto t = to_representation(s, Rep::QLp);
    const double p0 = g.p(j0);
    const double modulus = g.dp() / std::sqrt(2 * kPi);
    for (std::size_t i = 0; i < g.n_q(); ++i)
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const cplx expected = modulus * std::polar(1.0, -p0 * g.lambda_p(j));
            CHECK(std::abs(t(i, j) - expected) < 1e-15);
        }
}

TEST_CASE("Gaussian is self-dual in (q, lambda_p)") {
    const auto g = make_grid(128, 128, {-10, 10}, {-10, 10});
    const auto s = standard_gaussian(g);
    const auto t = to_representation(s, Rep::QLp);
    const auto slow = direct_to(s, Rep::QLp);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n_q(); ++i)
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            const double q = g.q(i);
            const double l = g.lambda_p(j);
            const double closed = std::exp(-0.5 * (q * q + l * l)) / std::sqrt(kPi);
            err = std::max(err, std::abs(t(i, j) - closed));
            CHECK(std::abs(t(i, j) - slow[i * g.n_p() + j]) < 1e-13);
        }
    CHECK(err < 1e-12);
}

TEST_CASE("expectation values") {
    const auto g = make_grid(128, 128, {-10, 10}, {-10, 10});
    const auto s = standard_gaussian(g, 2.0, 0.0);
    CHECK(expectation(s, [](double, double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(expectation(s, [](double q, double) { return q; }) - 2.0) < 1e-8);
    const auto c = standard_gaussian(g);
    CHECK(std::abs(expectation(c, [](double, double p) { return p * p; }) - 0.5) < 1e-8);

    KvnState twice = c;
    twice *= 2.0;
    CHECK_THROWS_AS(expectation(twice, [](double, double) { return 1.0; }), std::domain_error);
}

TEST_CASE("lambda_p in QLp equals -i d/dp in QP") {
    const auto g = make_grid(128, 128, {-10, 10}, {-10, 10});
    auto s = KvnState::sample(g, Rep::QP, [](double q, double p) {
        const double r2 = (q - 0.5) * (q - 0.5) + (p + 0.3) * (p + 0.3);
        return std::exp(-0.5 * r2) * std::polar(1.0, 0.7 * p + 0.3 * q * p + 0.1 * p * p);
    });
    s *= 1.0 / s.norm();
    const double via_lambda = expectation(to_representation(s, Rep::QLp), [](double, double l) { return l; });
    const auto dp = spectral_derivative(s, Axis::Second);
    const cplx via_derivative = cplx(0.0, -1.0) * inner_product(s, dp);
    CHECK(std::abs(via_derivative.imag()) < 1e-10);
    CHECK(std::abs(via_lambda - via_derivative.real()) < 1e-10);
    // Closed form: <0.7 + 0.3 q + 0.2 p> = 0.7 + 0.15 - 0.06.
    CHECK(std::abs(via_lambda - 0.79) < 1e-8);
}

TEST_CASE("spectral derivative of a Gaussian") {
    const auto g = make_grid(128, 64, {-10, 10}, {-8, 8});
    const auto s = standard_gaussian(g);
    const auto dq = spectral_derivative(s, Axis::First);
    const auto dp = spectral_derivative(s, Axis::Second);
    double err = 0.0;
    for (std::size_t i = 0; i < g.n_q(); ++i)
        for (std::size_t j = 0; j < g.n_p(); ++j) {
            err = std::max(err, std::abs(dq(i, j) + g.q(i) * s(i, j)));
            err = std::max(err, std::abs(dp(i, j) + g.p(j) * s(i, j)));
        }
    CHECK(err < 1e-10);
}

TEST_CASE("q and p commute as multiplication operators") {
    // Dyadic grid values and small-integer amplitudes keep every product exact.
    const auto g = make_grid(16, 16, {-4, 4}, {-4, 4});
    auto values = oracle::random_field(g.size(), 5);
    for (auto& v : values) v = {std::round(8 * v.real()), std::round(8 * v.imag())};
    KvnState s(g, Rep::QP, values);
    KvnState a = s;
    KvnState b = s;
    multiply_pointwise(a, [](double q, double) { return cplx(q); });
    multiply_pointwise(a, [](double, double p) { return cplx(p); });
    multiply_pointwise(b, [](double, double p) { return cplx(p); });
    multiply_pointwise(b, [](double q, double) { return cplx(q); });
    CHECK(oracle::max_abs_diff(a.amp(), b.amp()) == 0.0);
}

TEST_CASE("state construction checks") {
    const auto g = make_grid(8, 8, {-4, 4}, {-4, 4});
    CHECK_THROWS_AS(KvnState(g, Rep::QP, std::vector<cplx>(10)), std::invalid_argument);
    KvnState s(g, Rep::QP);
    CHECK(s.is_finite());
    s(3, 3) = cplx(NAN, 0.0);
    CHECK_FALSE(s.is_finite());
}
