#pragma once

#include "kvnsim/phase_grid.hpp"

#include <string>
#include <vector>

namespace kvnsim {

/// V(q) for H = p^2/2 + V(q).
///   Free:      V = 0
///   Harmonic:  V = omega^2 q^2 / 2
///   Quartic:   V = a q^2 / 2 + b q^4 / 4
///   Tabulated: V and V' supplied on the q axis (never differenced)
class PotentialSpec {
public:
    enum class Kind { Free, Harmonic, Quartic, Tabulated };

    static PotentialSpec free();
    static PotentialSpec harmonic(double omega);
    static PotentialSpec quartic(double a, double b);
    static PotentialSpec tabulated(std::vector<double> values, std::vector<double> derivatives);

    Kind kind() const { return kind_; }
    bool analytic() const { return kind_ != Kind::Tabulated; }
    double omega() const { return omega_; }
    double a() const { return a_; }
    double b() const { return b_; }

    /// Analytic kinds only; Tabulated throws std::logic_error.
    double value(double q) const;
    double derivative(double q) const;

    /// V and V' on every point of the q axis. Tabulated data must match its length.
    std::vector<double> values_on(const UniformAxis& q) const;
    std::vector<double> derivatives_on(const UniformAxis& q) const;

    std::string describe() const;

private:
    Kind kind_ = Kind::Free;
    double omega_ = 0.0;
    double a_ = 0.0;
    double b_ = 0.0;
    std::vector<double> table_v_;
    std::vector<double> table_dv_;
};

}  // namespace kvnsim
