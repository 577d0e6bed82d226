#include "kvnsim/potential.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kvnsim {

PotentialSpec PotentialSpec::free() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::harmonic(double omega) {
    if (!(omega > 0.0) || !std::isfinite(omega)) throw std::invalid_argument("harmonic omega must be positive");
    PotentialSpec v;
    v.kind_ = Kind::Harmonic;
    v.omega_ = omega;
    return v;
}

PotentialSpec PotentialSpec::quartic(double a, double b) {
    if (!std::isfinite(a)) throw std::invalid_argument("quartic a must be finite");
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("quartic b must be positive");
    PotentialSpec v;
    v.kind_ = Kind::Quartic;
    v.a_ = a;
    v.b_ = b;
    return v;
}

PotentialSpec PotentialSpec::tabulated(std::vector<double> values, std::vector<double> derivatives) {
    if (values.size() != derivatives.size())
        throw std::invalid_argument("tabulated potential needs V and V' of equal length");
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!std::isfinite(values[k]) || !std::isfinite(derivatives[k]))
            throw std::invalid_argument("tabulated potential contains non-finite entries");
    PotentialSpec v;
    v.kind_ = Kind::Tabulated;
    v.table_v_ = std::move(values);
    v.table_dv_ = std::move(derivatives);
    return v;
}

double PotentialSpec::value(double q) const {
    switch (kind_) {
        case Kind::Free: return 0.0;
        case Kind::Harmonic: return 0.5 * omega_ * omega_ * q * q;
        case Kind::Quartic: return 0.5 * a_ * q * q + 0.25 * b_ * q * q * q * q;
        case Kind::Tabulated: break;
    }
    throw std::logic_error("tabulated potential has no off-grid values");
}

double PotentialSpec::derivative(double q) const {
    switch (kind_) {
        case Kind::Free: return 0.0;
        case Kind::Harmonic: return omega_ * omega_ * q;
        case Kind::Quartic: return a_ * q + b_ * q * q * q;
        case Kind::Tabulated: break;
    }
    throw std::logic_error("tabulated potential has no off-grid derivative");
}

std::vector<double> PotentialSpec::values_on(const UniformAxis& q) const {
    if (kind_ == Kind::Tabulated) {
        if (table_v_.size() != q.n) throw std::invalid_argument("tabulated potential length does not match n_q");
        return table_v_;
    }
    std::vector<double> out(q.n);
    for (std::size_t i = 0; i < q.n; ++i) out[i] = value(q.at(i));
    return out;
}

std::vector<double> PotentialSpec::derivatives_on(const UniformAxis& q) const {
    if (kind_ == Kind::Tabulated) {
        if (table_dv_.size() != q.n) throw std::invalid_argument("tabulated potential length does not match n_q");
        return table_dv_;
    }
    std::vector<double> out(q.n);
    for (std::size_t i = 0; i < q.n; ++i) out[i] = derivative(q.at(i));
    return out;
}

std::string PotentialSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
        case Kind::Free: os << "free"; break;
        case Kind::Harmonic: os << "harmonic(omega=" << omega_ << ")"; break;
        case Kind::Quartic: os << "quartic(a=" << a_ << ", b=" << b_ << ")"; break;
        case Kind::Tabulated: os << "tabulated(n=" << table_v_.size() << ")"; break;
    }
    return os.str();
}

}  // namespace kvnsim
