#pragma once

#include <stdexcept>

namespace kvnsim {

// Raised when a field picks up NaN or Inf during propagation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace kvnsim
