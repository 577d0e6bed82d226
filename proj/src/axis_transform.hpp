#pragma once

#include "fft.hpp"
#include "kvnsim/phase_grid.hpp"

#include <span>
#include <vector>

namespace kvnsim::detail {

// Per-axis twiddles for the continuum-normalized transform
//   forward: f(lambda_m) = (dx/sqrt(2pi)) sum_k exp(-i x_k lambda_m) f(x_k)
//   inverse: f(x_k)      = (dl/sqrt(2pi)) sum_m exp(+i x_k lambda_m) f(lambda_m)
// Writing x_k lambda_m = x_min lambda_m + 2 pi k (m - n/2) / n reduces both
// to an FFT with a (-1)^k pre/post factor and an x_min phase on the dual side.
class AxisKernel {
public:
    explicit AxisKernel(const UniformAxis& axis);

    std::size_t size() const { return alternating_.size(); }

    void forward(cplx* data, std::size_t stride) const;
    void inverse(cplx* data, std::size_t stride) const;

    // Whole-array variants on a row-major rows x cols block.
    void forward_first(std::span<cplx> data, std::size_t rows, std::size_t cols) const;
    void inverse_first(std::span<cplx> data, std::size_t rows, std::size_t cols) const;
    void forward_second(std::span<cplx> data, std::size_t rows, std::size_t cols) const;
    void inverse_second(std::span<cplx> data, std::size_t rows, std::size_t cols) const;

private:
    std::vector<double> alternating_;   // (-1)^k
    std::vector<cplx> forward_post_;    // exp(-i x_min lambda_m) dx / sqrt(2pi)
    std::vector<cplx> inverse_pre_;     // exp(+i x_min lambda_m)
    double inverse_scale_;              // dlambda / sqrt(2pi)
};

}  // namespace kvnsim::detail
