#include "axis_transform.hpp"

#include "kvnsim/parallel.hpp"

#include <cmath>

namespace kvnsim::detail {

AxisKernel::AxisKernel(const UniformAxis& axis)
    : alternating_(axis.n), forward_post_(axis.n), inverse_pre_(axis.n),
      inverse_scale_(axis.dual_step() / std::sqrt(2.0 * kPi)) {
    const double forward_scale = axis.step() / std::sqrt(2.0 * kPi);
    for (std::size_t k = 0; k < axis.n; ++k) {
        alternating_[k] = (k % 2 == 0) ? 1.0 : -1.0;
        const double phase = axis.min * axis.dual_at(k);
        forward_post_[k] = std::polar(forward_scale, -phase);
        inverse_pre_[k] = std::polar(1.0, phase);
    }
}

void AxisKernel::forward(cplx* data, std::size_t stride) const {
    const std::size_t n = size();
    std::vector<cplx> buf(n);
    for (std::size_t k = 0; k < n; ++k) buf[k] = data[k * stride] * alternating_[k];
    dft_inplace(buf.data(), n, FftSign::Forward);
    for (std::size_t m = 0; m < n; ++m) data[m * stride] = buf[m] * forward_post_[m];
}

void AxisKernel::inverse(cplx* data, std::size_t stride) const {
    const std::size_t n = size();
    std::vector<cplx> buf(n);
    for (std::size_t m = 0; m < n; ++m) buf[m] = data[m * stride] * inverse_pre_[m];
    dft_inplace(buf.data(), n, FftSign::Backward);
    for (std::size_t k = 0; k < n; ++k) data[k * stride] = buf[k] * (alternating_[k] * inverse_scale_);
}

void AxisKernel::forward_first(std::span<cplx> data, std::size_t rows, std::size_t cols) const {
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= alternating_[i];
    });
    dft_cols(data, rows, cols, FftSign::Forward);
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= forward_post_[i];
    });
}

void AxisKernel::inverse_first(std::span<cplx> data, std::size_t rows, std::size_t cols) const {
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= inverse_pre_[i];
    });
    dft_cols(data, rows, cols, FftSign::Backward);
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double s = alternating_[i] * inverse_scale_;
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= s;
        }
    });
}

void AxisKernel::forward_second(std::span<cplx> data, std::size_t rows, std::size_t cols) const {
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= alternating_[j];
    });
    dft_rows(data, rows, cols, FftSign::Forward);
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= forward_post_[j];
    });
}

void AxisKernel::inverse_second(std::span<cplx> data, std::size_t rows, std::size_t cols) const {
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= inverse_pre_[j];
    });
    dft_rows(data, rows, cols, FftSign::Backward);
    parallel_for(rows, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[i * cols + j] *= alternating_[j] * inverse_scale_;
    });
}

}  // namespace kvnsim::detail
