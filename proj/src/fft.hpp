#pragma once

#include <complex>
#include <cstddef>
#include <span>

// Thin wrapper over FFTW. Plans are created once per (length, sign) with
// FFTW_ESTIMATE so the arithmetic is identical from run to run.
namespace kvnsim::detail {

using cplx = std::complex<double>;
using cplx_ext = std::complex<long double>;

enum class FftSign : int { Forward = -1, Backward = +1 };

// Unnormalized in-place DFT: out[m] = sum_k exp(sign * 2 pi i k m / n) in[k].
void dft_inplace(cplx* data, std::size_t n, FftSign sign);

// Same transform in long double, for steppers whose round trip must not bias the norm.
void dft_inplace(cplx_ext* data, std::size_t n, FftSign sign);

// Row-major rows x cols array; transform every row (contiguous axis).
void dft_rows(std::span<cplx> data, std::size_t rows, std::size_t cols, FftSign sign);

// Row-major rows x cols array; transform every column (strided axis).
void dft_cols(std::span<cplx> data, std::size_t rows, std::size_t cols, FftSign sign);

}  // namespace kvnsim::detail
