#include "fft.hpp"

#include "kvnsim/parallel.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

namespace kvnsim::detail {

namespace {

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, FftSign sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, static_cast<int>(sign));
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        // Planner is not thread-safe; the executor is.
        auto* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, static_cast<int>(sign),
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

class ExtendedPlanCache {
public:
    ~ExtendedPlanCache() {
        for (auto& [key, plan] : plans_) fftwl_destroy_plan(plan);
    }

    fftwl_plan get(std::size_t n, FftSign sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_pair(n, static_cast<int>(sign));
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* buf = fftwl_alloc_complex(n);
        fftwl_plan plan = fftwl_plan_dft_1d(static_cast<int>(n), buf, buf, static_cast<int>(sign),
                                            FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftwl_free(buf);
        if (plan == nullptr) throw std::runtime_error("FFTW failed to create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftwl_plan> plans_;
};

ExtendedPlanCache& extended_cache() {
    static ExtendedPlanCache instance;
    return instance;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void dft_inplace(cplx* data, std::size_t n, FftSign sign) {
    fftw_plan plan = cache().get(n, sign);
    fftw_execute_dft(plan, as_fftw(data), as_fftw(data));
}

void dft_inplace(cplx_ext* data, std::size_t n, FftSign sign) {
    fftwl_plan plan = extended_cache().get(n, sign);
    auto* p = reinterpret_cast<fftwl_complex*>(data);
    fftwl_execute_dft(plan, p, p);
}

void dft_rows(std::span<cplx> data, std::size_t rows, std::size_t cols, FftSign sign) {
    fftw_plan plan = cache().get(cols, sign);
    parallel_for(rows, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            cplx* row = data.data() + r * cols;
            fftw_execute_dft(plan, as_fftw(row), as_fftw(row));
        }
    });
}

void dft_cols(std::span<cplx> data, std::size_t rows, std::size_t cols, FftSign sign) {
    fftw_plan plan = cache().get(rows, sign);
    parallel_for(cols, [&](std::size_t begin, std::size_t end) {
        std::vector<cplx> column(rows);
        for (std::size_t c = begin; c < end; ++c) {
            for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
            fftw_execute_dft(plan, as_fftw(column.data()), as_fftw(column.data()));
            for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
        }
    });
}

}  // namespace kvnsim::detail
