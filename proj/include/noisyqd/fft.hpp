#pragma once

// Thin RAII layer over FFTW3 complex transforms.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <mutex>
#include <span>
#include <stdexcept>

namespace noisyqd {

namespace detail {
// FFTW's planner is not reentrant; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace detail

// Unnormalized in-place complex transforms over n (rank 1) or n x n (rank 2)
// points, acting on an owned SIMD-aligned workspace. Callers load data into
// buffer(), transform, and read it back.
class FftPlan {
public:
    FftPlan(std::size_t n, int rank) : n_(n), rank_(rank) {
        if (rank != 1 && rank != 2) throw std::invalid_argument("FftPlan: rank must be 1 or 2");
        const std::size_t total = rank == 1 ? n : n * n;
        std::lock_guard lock(detail::fftw_planner_mutex());
        scratch_ = fftw_alloc_complex(total);
        const int ni = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE;
        if (rank == 1) {
            forward_ = fftw_plan_dft_1d(ni, scratch_, scratch_, FFTW_FORWARD, flags);
            backward_ = fftw_plan_dft_1d(ni, scratch_, scratch_, FFTW_BACKWARD, flags);
        } else {
            forward_ = fftw_plan_dft_2d(ni, ni, scratch_, scratch_, FFTW_FORWARD, flags);
            backward_ = fftw_plan_dft_2d(ni, ni, scratch_, scratch_, FFTW_BACKWARD, flags);
        }
        if (!forward_ || !backward_) throw std::runtime_error("FftPlan: FFTW planning failed");
    }

    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;

    ~FftPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(backward_);
        fftw_free(scratch_);
    }

    std::size_t size() const noexcept { return rank_ == 1 ? n_ : n_ * n_; }

    std::span<std::complex<double>> buffer() noexcept {
        return {reinterpret_cast<std::complex<double>*>(scratch_), size()};
    }

    void forward() { fftw_execute(forward_); }
    void backward() { fftw_execute(backward_); }

private:

    std::size_t n_;
    int rank_;
    fftw_complex* scratch_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan backward_ = nullptr;
};

}  // namespace noisyqd
