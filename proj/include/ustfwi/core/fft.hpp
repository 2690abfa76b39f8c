#pragma once

#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "ustfwi/core/field.hpp"

namespace ustfwi {

/// FFTW plan creation is not thread-safe; execution of distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

/// Real-to-complex transform pair for one grid shape. Owns aligned buffers;
/// callers copy in and out, so plans can be reused across fields. One engine
/// per worker, never shared between threads.
class RealFft {
public:
    explicit RealFft(Dims dims) : dims_(std::move(dims)) {
        n_real_ = total_size(dims_);
        Dims half = dims_;
        half.back() = dims_.back() / 2 + 1;
        n_spec_ = total_size(half);
        real_ = static_cast<double*>(fftw_malloc(sizeof(double) * n_real_));
        spec_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_spec_));
        std::vector<int> n(dims_.begin(), dims_.end());
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft_r2c(static_cast<int>(n.size()), n.data(), real_, spec_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r(static_cast<int>(n.size()), n.data(), spec_, real_, FFTW_ESTIMATE);
    }
    ~RealFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    const Dims& dims() const { return dims_; }
    std::size_t real_size() const { return n_real_; }
    std::size_t spectrum_size() const { return n_spec_; }

    void forward(const double* in, std::complex<double>* out) {
        std::memcpy(real_, in, sizeof(double) * n_real_);
        fftw_execute(fwd_);
        std::memcpy(out, spec_, sizeof(fftw_complex) * n_spec_);
    }

    /// Inverse transform, normalized so inverse(forward(x)) == x.
    void inverse(const std::complex<double>* in, double* out) {
        std::memcpy(spec_, in, sizeof(fftw_complex) * n_spec_);
        fftw_execute(inv_);
        const double scale = 1.0 / static_cast<double>(n_real_);
        for (std::size_t i = 0; i < n_real_; ++i) out[i] = real_[i] * scale;
    }

private:
    Dims dims_;
    std::size_t n_real_ = 0, n_spec_ = 0;
    double* real_ = nullptr;
    fftw_complex* spec_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

/// Complex-to-complex transform for one shape. Used where the full spectrum
/// is more convenient than the Hermitian half (resampling, 1-D filtering).
class ComplexFft {
public:
    explicit ComplexFft(Dims dims) : dims_(std::move(dims)), n_(total_size(dims_)) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        std::vector<int> n(dims_.begin(), dims_.end());
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fwd_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf_, buf_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
        inv_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf_, buf_, FFTW_BACKWARD,
                             FFTW_ESTIMATE);
    }
    ~ComplexFft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(buf_);
    }
    ComplexFft(const ComplexFft&) = delete;
    ComplexFft& operator=(const ComplexFft&) = delete;

    std::size_t size() const { return n_; }

    void forward_inplace(std::complex<double>* data) {
        std::memcpy(buf_, data, sizeof(fftw_complex) * n_);
        fftw_execute(fwd_);
        std::memcpy(data, buf_, sizeof(fftw_complex) * n_);
    }

    /// Normalized inverse (by 1/N).
    void inverse_inplace(std::complex<double>* data) {
        std::memcpy(buf_, data, sizeof(fftw_complex) * n_);
        fftw_execute(inv_);
        const double scale = 1.0 / static_cast<double>(n_);
        auto* out = reinterpret_cast<std::complex<double>*>(buf_);
        for (std::size_t i = 0; i < n_; ++i) data[i] = out[i] * scale;
    }

private:
    Dims dims_;
    std::size_t n_ = 0;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_ = nullptr, inv_ = nullptr;
};

/// FFT-ordered angular wavenumbers 2*pi*m/(n*dx), m in FFT index convention
/// (0, 1, ..., n/2-1, -n/2, ..., -1).
inline std::vector<double> fft_wavenumbers(int n, double dx) {
    std::vector<double> k(static_cast<std::size_t>(n));
    const double dk = 2.0 * M_PI / (static_cast<double>(n) * dx);
    for (int m = 0; m < n; ++m) {
        int mm = (m <= n / 2 - 1) ? m : m - n;
        if (m == n / 2) mm = -n / 2;  // Nyquist bin carries the negative convention
        k[static_cast<std::size_t>(m)] = dk * mm;
    }
    return k;
}

}  // namespace ustfwi
