#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "ustfwi/core/fft.hpp"

namespace ustfwi {

namespace detail {

inline double bessel_i0(double x) {
    // power series; converges quickly for the beta values used here
    double sum = 1.0, term = 1.0;
    const double x2 = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= x2 / (static_cast<double>(k) * k);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

inline double kaiser_beta(double atten_db) {
    if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
    if (atten_db >= 21.0)
        return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
    return 0.0;
}

}  // namespace detail

/// Kaiser-window FIR low-pass taps. The transition band spans
/// [cutoff, (1+transition)*cutoff] with `atten_db` stopband attenuation;
/// taps are normalized to unit DC gain. Odd length.
inline std::vector<double> design_kaiser_lowpass(double dt, double cutoff_hz,
                                                 double transition = 0.1,
                                                 double atten_db = 60.0) {
    const double nyquist = 0.5 / dt;
    if (cutoff_hz <= 0.0 || cutoff_hz > nyquist)
        throw std::invalid_argument("cutoff must lie in (0, Nyquist]");
    const double width_hz = transition * cutoff_hz;
    const double dw = 2.0 * M_PI * width_hz * dt;  // transition width [rad/sample]
    int half = static_cast<int>(std::ceil((atten_db - 7.95) / (2.285 * dw) / 2.0));
    half = std::max(half, 4);
    const int len = 2 * half + 1;

    const double beta = detail::kaiser_beta(atten_db);
    const double i0b = detail::bessel_i0(beta);
    const double wc = 2.0 * M_PI * (cutoff_hz + 0.5 * width_hz) * dt;  // mid-transition edge

    std::vector<double> h(static_cast<std::size_t>(len));
    double sum = 0.0;
    for (int n = 0; n < len; ++n) {
        const double m = n - half;
        const double ideal = (m == 0.0) ? wc / M_PI : std::sin(wc * m) / (M_PI * m);
        const double r = m / half;
        const double win = detail::bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
        h[static_cast<std::size_t>(n)] = ideal * win;
        sum += h[static_cast<std::size_t>(n)];
    }
    for (double& v : h) v /= sum;  // exact unit gain at DC
    return h;
}

/// Linear convolution via FFT. Result length a.size() + b.size() - 1.
inline std::vector<double> fft_convolve(const std::vector<double>& a,
                                        const std::vector<double>& b) {
    const std::size_t n = a.size() + b.size() - 1;
    std::size_t nfft = 1;
    while (nfft < n) nfft *= 2;
    std::vector<std::complex<double>> fa(nfft, {0.0, 0.0}), fb(nfft, {0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    ComplexFft fft({static_cast<int>(nfft)});
    fft.forward_inplace(fa.data());
    fft.forward_inplace(fb.data());
    for (std::size_t i = 0; i < nfft; ++i) fa[i] *= fb[i];
    fft.inverse_inplace(fa.data());
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = fa[i].real();
    return out;
}

/// Zero-phase Kaiser-window low-pass of a uniformly sampled time series:
/// FIR filtering with the group delay compensated by a forward shift, so
/// transient signals keep their timing. The signal is zero-padded at both
/// ends.
inline std::vector<double> lowpass_filter_timeseries(const std::vector<double>& signal, double dt,
                                                     double cutoff_hz, double transition = 0.1,
                                                     double atten_db = 60.0) {
    if (signal.empty()) return {};
    const auto h = design_kaiser_lowpass(dt, cutoff_hz, transition, atten_db);
    const auto full = fft_convolve(signal, h);
    const std::size_t delay = (h.size() - 1) / 2;
    std::vector<double> out(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i) out[i] = full[i + delay];
    return out;
}

}  // namespace ustfwi
