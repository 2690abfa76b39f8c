#pragma once

#include <complex>

#include "ustfwi/core/fft.hpp"
#include "ustfwi/grid/grid.hpp"

namespace ustfwi {

enum class Stagger { none, plus, minus };
enum class SpectralWindow { none, blackman };

namespace detail {

/// Iterate a multi-index over `dims` in row-major order.
template <typename Fn>
void for_each_index(const Dims& dims, Fn&& fn) {
    Coord c(dims.size(), 0);
    const std::size_t n = total_size(dims);
    for (std::size_t idx = 0; idx < n; ++idx) {
        fn(idx, c);
        for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++c[ua] < dims[ua]) break;
            c[ua] = 0;
        }
    }
}

}  // namespace detail

/// Spectral partial derivative along `axis`, optionally evaluated on the grid
/// shifted by +-dx/2 (grid staggering folded into the derivative operator):
///   ifft( i*k_axis * kappa * exp(+-i*k_axis*dx/2) * fft(field) )
/// The imaginary residue of the inverse transform is discarded.
inline Field spectral_derivative(const Field& field, int axis, Stagger stagger,
                                 const KVectors& kvecs) {
    if (field.dims() != kvecs.kappa.dims())
        throw std::invalid_argument("field dims do not match the k-vector grid");
    const Dims& dims = field.dims();
    const auto ua = static_cast<std::size_t>(axis);
    const int n_axis = dims[ua];

    std::vector<std::complex<double>> spec(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) spec[i] = field[i];

    ComplexFft fft(dims);
    fft.forward_inplace(spec.data());

    const double half_dx = 0.5 * kvecs.dx[ua];
    detail::for_each_index(dims, [&](std::size_t idx, const Coord& c) {
        const double ka = kvecs.k[ua][static_cast<std::size_t>(c[ua])];
        std::complex<double> mult(0.0, ka * kvecs.kappa[idx]);
        if (stagger == Stagger::plus)
            mult *= std::exp(std::complex<double>(0.0, ka * half_dx));
        else if (stagger == Stagger::minus)
            mult *= std::exp(std::complex<double>(0.0, -ka * half_dx));
        else if (c[ua] == n_axis / 2)
            mult = 0.0;  // unpaired Nyquist bin of an odd-symbol operator
        spec[idx] *= mult;
    });

    fft.inverse_inplace(spec.data());
    Field out(dims);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
    return out;
}

/// Apply a Fourier multiplier m(|k|) given per spectral index, returning the
/// real part. Used for the fractional-Laplacian factors.
template <typename MultFn>
Field apply_isotropic_multiplier(const Field& field, const KVectors& kvecs, MultFn&& mult) {
    const Dims& dims = field.dims();
    std::vector<std::complex<double>> spec(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) spec[i] = field[i];
    ComplexFft fft(dims);
    fft.forward_inplace(spec.data());
    detail::for_each_index(dims, [&](std::size_t idx, const Coord& c) {
        double k2 = 0.0;
        for (std::size_t a = 0; a < dims.size(); ++a) {
            double ka = kvecs.k[a][static_cast<std::size_t>(c[a])];
            k2 += ka * ka;
        }
        spec[idx] *= mult(k2);
    });
    fft.inverse_inplace(spec.data());
    Field out(dims);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
    return out;
}

/// Shift a field by a fraction of a cell along one axis via the band-limited
/// interpolant (multiplication by exp(i*k*shift) in the spectrum).
inline Field fourier_shift(const Field& field, int axis, double shift_cells, const KVectors& kvecs) {
    const Dims& dims = field.dims();
    const auto ua = static_cast<std::size_t>(axis);
    std::vector<std::complex<double>> spec(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) spec[i] = field[i];
    ComplexFft fft(dims);
    fft.forward_inplace(spec.data());
    const double shift = shift_cells * kvecs.dx[ua];
    detail::for_each_index(dims, [&](std::size_t idx, const Coord& c) {
        const double ka = kvecs.k[ua][static_cast<std::size_t>(c[ua])];
        std::complex<double> mult = std::exp(std::complex<double>(0.0, ka * shift));
        if (c[ua] == dims[ua] / 2) mult = mult.real();  // keep the operator symmetric
        spec[idx] *= mult;
    });
    fft.inverse_inplace(spec.data());
    Field out(dims);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
    return out;
}

namespace detail {

/// Redistribute one spectral axis from size n to size m, splitting the
/// Nyquist bin on upsampling and folding it back on downsampling so that an
/// up-down round trip is exact.
inline void resample_spectrum_axis(std::vector<std::complex<double>>& spec, Dims& dims, int axis,
                                   int m) {
    const auto ua = static_cast<std::size_t>(axis);
    const int n = dims[ua];
    if (n == m) return;
    Dims new_dims = dims;
    new_dims[ua] = m;
    std::vector<std::complex<double>> out(total_size(new_dims), {0.0, 0.0});

    // row-major strides
    std::size_t post = 1;
    for (std::size_t a = ua + 1; a < dims.size(); ++a) post *= static_cast<std::size_t>(dims[a]);
    std::size_t pre = total_size(dims) / (post * static_cast<std::size_t>(n));

    auto deposit = [&](std::size_t ipre, std::size_t ipost, int freq, double w,
                       std::complex<double> v) {
        if (2 * std::abs(freq) > m) return;  // outside the target band
        int bin = freq;
        if (2 * std::abs(freq) == m) bin = m / 2;  // both half-band freqs share one bin
        if (bin < 0) bin += m;
        out[(ipre * static_cast<std::size_t>(m) + static_cast<std::size_t>(bin)) * post + ipost] +=
            w * v;
    };

    for (std::size_t ipre = 0; ipre < pre; ++ipre)
        for (int j = 0; j < n; ++j)
            for (std::size_t ipost = 0; ipost < post; ++ipost) {
                const std::complex<double> v =
                    spec[(ipre * static_cast<std::size_t>(n) + static_cast<std::size_t>(j)) * post +
                         ipost];
                if (j == n / 2) {
                    deposit(ipre, ipost, n / 2, 0.5, v);
                    deposit(ipre, ipost, -n / 2, 0.5, v);
                } else {
                    const int freq = (2 * j < n) ? j : j - n;
                    deposit(ipre, ipost, freq, 1.0, v);
                }
            }
    spec = std::move(out);
    dims = new_dims;
}

}  // namespace detail

/// Trigonometric resampling of a field to new dimensions by zero-padding or
/// truncating its spectrum, with an optional separable Blackman taper on the
/// target spectrum. All source and target dims must be even.
inline Field fourier_interpolate(const Field& field, const Dims& new_dims,
                                 SpectralWindow window = SpectralWindow::none) {
    if (new_dims.size() != field.dims().size())
        throw std::invalid_argument("target dimensionality mismatch");
    for (std::size_t a = 0; a < new_dims.size(); ++a) {
        if (new_dims[a] < 4 || new_dims[a] % 2 != 0)
            throw std::invalid_argument("target dims must be even and >= 4");
        if (field.dims()[a] % 2 != 0)
            throw std::invalid_argument("source dims must be even");
    }

    std::vector<std::complex<double>> spec(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) spec[i] = field[i];
    {
        ComplexFft fft(field.dims());
        fft.forward_inplace(spec.data());
    }

    Dims dims = field.dims();
    const std::size_t n_old = field.size();
    for (std::size_t a = 0; a < new_dims.size(); ++a)
        detail::resample_spectrum_axis(spec, dims, static_cast<int>(a), new_dims[a]);

    if (window == SpectralWindow::blackman) {
        detail::for_each_index(dims, [&](std::size_t idx, const Coord& c) {
            double w = 1.0;
            for (std::size_t a = 0; a < dims.size(); ++a) {
                int freq = c[a];
                if (2 * freq > dims[a]) freq -= dims[a];
                const double x = M_PI * static_cast<double>(freq) / (dims[a] / 2);
                w *= 0.42 + 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x);
            }
            spec[idx] *= w;
        });
    }

    const double scale = static_cast<double>(total_size(dims)) / static_cast<double>(n_old);
    for (auto& v : spec) v *= scale;

    {
        ComplexFft fft(dims);
        fft.inverse_inplace(spec.data());
    }
    Field out(dims);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec[i].real();
    return out;
}

}  // namespace ustfwi
