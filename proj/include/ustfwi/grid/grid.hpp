#pragma once

#include <cmath>
#include <stdexcept>

#include "ustfwi/core/fft.hpp"
#include "ustfwi/core/field.hpp"

namespace ustfwi {

/// Regular collocation grid. `dims` are total per-axis point counts with the
/// absorbing layer included; the physical region of interest occupies
/// dims - 2*pml_size points per axis. pml_size 0 means a periodic axis.
struct Grid {
    Dims dims;
    std::vector<double> dx;  // per-axis spacing [m]
    double dt = 0.0;         // time step [s]
    int nt = 0;              // number of time samples
    Dims pml_size;           // per-axis layer thickness [points]
    double c_ref = 0.0;      // reference sound speed [m/s]

    int ndim() const { return static_cast<int>(dims.size()); }
    std::size_t points() const { return total_size(dims); }
    double min_dx() const {
        double m = dx[0];
        for (double v : dx) m = std::min(m, v);
        return m;
    }
    Dims interior_dims() const {
        Dims d = dims;
        for (std::size_t a = 0; a < d.size(); ++a) d[a] -= 2 * pml_size[a];
        return d;
    }

    void validate() const {
        if (dims.empty() || dims.size() > 3)
            throw std::invalid_argument("grid must be 1-, 2- or 3-dimensional");
        if (dx.size() != dims.size() || pml_size.size() != dims.size())
            throw std::invalid_argument("grid per-axis arrays must match dimensionality");
        for (std::size_t a = 0; a < dims.size(); ++a) {
            if (dims[a] < 4 || dims[a] % 2 != 0)
                throw std::invalid_argument("grid dims must be even and >= 4, got " +
                                            dims_to_string(dims));
            if (dx[a] <= 0.0) throw std::invalid_argument("grid spacing must be positive");
            if (pml_size[a] < 0 || 2 * pml_size[a] >= dims[a])
                throw std::invalid_argument("pml thickness does not fit the grid");
        }
        if (dt <= 0.0) throw std::invalid_argument("time step must be positive");
        if (nt < 2) throw std::invalid_argument("need at least two time samples");
        if (c_ref <= 0.0) throw std::invalid_argument("reference sound speed must be positive");
    }
};

namespace detail {
inline long largest_prime_factor(long n) {
    long largest = 1;
    for (long p = 2; p * p <= n; ++p) {
        while (n % p == 0) {
            largest = p;
            n /= p;
        }
    }
    return n > 1 ? n : largest;
}
}  // namespace detail

/// Pick the absorbing-layer thickness in [10, 20] that minimizes the largest
/// prime factor of the padded axis size (ties broken by the thinner layer),
/// which keeps the transforms fast.
inline Dims choose_pml_size(const Dims& interior_dims) {
    Dims out(interior_dims.size());
    for (std::size_t a = 0; a < interior_dims.size(); ++a) {
        if (interior_dims[a] < 4) throw std::invalid_argument("interior dims must be >= 4");
        int best_t = 10;
        long best_p = detail::largest_prime_factor(interior_dims[a] + 20);
        for (int t = 10; t <= 20; ++t) {
            long p = detail::largest_prime_factor(interior_dims[a] + 2L * t);
            if (p < best_p) {
                best_p = p;
                best_t = t;
            }
        }
        out[a] = best_t;
    }
    return out;
}

/// Convenience constructor: pad the interior with an automatically chosen
/// PML, set dt from the CFL condition against c_max, and cover `duration`
/// seconds of simulated time.
inline Grid make_grid(const Dims& interior_dims, double dx, double c_max, double duration,
                      double cfl = 0.3) {
    Grid g;
    g.pml_size = choose_pml_size(interior_dims);
    g.dims = interior_dims;
    for (std::size_t a = 0; a < g.dims.size(); ++a) g.dims[a] += 2 * g.pml_size[a];
    g.dx.assign(g.dims.size(), dx);
    g.c_ref = c_max;
    g.dt = cfl * dx / c_max;
    g.nt = static_cast<int>(std::ceil(duration / g.dt)) + 1;
    g.validate();
    return g;
}

/// Unnormalized sinc, sin(x)/x with sinc(0) = 1.
inline double sinc(double x) {
    if (std::abs(x) < 1e-8) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}

/// Per-axis FFT-ordered wavenumbers plus the k-space correction field
/// kappa = sinc(c_ref*dt/2 * |k|).
struct KVectors {
    std::vector<std::vector<double>> k;  // per-axis, FFT ordering [rad/m]
    Field kappa;                         // over the full spectrum grid
    std::vector<double> dx;              // spacing, needed for stagger phases
};

inline KVectors make_kvectors(const Grid& g) {
    g.validate();
    KVectors kv;
    kv.dx = g.dx;
    kv.k.resize(g.dims.size());
    for (std::size_t a = 0; a < g.dims.size(); ++a)
        kv.k[a] = fft_wavenumbers(g.dims[a], g.dx[a]);

    kv.kappa = Field(g.dims);
    const int nd = g.ndim();
    Coord c(static_cast<std::size_t>(nd), 0);
    for (std::size_t idx = 0; idx < kv.kappa.size(); ++idx) {
        double k2 = 0.0;
        for (int a = 0; a < nd; ++a) {
            double ka = kv.k[static_cast<std::size_t>(a)][static_cast<std::size_t>(c[a])];
            k2 += ka * ka;
        }
        kv.kappa[idx] = sinc(0.5 * g.c_ref * g.dt * std::sqrt(k2));
        for (int a = nd - 1; a >= 0; --a) {
            if (++c[static_cast<std::size_t>(a)] < g.dims[static_cast<std::size_t>(a)]) break;
            c[static_cast<std::size_t>(a)] = 0;
        }
    }
    return kv;
}

/// Split-form absorbing-layer multipliers exp(-sigma*dt/2) on the regular and
/// half-cell staggered grids. sigma ramps quartically from zero at the inner
/// edge to alpha nepers per grid point at the outer boundary.
struct PmlProfiles {
    std::vector<std::vector<double>> regular;
    std::vector<std::vector<double>> staggered;
};

inline PmlProfiles make_pml(const Grid& g, double alpha = 2.0) {
    PmlProfiles pml;
    pml.regular.resize(g.dims.size());
    pml.staggered.resize(g.dims.size());
    for (std::size_t a = 0; a < g.dims.size(); ++a) {
        const int n = g.dims[a];
        const int layer = g.pml_size[a];
        auto profile_at = [&](double u) {
            if (layer < 2) return 1.0;
            double ramp = 0.0;
            const double inner = static_cast<double>(layer - 1);
            if (u < inner) ramp = (inner - u) / inner;
            double u_right = static_cast<double>(n - 1) - u;
            if (u_right < inner) ramp = std::max(ramp, (inner - u_right) / inner);
            const double sigma = alpha * (g.c_ref / g.dx[a]) * std::pow(ramp, 4);
            return std::exp(-sigma * g.dt / 2.0);
        };
        pml.regular[a].resize(static_cast<std::size_t>(n));
        pml.staggered[a].resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            pml.regular[a][static_cast<std::size_t>(i)] = profile_at(i);
            pml.staggered[a][static_cast<std::size_t>(i)] = profile_at(i + 0.5);
        }
    }
    return pml;
}

}  // namespace ustfwi
