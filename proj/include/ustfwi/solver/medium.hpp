#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ustfwi/core/errors.hpp"
#include "ustfwi/core/field.hpp"
#include "ustfwi/grid/grid.hpp"

namespace ustfwi {

/// dB/(MHz^y cm) -> Np (rad/s)^-y / m, the SI prefactor used by the
/// fractional-Laplacian absorption terms.
inline double db2neper(double alpha_db, double y) {
    return 100.0 * alpha_db * (std::log(10.0) / 20.0) / std::pow(2.0 * M_PI * 1e6, y);
}

inline double neper2db(double alpha_np, double y) {
    return alpha_np / (100.0 * (std::log(10.0) / 20.0) / std::pow(2.0 * M_PI * 1e6, y));
}

/// Acoustic material fields. alpha0 is kept in dB/(MHz^y cm) and converted
/// where used. gamma marks the reconstruction region; sources and sensors
/// must lie outside it.
struct Medium {
    Field c0;      // sound speed [m/s]
    Field rho0;    // ambient density [kg/m^3]
    Field alpha0;  // power-law prefactor [dB/(MHz^y cm)]
    double y = 1.5;
    Mask gamma;
    double c0_min = 1350.0;
    double c0_max = 1800.0;

    bool absorbing() const {
        for (std::size_t i = 0; i < alpha0.size(); ++i)
            if (alpha0[i] != 0.0) return true;
        return false;
    }

    void validate(const Grid& grid, bool dispersion_active = true) const {
        if (c0.dims() != grid.dims || rho0.dims() != grid.dims || alpha0.dims() != grid.dims)
            throw std::invalid_argument("medium fields must match the grid");
        if (!gamma.empty() && gamma.dims() != grid.dims)
            throw std::invalid_argument("gamma mask must match the grid");
        for (std::size_t i = 0; i < c0.size(); ++i) {
            if (c0[i] < c0_min || c0[i] > c0_max)
                throw std::invalid_argument("c0 outside configured bounds");
            if (rho0[i] <= 0.0) throw std::invalid_argument("rho0 must be positive");
            if (alpha0[i] < 0.0) throw std::invalid_argument("alpha0 must be non-negative");
        }
        if (y <= 1.0 || y >= 3.0) throw std::invalid_argument("power-law exponent must be in (1,3)");
        if (dispersion_active && y == 2.0 && absorbing())
            throw std::invalid_argument(
                "y = 2 requires the dispersion term to be disabled (tan(pi*y/2) crosses zero "
                "and the power-law dispersion relation degenerates)");
    }
};

inline Medium make_homogeneous_medium(const Grid& grid, double c0 = 1500.0, double rho0 = 1000.0,
                                      double alpha0 = 0.0, double y = 1.5) {
    Medium m;
    m.c0 = Field(grid.dims, c0);
    m.rho0 = Field(grid.dims, rho0);
    m.alpha0 = Field(grid.dims, alpha0);
    m.y = y;
    m.c0_min = std::min(1350.0, c0);
    m.c0_max = std::max(1800.0, c0);
    return m;
}

/// Point sources with individual pressure time series. Signals may be
/// shorter than the simulation; they read as zero past their end.
struct SourceSet {
    std::vector<std::size_t> positions;        // flat grid indices
    std::vector<std::vector<double>> signals;  // [n_sources][<= nt]
    double support_duration = 0.0;             // T_s [s]

    std::size_t count() const { return positions.size(); }
    double sample(std::size_t src, int n) const {
        const auto& s = signals[src];
        return (n >= 0 && static_cast<std::size_t>(n) < s.size()) ? s[static_cast<std::size_t>(n)]
                                                                  : 0.0;
    }
};

/// Point receivers (nearest-grid-point sampling), fixed across recordings.
struct SensorArray {
    std::vector<std::size_t> positions;  // flat grid indices
    std::size_t count() const { return positions.size(); }
};

/// Recorded pressure samples, one row per sensor channel.
struct SensorData {
    std::vector<double> samples;  // [n_sensors * nt], sensor-major
    int n_sensors = 0;
    int nt = 0;
    double dt = 0.0;
    double t0 = 0.0;

    std::span<double> trace(int s) {
        return {samples.data() + static_cast<std::size_t>(s) * nt, static_cast<std::size_t>(nt)};
    }
    std::span<const double> trace(int s) const {
        return {samples.data() + static_cast<std::size_t>(s) * nt, static_cast<std::size_t>(nt)};
    }
    double& at(int s, int n) { return samples[static_cast<std::size_t>(s) * nt + n]; }
    double at(int s, int n) const { return samples[static_cast<std::size_t>(s) * nt + n]; }

    void check_finite() const {
        for (double v : samples)
            if (!std::isfinite(v)) throw NumericalError("sensor data contains non-finite values");
    }
};

/// Pressure history on a shell of grid points on the inner surface of the
/// reconstruction region. Step-major storage.
struct BoundaryTrace {
    std::vector<std::size_t> layer_indices;
    std::vector<double> values;  // [nt * n_layer]
    int nt = 0;

    bool empty() const { return layer_indices.empty(); }
    std::span<double> at_step(int n) {
        return {values.data() + static_cast<std::size_t>(n) * layer_indices.size(),
                layer_indices.size()};
    }
    std::span<const double> at_step(int n) const {
        return {values.data() + static_cast<std::size_t>(n) * layer_indices.size(),
                layer_indices.size()};
    }
    std::size_t bytes() const { return values.size() * sizeof(double); }
};

/// One face-connected erosion pass: keeps points whose axis neighbors all
/// belong to the mask. Grid borders count as outside.
inline Mask erode(const Mask& mask) {
    const Dims& dims = mask.dims();
    Mask out(dims);
    std::vector<std::size_t> strides(dims.size(), 1);
    for (int a = static_cast<int>(dims.size()) - 2; a >= 0; --a)
        strides[static_cast<std::size_t>(a)] =
            strides[static_cast<std::size_t>(a) + 1] * static_cast<std::size_t>(dims[a + 1]);

    Coord c(dims.size(), 0);
    for (std::size_t idx = 0; idx < mask.size(); ++idx) {
        if (mask[idx]) {
            bool keep = true;
            for (std::size_t a = 0; a < dims.size() && keep; ++a) {
                if (c[a] == 0 || c[a] == dims[a] - 1) {
                    keep = false;
                    break;
                }
                if (!mask[idx - strides[a]] || !mask[idx + strides[a]]) keep = false;
            }
            out.set(idx, keep);
        }
        for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++c[ua] < dims[ua]) break;
            c[ua] = 0;
        }
    }
    return out;
}

/// Shell of `thickness` erosion layers on the inner surface of the mask.
inline std::vector<std::size_t> shell_indices(const Mask& mask, int thickness) {
    if (thickness < 1) throw std::invalid_argument("shell thickness must be >= 1");
    Mask inner = mask;
    for (int t = 0; t < thickness; ++t) inner = erode(inner);
    if (inner.count() == 0 && thickness > 1)
        throw std::invalid_argument("shell thickness exceeds the mask extent");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && !inner[i]) out.push_back(i);
    return out;
}

/// Disc (2D) or ball (3D) mask around a center given in grid points.
inline Mask ball_mask(const Dims& dims, const std::vector<double>& center, double radius_points) {
    Mask m(dims);
    Coord c(dims.size(), 0);
    for (std::size_t idx = 0; idx < m.size(); ++idx) {
        double r2 = 0.0;
        for (std::size_t a = 0; a < dims.size(); ++a) {
            const double d = c[a] - center[a];
            r2 += d * d;
        }
        m.set(idx, r2 <= radius_points * radius_points);
        for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
            auto ua = static_cast<std::size_t>(a);
            if (++c[ua] < dims[ua]) break;
            c[ua] = 0;
        }
    }
    return m;
}

}  // namespace ustfwi
