#pragma once

#include <complex>
#include <vector>

#include "ustfwi/core/errors.hpp"
#include "ustfwi/core/fft.hpp"
#include "ustfwi/grid/grid.hpp"
#include "ustfwi/grid/spectral.hpp"
#include "ustfwi/solver/medium.hpp"

namespace ustfwi {

/// Half-spectrum (r2c) spectral operator set bound to one grid. Holds the
/// precomputed k-space derivative multipliers and fractional-Laplacian
/// factors. One engine per worker thread.
class SpectralEngine {
public:
    explicit SpectralEngine(const Grid& grid)
        : grid_(grid), fft_(grid.dims), spec_in_(fft_.spectrum_size()), spec_tmp_(fft_.spectrum_size()) {
        const int nd = grid_.ndim();
        spec_dims_ = grid_.dims;
        spec_dims_.back() = grid_.dims.back() / 2 + 1;

        std::vector<std::vector<double>> k(static_cast<std::size_t>(nd));
        for (int a = 0; a < nd; ++a)
            k[static_cast<std::size_t>(a)] = fft_wavenumbers(grid_.dims[static_cast<std::size_t>(a)],
                                                             grid_.dx[static_cast<std::size_t>(a)]);

        // per-bin axis coordinates and |k|^2 over the half spectrum
        const std::size_t nspec = fft_.spectrum_size();
        axis_coord_.assign(static_cast<std::size_t>(nd), std::vector<int>(nspec));
        k2_.assign(nspec, 0.0);
        kappa_.assign(nspec, 0.0);
        detail::for_each_index(spec_dims_, [&](std::size_t idx, const Coord& c) {
            double k2 = 0.0;
            for (int a = 0; a < nd; ++a) {
                axis_coord_[static_cast<std::size_t>(a)][idx] = c[static_cast<std::size_t>(a)];
                const double ka = k[static_cast<std::size_t>(a)][static_cast<std::size_t>(c[a])];
                k2 += ka * ka;
            }
            k2_[idx] = k2;
            kappa_[idx] = sinc(0.5 * grid_.c_ref * grid_.dt * std::sqrt(k2));
        });

        // derivative multipliers i*k*kappa*exp(+-i*k*dx/2); the self-paired
        // Nyquist bins must stay real (zero for the unstaggered operator)
        for (int s = 0; s < 3; ++s)
            deriv_mult_[s].assign(static_cast<std::size_t>(nd),
                                  std::vector<std::complex<double>>(nspec));
        for (int s = 0; s < 2; ++s)
            shift_mult_[s].assign(static_cast<std::size_t>(nd),
                                  std::vector<std::complex<double>>(nspec));
        for (int a = 0; a < nd; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const int n_axis = grid_.dims[ua];
            const double half_dx = 0.5 * grid_.dx[ua];
            for (std::size_t idx = 0; idx < nspec; ++idx) {
                const double ka = k[ua][static_cast<std::size_t>(axis_coord_[ua][idx])];
                const std::complex<double> base(0.0, ka * kappa_[idx]);
                const bool nyquist = axis_coord_[ua][idx] == n_axis / 2;
                auto& none = deriv_mult_[static_cast<int>(Stagger::none)][ua][idx];
                auto& plus = deriv_mult_[static_cast<int>(Stagger::plus)][ua][idx];
                auto& minus = deriv_mult_[static_cast<int>(Stagger::minus)][ua][idx];
                none = nyquist ? std::complex<double>(0.0) : base;
                plus = base * std::exp(std::complex<double>(0.0, ka * half_dx));
                minus = base * std::exp(std::complex<double>(0.0, -ka * half_dx));
                const std::complex<double> fwd = std::exp(std::complex<double>(0.0, ka * half_dx));
                shift_mult_[0][ua][idx] = fwd;
                shift_mult_[1][ua][idx] = std::conj(fwd);
                if (nyquist) {
                    plus = plus.real();
                    minus = minus.real();
                    shift_mult_[0][ua][idx] = fwd.real();
                    shift_mult_[1][ua][idx] = fwd.real();
                }
            }
        }
    }

    const Grid& grid() const { return grid_; }
    std::size_t spectrum_size() const { return k2_.size(); }
    const std::vector<double>& k2() const { return k2_; }
    const std::vector<double>& kappa() const { return kappa_; }

    /// |k|^(2e) over the half spectrum, with the k = 0 bin zeroed whenever
    /// the exponent is not positive (fractional Laplacian convention).
    std::vector<double> power_multiplier(double exponent_of_k) const {
        std::vector<double> m(k2_.size());
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = (k2_[i] == 0.0) ? (exponent_of_k > 0.0 ? 0.0 : (exponent_of_k == 0.0 ? 1.0 : 0.0))
                                   : std::pow(k2_[i], 0.5 * exponent_of_k);
        return m;
    }

    /// log(|k|^2) with the k = 0 bin zeroed.
    std::vector<double> log_k2_multiplier() const {
        std::vector<double> m(k2_.size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = (k2_[i] == 0.0) ? 0.0 : std::log(k2_[i]);
        return m;
    }

    void load(const Field& f) { fft_.forward(f.data(), spec_in_.data()); }

    void deriv_from_loaded(int axis, Stagger st, Field& out) {
        const auto& mult = deriv_mult_[static_cast<int>(st)][static_cast<std::size_t>(axis)];
        for (std::size_t i = 0; i < spec_in_.size(); ++i) spec_tmp_[i] = spec_in_[i] * mult[i];
        ensure_out(out);
        fft_.inverse(spec_tmp_.data(), out.data());
    }

    void multiplier_from_loaded(const std::vector<double>& mult, Field& out) {
        for (std::size_t i = 0; i < spec_in_.size(); ++i) spec_tmp_[i] = spec_in_[i] * mult[i];
        ensure_out(out);
        fft_.inverse(spec_tmp_.data(), out.data());
    }

    void derivative(const Field& f, int axis, Stagger st, Field& out) {
        load(f);
        deriv_from_loaded(axis, st, out);
    }

    void apply_multiplier(const Field& f, const std::vector<double>& mult, Field& out) {
        load(f);
        multiplier_from_loaded(mult, out);
    }

    /// Band-limited interpolation onto the grid shifted by +-dx/2 along one
    /// axis (direction +1 or -1).
    void half_shift(const Field& f, int axis, int direction, Field& out) {
        load(f);
        const auto& mult = shift_mult_[direction > 0 ? 0 : 1][static_cast<std::size_t>(axis)];
        for (std::size_t i = 0; i < spec_in_.size(); ++i) spec_tmp_[i] = spec_in_[i] * mult[i];
        ensure_out(out);
        fft_.inverse(spec_tmp_.data(), out.data());
    }

private:
    void ensure_out(Field& out) {
        if (out.dims() != grid_.dims) out = Field(grid_.dims);
    }

    Grid grid_;
    Dims spec_dims_;
    RealFft fft_;
    std::vector<std::complex<double>> spec_in_, spec_tmp_;
    std::vector<std::vector<int>> axis_coord_;
    std::vector<double> k2_, kappa_;
    std::vector<std::vector<std::complex<double>>> deriv_mult_[3];
    std::vector<std::vector<std::complex<double>>> shift_mult_[2];
};

/// Multiply a field by a per-axis 1-D profile broadcast over the other axes.
inline void apply_axis_profile(Field& f, const std::vector<double>& w, int axis) {
    const Dims& dims = f.dims();
    const auto ua = static_cast<std::size_t>(axis);
    std::size_t post = 1;
    for (std::size_t a = ua + 1; a < dims.size(); ++a) post *= static_cast<std::size_t>(dims[a]);
    const std::size_t n_axis = static_cast<std::size_t>(dims[ua]);
    const std::size_t pre = f.size() / (post * n_axis);
    double* data = f.data();
    for (std::size_t ip = 0; ip < pre; ++ip)
        for (std::size_t j = 0; j < n_axis; ++j) {
            const double wj = w[j];
            double* row = data + (ip * n_axis + j) * post;
            for (std::size_t q = 0; q < post; ++q) row[q] *= wj;
        }
}

struct StepperOptions {
    bool pml_enabled = true;
    /// +1 forward/adjoint, -1 for the time-reversal replay (absorption term
    /// flipped, dispersion unchanged).
    double absorption_sign = 1.0;
    /// Disable the dispersion (tan) term; forced when y == 2.
    bool dispersion_enabled = true;
};

/// First-order k-space leapfrog update (momentum, mass, pressure-density)
/// with split-field PML and optional power-law absorption. Exposes the raw
/// state so gradient drivers can inject sources and enforce shell values.
class WaveStepper {
public:
    WaveStepper(const Grid& grid, const Medium& medium, SpectralEngine& engine,
                StepperOptions options = {})
        : grid_(grid), engine_(engine), opt_(options) {
        const int nd = grid_.ndim();
        for (std::size_t a = 1; a < grid_.dx.size(); ++a)
            if (grid_.dx[a] != grid_.dx[0])
                throw std::invalid_argument("wave stepper requires uniform grid spacing");
        dispersion_on_ = opt_.dispersion_enabled && medium.y != 2.0;
        medium.validate(grid_, dispersion_on_);

        double c_max = 0.0;
        for (std::size_t i = 0; i < medium.c0.size(); ++i) c_max = std::max(c_max, medium.c0[i]);
        if (c_max * grid_.dt / grid_.min_dx() > 2.0 / M_PI * (1.0 + 1e-12))
            throw NumericalError("CFL violation: dt exceeds 2/pi * dx / c_max");

        const auto pml = make_pml(grid_);
        pml_reg_.resize(static_cast<std::size_t>(nd));
        pml_stag_.resize(static_cast<std::size_t>(nd));
        for (int a = 0; a < nd; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            if (opt_.pml_enabled && grid_.pml_size[ua] > 0) {
                pml_reg_[ua] = pml.regular[ua];
                pml_stag_[ua] = pml.staggered[ua];
            } else {
                pml_reg_[ua].assign(static_cast<std::size_t>(grid_.dims[ua]), 1.0);
                pml_stag_[ua].assign(static_cast<std::size_t>(grid_.dims[ua]), 1.0);
            }
        }

        c0_sq_ = Field(grid_.dims);
        for (std::size_t i = 0; i < c0_sq_.size(); ++i)
            c0_sq_[i] = medium.c0[i] * medium.c0[i];
        dt_rho0_ = Field(grid_.dims);
        for (std::size_t i = 0; i < dt_rho0_.size(); ++i) dt_rho0_[i] = grid_.dt * medium.rho0[i];

        // staggered density: band-limited interpolant sampled half a cell up
        const auto kv = make_kvectors(grid_);
        dt_over_rho0_stag_.resize(static_cast<std::size_t>(nd));
        for (int a = 0; a < nd; ++a) {
            Field shifted = fourier_shift(medium.rho0, a, 0.5, kv);
            Field f(grid_.dims);
            for (std::size_t i = 0; i < f.size(); ++i) {
                if (shifted[i] <= 0.0)
                    throw std::invalid_argument("staggered density must stay positive");
                f[i] = grid_.dt / shifted[i];
            }
            dt_over_rho0_stag_[static_cast<std::size_t>(a)] = std::move(f);
        }

        absorbing_ = medium.absorbing();
        if (absorbing_) {
            const double y = medium.y;
            nabla1_ = engine_.power_multiplier(y - 2.0);
            nabla2_ = engine_.power_multiplier(y - 1.0);
            tau_ = Field(grid_.dims);
            eta_ = Field(grid_.dims);
            const double tan_term = dispersion_on_ ? std::tan(M_PI * y / 2.0) : 0.0;
            for (std::size_t i = 0; i < tau_.size(); ++i) {
                const double a0 = db2neper(medium.alpha0[i], y);
                tau_[i] = -2.0 * a0 * std::pow(medium.c0[i], y - 1.0) * opt_.absorption_sign;
                eta_[i] = 2.0 * a0 * std::pow(medium.c0[i], y) * tan_term;
            }
        }

        v_.assign(static_cast<std::size_t>(nd), Field(grid_.dims));
        rho_.assign(static_cast<std::size_t>(nd), Field(grid_.dims));
        du_.assign(static_cast<std::size_t>(nd), Field(grid_.dims));
        p_ = Field(grid_.dims);
        grad_p_.assign(static_cast<std::size_t>(nd), Field(grid_.dims));
        scratch_ = Field(grid_.dims);
        if (absorbing_) {
            absorb_in_ = Field(grid_.dims);
            absorb_out_ = Field(grid_.dims);
        }
        step_index_ = 0;
    }

    void reset() {
        for (auto& f : v_) f.fill(0.0);
        for (auto& f : rho_) f.fill(0.0);
        p_.fill(0.0);
        step_index_ = 0;
    }

    /// Velocity and density updates of one leapfrog step. Sources and shell
    /// conditions are applied between this and `update_pressure`.
    void update_velocity_density() {
        const int nd = grid_.ndim();
        engine_.load(p_);
        for (int a = 0; a < nd; ++a)
            engine_.deriv_from_loaded(a, Stagger::plus, grad_p_[static_cast<std::size_t>(a)]);
        for (int a = 0; a < nd; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            Field& va = v_[ua];
            const Field& ga = grad_p_[ua];
            const Field& inv_rho = dt_over_rho0_stag_[ua];
            apply_axis_profile(va, pml_stag_[ua], a);
            for (std::size_t i = 0; i < va.size(); ++i) va[i] -= inv_rho[i] * ga[i];
            apply_axis_profile(va, pml_stag_[ua], a);
        }
        for (int a = 0; a < nd; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            engine_.derivative(v_[ua], a, Stagger::minus, du_[ua]);
            Field& ra = rho_[ua];
            apply_axis_profile(ra, pml_reg_[ua], a);
            for (std::size_t i = 0; i < ra.size(); ++i) ra[i] -= dt_rho0_[i] * du_[ua][i];
            apply_axis_profile(ra, pml_reg_[ua], a);
        }
    }

    /// Add a mass source: each split density receives
    /// amp * 2*dt / (ndim * dx * c0(x)).
    void inject_mass_source(std::size_t flat_index, double amplitude) {
        const double scale = 2.0 * grid_.dt /
                             (grid_.ndim() * grid_.dx[0] * std::sqrt(c0_sq_[flat_index]));
        for (auto& ra : rho_) ra[flat_index] += amplitude * scale;
    }

    /// Dirichlet shell condition: overwrite every split density on the shell
    /// with the recorded value (already scaled from pressure to density).
    void enforce_shell(const std::vector<std::size_t>& shell, std::span<const double> values) {
        for (std::size_t j = 0; j < shell.size(); ++j)
            for (auto& ra : rho_) ra[shell[j]] = values[j];
    }

    /// Recompute p = c0^2 * sum(rho) from the current split densities
    /// (used to seed the time-reversal replay).
    void refresh_pressure_from_density() {
        scratch_.fill(0.0);
        for (const auto& ra : rho_)
            for (std::size_t i = 0; i < scratch_.size(); ++i) scratch_[i] += ra[i];
        for (std::size_t i = 0; i < p_.size(); ++i) p_[i] = c0_sq_[i] * scratch_[i];
    }

    void update_pressure() {
        const int nd = grid_.ndim();
        scratch_.fill(0.0);
        for (int a = 0; a < nd; ++a) {
            const Field& ra = rho_[static_cast<std::size_t>(a)];
            for (std::size_t i = 0; i < scratch_.size(); ++i) scratch_[i] += ra[i];
        }
        if (!absorbing_) {
            for (std::size_t i = 0; i < p_.size(); ++i) p_[i] = c0_sq_[i] * scratch_[i];
        } else {
            // rho0 * div(v) stands in for -d(rho)/dt in the absorption term
            absorb_in_.fill(0.0);
            for (int a = 0; a < nd; ++a) {
                const Field& da = du_[static_cast<std::size_t>(a)];
                for (std::size_t i = 0; i < absorb_in_.size(); ++i)
                    absorb_in_[i] += (dt_rho0_[i] / grid_.dt) * da[i];
            }
            engine_.apply_multiplier(absorb_in_, nabla1_, absorb_out_);
            for (std::size_t i = 0; i < p_.size(); ++i)
                p_[i] = c0_sq_[i] * (scratch_[i] + tau_[i] * absorb_out_[i]);
            if (dispersion_on_) {
                engine_.apply_multiplier(scratch_, nabla2_, absorb_out_);
                for (std::size_t i = 0; i < p_.size(); ++i)
                    p_[i] -= c0_sq_[i] * eta_[i] * absorb_out_[i];
            }
        }
        ++step_index_;
        if ((step_index_ & 63) == 0 && !std::isfinite(p_[0]))
            throw NumericalError("pressure field diverged at step " + std::to_string(step_index_));
    }

    const Field& pressure() const { return p_; }
    const std::vector<Field>& velocity() const { return v_; }
    const Field& c0_squared() const { return c0_sq_; }
    int step_index() const { return step_index_; }
    bool absorbing() const { return absorbing_; }

    /// Energy diagnostic helpers: rho0 and the compressibility weight.
    double kinetic_energy(const std::vector<Field>& v_prev) const {
        double e = 0.0;
        for (std::size_t a = 0; a < v_.size(); ++a)
            for (std::size_t i = 0; i < p_.size(); ++i)
                e += 0.5 * (dt_rho0_[i] / grid_.dt) * v_[a][i] * v_prev[a][i];
        return e;
    }
    double potential_energy(const Field& p) const {
        double e = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            e += 0.5 * p[i] * p[i] / ((dt_rho0_[i] / grid_.dt) * c0_sq_[i]);
        return e;
    }

private:
    Grid grid_;
    SpectralEngine& engine_;
    StepperOptions opt_;
    bool absorbing_ = false;
    bool dispersion_on_ = true;

    std::vector<std::vector<double>> pml_reg_, pml_stag_;
    Field c0_sq_, dt_rho0_;
    std::vector<Field> dt_over_rho0_stag_;
    std::vector<double> nabla1_, nabla2_;
    Field tau_, eta_;

    std::vector<Field> v_, rho_, du_, grad_p_;
    Field p_, scratch_, absorb_in_, absorb_out_;
    int step_index_ = 0;
};

}  // namespace ustfwi
