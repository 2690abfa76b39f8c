#pragma once

#include <array>
#include <optional>

#include "ustfwi/solver/simulate.hpp"

namespace ustfwi {

enum class GradientParam { c0, rho0, alpha0, y };
enum class GradientMethod { full_storage, time_reversal };

inline const char* to_string(GradientParam p) {
    switch (p) {
        case GradientParam::c0: return "c0";
        case GradientParam::rho0: return "rho0";
        case GradientParam::alpha0: return "alpha0";
        default: return "y";
    }
}

struct GradientOptions {
    GradientMethod method = GradientMethod::full_storage;
    int boundary_thickness = 8;   // time-reversal shell
    int snapshot_decimation = 1;  // full-storage stride
    /// Integrate the adjoint source in time before injection; the first-order
    /// scheme effectively differentiates the mass source it is given.
    bool source_integration_correction = true;
    /// Refuse to allocate more snapshot storage than this (bytes).
    std::size_t storage_limit = std::size_t{12} << 30;
    bool dispersion_enabled = true;
};

struct GradientResult {
    double loss = 0.0;
    Field grad;
    GradientParam param = GradientParam::c0;
    GradientMethod method = GradientMethod::full_storage;
    int boundary_thickness = 0;
    std::size_t bytes_forward_storage = 0;
    int n_simulations = 0;
};

namespace detail {

/// Forward-side rolling window over descending forward time. Feeds the
/// parameter-specific correlation with a centered triple (j+1, j, j-1).
class GradientAccumulator {
public:
    GradientAccumulator(GradientParam param, const Medium& medium, const Grid& grid,
                        SpectralEngine& engine, double dt_eff, bool dispersion_enabled)
        : param_(param), grid_(grid), engine_(engine), dt_(dt_eff) {
        const std::size_t n = grid.points();
        grad_ = Field(grid.dims);
        const double y = medium.y;
        dispersion_on_ = dispersion_enabled && y != 2.0;

        switch (param_) {
            case GradientParam::c0: {
                w_ddot_ = Field(grid.dims);
                for (std::size_t i = 0; i < n; ++i)
                    w_ddot_[i] = 2.0 / std::pow(medium.c0[i], 3);
                if (medium.absorbing()) {
                    needs_a1_ = true;
                    needs_a2_ = dispersion_on_;
                    w_a1dot_ = Field(grid.dims);
                    w_a2_ = Field(grid.dims);
                    const double tan_term = dispersion_on_ ? std::tan(M_PI * y / 2.0) : 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double a_np = db2neper(medium.alpha0[i], y);
                        w_a1dot_[i] = -2.0 * a_np * (y - 1.0) * std::pow(medium.c0[i], y - 2.0);
                        w_a2_[i] = 2.0 * a_np * y * std::pow(medium.c0[i], y - 1.0) * tan_term;
                    }
                }
                break;
            }
            case GradientParam::alpha0: {
                needs_a1_ = true;
                needs_a2_ = dispersion_on_;
                w_a1dot_ = Field(grid.dims);
                w_a2_ = Field(grid.dims);
                const double np_of_db = db2neper(1.0, y);
                const double tan_term = dispersion_on_ ? std::tan(M_PI * y / 2.0) : 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    w_a1dot_[i] = -2.0 * np_of_db * std::pow(medium.c0[i], y - 1.0);
                    w_a2_[i] = 2.0 * np_of_db * std::pow(medium.c0[i], y) * tan_term;
                }
                break;
            }
            case GradientParam::y: {
                needs_a1_ = true;
                needs_a1l_ = true;
                needs_a2_ = dispersion_on_;
                needs_a2l_ = dispersion_on_;
                w_a1dot_ = Field(grid.dims);
                w_a1ldot_ = Field(grid.dims);
                w_a2_ = Field(grid.dims);
                w_a2l_ = Field(grid.dims);
                const double log_conv = std::log(2.0 * M_PI * 1e6);  // dB->Np exponent chain
                for (std::size_t i = 0; i < n; ++i) {
                    const double c = medium.c0[i];
                    const double a_np = db2neper(medium.alpha0[i], y);
                    const double tau = -2.0 * a_np * std::pow(c, y - 1.0);
                    const double lc = std::log(c) - log_conv;
                    w_a1dot_[i] = tau * lc;
                    w_a1ldot_[i] = 0.5 * tau;
                    if (dispersion_on_) {
                        const double tan_term = std::tan(M_PI * y / 2.0);
                        const double sec = 1.0 / std::cos(M_PI * y / 2.0);
                        const double eta = 2.0 * a_np * std::pow(c, y) * tan_term;
                        w_a2_[i] = eta * lc + M_PI * a_np * std::pow(c, y) * sec * sec;
                        w_a2l_[i] = 0.5 * eta;
                    }
                }
                break;
            }
            case GradientParam::rho0: {
                rho0_ = medium.rho0;
                inv_rho_stag_.resize(static_cast<std::size_t>(grid.ndim()));
                for (int a = 0; a < grid.ndim(); ++a) {
                    Field shifted;
                    engine.half_shift(medium.rho0, a, +1, shifted);
                    Field f(grid.dims);
                    for (std::size_t i = 0; i < n; ++i) f[i] = 1.0 / shifted[i];
                    inv_rho_stag_[static_cast<std::size_t>(a)] = std::move(f);
                }
                break;
            }
        }
        if (needs_a1_) mult_a1_ = engine.power_multiplier(y);
        if (needs_a2_) mult_a2_ = engine.power_multiplier(y + 1.0);
        if (needs_a1l_ || needs_a2l_) {
            const auto logk = engine.log_k2_multiplier();
            if (needs_a1l_) {
                mult_a1l_ = mult_a1_;
                for (std::size_t i = 0; i < mult_a1l_.size(); ++i) mult_a1l_[i] *= logk[i];
            }
            if (needs_a2l_) {
                mult_a2l_ = mult_a2_;
                for (std::size_t i = 0; i < mult_a2l_.size(); ++i) mult_a2l_[i] *= logk[i];
            }
        }
    }

    /// Feed the forward field at the next lower forward-time index.
    void push(const Field& p_at_j) {
        Slot slot = std::move(window_[2]);  // recycle the oldest buffers
        slot.p = p_at_j;
        if (needs_a1_ || needs_a2_ || needs_a1l_ || needs_a2l_) {
            engine_.load(p_at_j);
            if (needs_a1_) engine_.multiplier_from_loaded(mult_a1_, slot.a1);
            if (needs_a2_) engine_.multiplier_from_loaded(mult_a2_, slot.a2);
            if (needs_a1l_) engine_.multiplier_from_loaded(mult_a1l_, slot.a1l);
            if (needs_a2l_) engine_.multiplier_from_loaded(mult_a2l_, slot.a2l);
        }
        window_[2] = std::move(window_[1]);
        window_[1] = std::move(window_[0]);
        window_[0] = std::move(slot);
        ++pushed_;
    }

    bool ready() const { return pushed_ >= 3; }

    /// Correlate the centered forward window with the adjoint pressure field
    /// of the matching step. `newer` is forward index j-1, `older` is j+1.
    void accumulate(const Field& adjoint_p) {
        const Slot& newer = window_[0];
        const Slot& mid = window_[1];
        const Slot& older = window_[2];
        const std::size_t n = grad_.size();
        const double inv_dt = 1.0 / dt_;

        if (param_ == GradientParam::rho0) {
            accumulate_rho0(mid.p, adjoint_p);
            return;
        }
        if (param_ == GradientParam::c0) {
            for (std::size_t i = 0; i < n; ++i) {
                const double ddot = (newer.p[i] - 2.0 * mid.p[i] + older.p[i]) * inv_dt;
                grad_[i] += w_ddot_[i] * ddot * adjoint_p[i];
            }
        }
        if (needs_a1_) {
            for (std::size_t i = 0; i < n; ++i) {
                // forward time runs opposite to the push order
                const double a1dot = 0.5 * (older.a1[i] - newer.a1[i]);
                grad_[i] += w_a1dot_[i] * a1dot * adjoint_p[i];
            }
        }
        if (needs_a1l_) {
            for (std::size_t i = 0; i < n; ++i) {
                const double a1ldot = 0.5 * (older.a1l[i] - newer.a1l[i]);
                grad_[i] += w_a1ldot_[i] * a1ldot * adjoint_p[i];
            }
        }
        if (needs_a2_) {
            for (std::size_t i = 0; i < n; ++i)
                grad_[i] += w_a2_[i] * mid.a2[i] * adjoint_p[i] * dt_;
        }
        if (needs_a2l_) {
            for (std::size_t i = 0; i < n; ++i)
                grad_[i] += w_a2l_[i] * mid.a2l[i] * adjoint_p[i] * dt_;
        }
    }

    Field take(const Mask& gamma) {
        for (std::size_t i = 0; i < grad_.size(); ++i)
            if (!gamma[i]) grad_[i] = 0.0;
        return std::move(grad_);
    }

private:
    void accumulate_rho0(const Field& p, const Field& adjoint_p) {
        const int nd = grid_.ndim();
        const std::size_t n = grad_.size();
        if (scr_.empty()) scr_.assign(5, Field(grid_.dims));
        Field& rq = scr_[0];
        Field& dp = scr_[1];
        Field& drq = scr_[2];
        Field& tmp = scr_[3];
        Field& out = scr_[4];
        for (std::size_t i = 0; i < n; ++i) rq[i] = rho0_[i] * adjoint_p[i];

        for (int a = 0; a < nd; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            engine_.derivative(p, a, Stagger::plus, dp);
            engine_.derivative(rq, a, Stagger::plus, drq);
            // divergence part: d-minus of (1/rho_stag) * dp, paired with q
            const Field& inv_rho = inv_rho_stag_[ua];
            for (std::size_t i = 0; i < n; ++i) tmp[i] = dp[i] * inv_rho[i];
            engine_.derivative(tmp, a, Stagger::minus, out);
            for (std::size_t i = 0; i < n; ++i) grad_[i] += dt_ * out[i] * adjoint_p[i];
            // staggered product term, shifted back onto the regular grid
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = inv_rho[i] * inv_rho[i] * dp[i] * drq[i];
            engine_.half_shift(tmp, a, -1, out);
            for (std::size_t i = 0; i < n; ++i) grad_[i] += dt_ * out[i];
        }
    }

    struct Slot {
        Field p, a1, a2, a1l, a2l;
    };

    GradientParam param_;
    Grid grid_;
    SpectralEngine& engine_;
    double dt_;
    bool dispersion_on_ = true;
    bool needs_a1_ = false, needs_a2_ = false, needs_a1l_ = false, needs_a2l_ = false;

    Field grad_;
    Field w_ddot_, w_a1dot_, w_a2_, w_a1ldot_, w_a2l_;
    std::vector<double> mult_a1_, mult_a2_, mult_a1l_, mult_a2l_;
    Field rho0_;
    std::vector<Field> inv_rho_stag_sq_;
    std::optional<KVectors> kv_;

    std::array<Slot, 3> window_;
    int pushed_ = 0;
};

/// Reversed and cumulatively integrated data residual, the adjoint source.
inline std::vector<std::vector<double>> adjoint_source(const SensorData& simulated,
                                                       const SensorData& observed,
                                                       bool integrate, double& loss_out) {
    if (simulated.n_sensors != observed.n_sensors || simulated.nt != observed.nt)
        throw std::invalid_argument("observed data dimensions do not match the simulation");
    const int nt = simulated.nt, ns = simulated.n_sensors;
    std::vector<std::vector<double>> q(static_cast<std::size_t>(nt),
                                       std::vector<double>(static_cast<std::size_t>(ns)));
    double loss = 0.0, comp = 0.0;
    for (int n = 0; n < nt; ++n)
        for (int s = 0; s < ns; ++s) {
            const double r = simulated.at(s, nt - 1 - n) - observed.at(s, nt - 1 - n);
            q[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] = r;
            const double term = 0.5 * r * r - comp;
            const double t = loss + term;
            comp = (t - loss) - term;
            loss = t;
        }
    loss_out = loss;
    if (integrate)
        for (int n = 1; n < nt; ++n)
            for (int s = 0; s < ns; ++s)
                q[static_cast<std::size_t>(n)][static_cast<std::size_t>(s)] +=
                    q[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(s)];
    return q;
}

}  // namespace detail

/// Replay a recorded boundary trace backwards in time by enforcing it as a
/// Dirichlet condition on the shell. Returns the replayed pressure fields,
/// `snapshots[m]` approximating p(x, T - m*dt). Mostly a validation tool;
/// the gradient drivers interleave the same iteration.
inline std::vector<Field> replay_time_reversal(const Medium& medium, const BoundaryTrace& trace,
                                               const Grid& grid, SpectralEngine& engine) {
    StepperOptions opt;
    opt.absorption_sign = -1.0;
    WaveStepper tr(grid, medium, engine, opt);
    const int last = trace.nt - 1;
    const std::size_t n_layer = trace.layer_indices.size();

    std::vector<std::vector<double>> g_scaled(static_cast<std::size_t>(trace.nt),
                                              std::vector<double>(n_layer));
    for (int n = 0; n < trace.nt; ++n) {
        auto row = trace.at_step(n);
        for (std::size_t j = 0; j < n_layer; ++j) {
            const double c2 = tr.c0_squared()[trace.layer_indices[j]];
            g_scaled[static_cast<std::size_t>(n)][j] = row[j] / (grid.ndim() * c2);
        }
    }

    std::vector<Field> out;
    out.reserve(static_cast<std::size_t>(trace.nt));
    tr.enforce_shell(trace.layer_indices, g_scaled[static_cast<std::size_t>(last)]);
    tr.refresh_pressure_from_density();
    out.push_back(tr.pressure());
    for (int m = 1; m <= last; ++m) {
        tr.update_velocity_density();
        tr.enforce_shell(trace.layer_indices, g_scaled[static_cast<std::size_t>(last - m)]);
        tr.update_pressure();
        out.push_back(tr.pressure());
    }
    return out;
}

/// Loss and adjoint-state gradient of 1/2 |f(u) - observed|^2 for one
/// recording (the source set fires as one shot). Either keeps the forward
/// history in memory or replays it from a boundary trace, interleaving the
/// adjoint and time-reversal iterations.
inline GradientResult compute_gradient(const Medium& medium, const SourceSet& source,
                                       const SensorArray& sensors, const SensorData& observed,
                                       const Grid& grid, GradientParam param,
                                       const GradientOptions& opt = {},
                                       SpectralEngine* engine = nullptr) {
    grid.validate();
    if (medium.gamma.empty())
        throw std::invalid_argument("gradient computation requires a gamma mask");
    if (observed.nt != grid.nt)
        throw std::invalid_argument("observed data length does not match the grid");

    std::optional<SpectralEngine> local_engine;
    if (engine == nullptr) {
        local_engine.emplace(grid);
        engine = &*local_engine;
    }

    const bool tr = opt.method == GradientMethod::time_reversal;
    const int decim = tr ? 1 : std::max(1, opt.snapshot_decimation);
    const int last = grid.nt - 1;

    GradientResult result;
    result.param = param;
    result.method = opt.method;
    result.boundary_thickness = tr ? opt.boundary_thickness : 0;

    // forward pass
    SimOptions fwd_opt;
    if (tr) {
        fwd_opt.boundary_thickness = opt.boundary_thickness;
    } else {
        fwd_opt.snapshot_decimation = decim;
        const std::size_t bytes =
            (static_cast<std::size_t>(grid.nt) / static_cast<std::size_t>(decim) + 1) *
            grid.points() * sizeof(double);
        if (bytes > opt.storage_limit)
            throw NumericalError(
                "forward storage of " + std::to_string(bytes >> 20) +
                " MiB exceeds the limit; use the time-reversal gradient method");
    }
    SimResult fwd = simulate_forward(medium, source, sensors, grid, fwd_opt, engine);
    result.n_simulations = 1;
    result.bytes_forward_storage =
        tr ? fwd.trace.bytes() : fwd.snapshots.size() * grid.points() * sizeof(double);

    const auto q = detail::adjoint_source(fwd.data, observed, opt.source_integration_correction,
                                          result.loss);

    // adjoint stepper (shared wave operator, absorption as in the forward run)
    StepperOptions adj_opt;
    adj_opt.dispersion_enabled = opt.dispersion_enabled;
    WaveStepper adjoint(grid, medium, *engine, adj_opt);
    detail::GradientAccumulator acc(param, medium, grid, *engine,
                                    static_cast<double>(decim) * grid.dt,
                                    opt.dispersion_enabled);

    auto inject_adjoint = [&](int n) {
        const auto& qn = q[static_cast<std::size_t>(n)];
        for (std::size_t s = 0; s < sensors.count(); ++s)
            if (qn[s] != 0.0) adjoint.inject_mass_source(sensors.positions[s], qn[s]);
    };

    if (!tr) {
        const auto& snaps = fwd.snapshots;
        const int n_snaps = static_cast<int>(snaps.size());
        // descending forward index j = (n_snaps-1-m)*decim
        acc.push(snaps[static_cast<std::size_t>(n_snaps - 1)]);
        acc.push(snaps[static_cast<std::size_t>(n_snaps - 2)]);
        int fed = 2;
        for (int n = 1; n <= last - 1; ++n) {
            adjoint.update_velocity_density();
            inject_adjoint(n);
            adjoint.update_pressure();
            // accumulate when the adjoint step matches the window center
            const int j_mid = (n_snaps - fed) * decim;  // forward index of window center - decim
            const int j_center = j_mid + decim;
            if (n == last - j_center && fed < n_snaps) {
                acc.push(snaps[static_cast<std::size_t>(n_snaps - 1 - fed)]);
                ++fed;
                acc.accumulate(adjoint.pressure());
            }
        }
    } else {
        // scale the trace from pressure to split-density values
        const auto& shell = fwd.trace.layer_indices;
        const std::size_t n_layer = shell.size();
        std::vector<std::vector<double>> g_scaled(static_cast<std::size_t>(grid.nt),
                                                  std::vector<double>(n_layer));
        for (int n = 0; n < grid.nt; ++n) {
            auto row = fwd.trace.at_step(n);
            for (std::size_t j = 0; j < n_layer; ++j) {
                const double c2 = adjoint.c0_squared()[shell[j]];
                g_scaled[static_cast<std::size_t>(n)][j] = row[j] / (grid.ndim() * c2);
            }
        }

        StepperOptions tr_opt;
        tr_opt.absorption_sign = -1.0;
        tr_opt.dispersion_enabled = opt.dispersion_enabled;
        WaveStepper replay(grid, medium, *engine, tr_opt);

        // initial value and one look-ahead step of the replay
        replay.enforce_shell(shell, g_scaled[static_cast<std::size_t>(last)]);
        replay.refresh_pressure_from_density();
        acc.push(replay.pressure());
        replay.update_velocity_density();
        replay.enforce_shell(shell, g_scaled[static_cast<std::size_t>(last - 1)]);
        replay.update_pressure();
        acc.push(replay.pressure());

        for (int n = 1; n <= last - 1; ++n) {
            adjoint.update_velocity_density();
            inject_adjoint(n);
            adjoint.update_pressure();

            replay.update_velocity_density();
            replay.enforce_shell(shell, g_scaled[static_cast<std::size_t>(last - n - 1)]);
            replay.update_pressure();

            acc.push(replay.pressure());
            acc.accumulate(adjoint.pressure());
        }
        result.n_simulations = 3;
    }
    if (!tr) result.n_simulations = 2;

    result.grad = acc.take(medium.gamma);
    for (std::size_t i = 0; i < result.grad.size(); ++i)
        if (!std::isfinite(result.grad[i]))
            throw NumericalError("gradient contains non-finite values");
    return result;
}

inline GradientResult gradient_full_storage(const Medium& medium, const SourceSet& source,
                                            const SensorArray& sensors,
                                            const SensorData& observed, const Grid& grid,
                                            GradientParam param = GradientParam::c0,
                                            int snapshot_decimation = 1,
                                            SpectralEngine* engine = nullptr) {
    GradientOptions opt;
    opt.method = GradientMethod::full_storage;
    opt.snapshot_decimation = snapshot_decimation;
    return compute_gradient(medium, source, sensors, observed, grid, param, opt, engine);
}

inline GradientResult gradient_time_reversal(const Medium& medium, const SourceSet& source,
                                             const SensorArray& sensors,
                                             const SensorData& observed, const Grid& grid,
                                             int boundary_thickness,
                                             GradientParam param = GradientParam::c0,
                                             SpectralEngine* engine = nullptr) {
    GradientOptions opt;
    opt.method = GradientMethod::time_reversal;
    opt.boundary_thickness = boundary_thickness;
    return compute_gradient(medium, source, sensors, observed, grid, param, opt, engine);
}

/// Data-fit loss only (one forward simulation).
inline double evaluate_loss(const Medium& medium, const SourceSet& source,
                            const SensorArray& sensors, const SensorData& observed,
                            const Grid& grid, SpectralEngine* engine = nullptr) {
    const auto sim = simulate_forward(medium, source, sensors, grid, {}, engine);
    double loss = 0.0, comp = 0.0;
    for (int s = 0; s < sim.data.n_sensors; ++s)
        for (int n = 0; n < sim.data.nt; ++n) {
            const double r = sim.data.at(s, n) - observed.at(s, n);
            const double term = 0.5 * r * r - comp;
            const double t = loss + term;
            comp = (t - loss) - term;
            loss = t;
        }
    return loss;
}

}  // namespace ustfwi
