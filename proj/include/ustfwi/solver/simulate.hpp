#pragma once

#include <optional>

#include "ustfwi/grid/filter.hpp"
#include "ustfwi/solver/engine.hpp"

namespace ustfwi {

struct SimOptions {
    /// Record a boundary trace on a shell of this thickness inside gamma
    /// (0 = off). Requires the medium's gamma mask.
    int boundary_thickness = 0;
    /// Store every k-th pressure snapshot (0 = off).
    int snapshot_decimation = 0;
    /// Record the discrete acoustic energy per step (diagnostic).
    bool record_energy = false;
    bool pml_enabled = true;
};

struct SimResult {
    SensorData data;
    BoundaryTrace trace;
    std::vector<Field> snapshots;
    std::vector<double> energy;
};

/// Leapfrog time stepping of the first-order acoustic system; records sensor
/// samples each step and optionally a boundary trace, snapshots and energy.
inline SimResult simulate_forward(const Medium& medium, const SourceSet& sources,
                                  const SensorArray& sensors, const Grid& grid,
                                  const SimOptions& opt = {}, SpectralEngine* engine = nullptr) {
    grid.validate();
    for (std::size_t s = 0; s < sources.count(); ++s)
        if (sources.positions[s] >= grid.points())
            throw std::invalid_argument("source position outside grid");
    for (std::size_t s = 0; s < sensors.count(); ++s)
        if (sensors.positions[s] >= grid.points())
            throw std::invalid_argument("sensor position outside grid");

    std::optional<SpectralEngine> local_engine;
    if (engine == nullptr) {
        local_engine.emplace(grid);
        engine = &*local_engine;
    }
    StepperOptions sopt;
    sopt.pml_enabled = opt.pml_enabled;
    WaveStepper stepper(grid, medium, *engine, sopt);

    SimResult result;
    result.data.n_sensors = static_cast<int>(sensors.count());
    result.data.nt = grid.nt;
    result.data.dt = grid.dt;
    result.data.samples.assign(sensors.count() * static_cast<std::size_t>(grid.nt), 0.0);

    if (opt.boundary_thickness > 0) {
        if (medium.gamma.empty())
            throw std::invalid_argument("boundary recording requires a gamma mask");
        result.trace.layer_indices = shell_indices(medium.gamma, opt.boundary_thickness);
        result.trace.nt = grid.nt;
        result.trace.values.assign(result.trace.layer_indices.size() *
                                       static_cast<std::size_t>(grid.nt),
                                   0.0);
    }

    std::vector<Field> v_prev;
    double dV = 1.0;
    for (double dx : grid.dx) dV *= dx;
    Field p_prev;
    if (opt.record_energy) {
        v_prev = stepper.velocity();
        p_prev = stepper.pressure();
        result.energy.reserve(static_cast<std::size_t>(grid.nt));
    }

    for (int n = 0; n < grid.nt; ++n) {
        if (opt.record_energy) {
            v_prev = stepper.velocity();
            p_prev = stepper.pressure();
        }
        stepper.update_velocity_density();
        for (std::size_t s = 0; s < sources.count(); ++s) {
            const double amp = sources.sample(s, n);
            if (amp != 0.0) stepper.inject_mass_source(sources.positions[s], amp);
        }
        stepper.update_pressure();

        const Field& p = stepper.pressure();
        for (std::size_t s = 0; s < sensors.count(); ++s)
            result.data.at(static_cast<int>(s), n) = p[sensors.positions[s]];
        if (!result.trace.empty()) {
            auto row = result.trace.at_step(n);
            for (std::size_t j = 0; j < result.trace.layer_indices.size(); ++j)
                row[j] = p[result.trace.layer_indices[j]];
        }
        if (opt.snapshot_decimation > 0 && n % opt.snapshot_decimation == 0)
            result.snapshots.push_back(p);
        if (opt.record_energy)
            result.energy.push_back((stepper.kinetic_energy(v_prev) +
                                     stepper.potential_energy(p_prev)) *
                                    dV);
    }
    result.data.check_finite();
    return result;
}

/// P(t_n) = sum over gamma of p^2 * dV for a sequence of snapshots.
inline std::vector<double> field_power(const std::vector<Field>& snapshots, const Mask& gamma,
                                       double dV) {
    std::vector<double> power;
    power.reserve(snapshots.size());
    const auto idx = gamma.indices();
    for (const Field& p : snapshots) {
        double sum = 0.0;
        for (std::size_t i : idx) sum += p[i] * p[i];
        power.push_back(sum * dV);
    }
    return power;
}

/// Broadband click: a discrete impulse low-passed to the band the grid can
/// propagate, f_max = c0_min/(2 dx), scaled by `center_freq_fraction` and
/// normalized to unit peak. The pulse is time-shifted so it starts near zero.
inline std::vector<double> synth_source_pulse(const Grid& grid, double center_freq_fraction,
                                              double c0_min) {
    if (center_freq_fraction <= 0.0 || center_freq_fraction > 1.0)
        throw std::invalid_argument("frequency fraction must lie in (0, 1]");
    const double f_max = c0_min / (2.0 * grid.min_dx());
    const double cutoff = center_freq_fraction * f_max;

    const auto taps = design_kaiser_lowpass(grid.dt, cutoff);
    const int half = static_cast<int>(taps.size() / 2);
    std::vector<double> click(static_cast<std::size_t>(4 * half + 1), 0.0);
    click[static_cast<std::size_t>(2 * half)] = 1.0;
    auto pulse = lowpass_filter_timeseries(click, grid.dt, cutoff);

    // trim to the significant support and normalize the peak
    double peak = 0.0;
    for (double v : pulse) peak = std::max(peak, std::abs(v));
    std::size_t first = 0, last = pulse.size() - 1;
    while (first < pulse.size() && std::abs(pulse[first]) < 1e-6 * peak) ++first;
    while (last > first && std::abs(pulse[last]) < 1e-6 * peak) --last;
    std::vector<double> out(pulse.begin() + static_cast<std::ptrdiff_t>(first),
                            pulse.begin() + static_cast<std::ptrdiff_t>(last + 1));
    for (double& v : out) v /= peak;
    if (out.size() > static_cast<std::size_t>(grid.nt)) out.resize(static_cast<std::size_t>(grid.nt));
    return out;
}

}  // namespace ustfwi
