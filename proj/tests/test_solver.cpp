#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ustfwi/solver/simulate.hpp"

using namespace ustfwi;

namespace {

std::size_t flat2(const Grid& g, int ix, int iy) {
    return static_cast<std::size_t>(ix) * g.dims[1] + static_cast<std::size_t>(iy);
}

/// index of first sample exceeding `frac` of the trace's own peak
int onset_index(std::span<const double> trace, double frac) {
    double peak = 0.0;
    for (double v : trace) peak = std::max(peak, std::abs(v));
    for (std::size_t i = 0; i < trace.size(); ++i)
        if (std::abs(trace[i]) >= frac * peak) return static_cast<int>(i);
    return -1;
}

}  // namespace

TEST_CASE("engine derivatives agree with the reference spectral operator") {
    Grid g;
    g.dims = {24, 18};
    g.dx = {1e-3, 1e-3};
    g.pml_size = {0, 0};
    g.c_ref = 1500.0;
    g.dt = 0.3 * 1e-3 / 1500.0;
    g.nt = 4;
    const auto kv = make_kvectors(g);
    SpectralEngine eng(g);
    std::mt19937 rng(17);
    std::normal_distribution<double> dist;
    Field f(g.dims);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    Field out;
    for (int axis = 0; axis < 2; ++axis)
        for (auto st : {Stagger::none, Stagger::plus, Stagger::minus}) {
            eng.derivative(f, axis, st, out);
            const auto ref = spectral_derivative(f, axis, st, kv);
            for (std::size_t i = 0; i < out.size(); ++i)
                REQUIRE_THAT(out[i], Catch::Matchers::WithinAbs(ref[i], 1e-11));
        }
}

TEST_CASE("zero sources produce zero sensor data") {
    Grid g = make_grid({64, 64}, 1e-3, 1800.0, 3e-5);
    Medium m = make_homogeneous_medium(g);
    SourceSet src;
    SensorArray sensors;
    sensors.positions = {flat2(g, 32, 32)};
    const auto res = simulate_forward(m, src, sensors, g);
    for (double v : res.data.samples) CHECK(v == 0.0);
}

TEST_CASE("homogeneous first arrival matches the analytic travel time") {
    const double c = 1500.0, dx = 1e-3;
    Grid g = make_grid({128, 128}, dx, c, 1.3e-4);
    Medium m = make_homogeneous_medium(g, c);
    const int mid = g.dims[1] / 2;
    SourceSet src;
    src.positions = {flat2(g, g.pml_size[0] + 15, mid)};
    src.signals = {synth_source_pulse(g, 1.0, c)};
    // receiver pair on the same ray, outside the near field; the waveform
    // shape cancels in the differential onset, leaving the travel time over d
    SensorArray sensors;
    sensors.positions = {flat2(g, g.pml_size[0] + 45, mid), flat2(g, g.pml_size[0] + 105, mid)};
    const double dist = 60.0 * dx;

    const auto res = simulate_forward(m, src, sensors, g);
    const int n1 = onset_index(res.data.trace(0), 0.1);
    const int n2 = onset_index(res.data.trace(1), 0.1);
    REQUIRE(n2 > n1);
    const double t_arrival = (n2 - n1) * g.dt;
    CHECK(std::abs(t_arrival - dist / c) <= 2.0 * g.dt);
}

TEST_CASE("discrete scheme is linear in the sources") {
    Grid g = make_grid({64, 64}, 1e-3, 1800.0, 5e-5);
    Medium m = make_homogeneous_medium(g);
    auto pulse = synth_source_pulse(g, 0.8, 1500.0);
    SensorArray sensors;
    sensors.positions = {flat2(g, 40, 40)};

    SourceSet s1, s2, both;
    s1.positions = {flat2(g, 24, 30)};
    s1.signals = {pulse};
    s2.positions = {flat2(g, 30, 24)};
    auto pulse2 = pulse;
    for (double& v : pulse2) v *= -0.7;
    s2.signals = {pulse2};
    both.positions = {s1.positions[0], s2.positions[0]};
    both.signals = {pulse, pulse2};

    const auto r1 = simulate_forward(m, s1, sensors, g);
    const auto r2 = simulate_forward(m, s2, sensors, g);
    const auto rb = simulate_forward(m, both, sensors, g);

    double num = 0.0, den = 0.0;
    for (int n = 0; n < g.nt; ++n) {
        const double sum = r1.data.at(0, n) + r2.data.at(0, n);
        num += (rb.data.at(0, n) - sum) * (rb.data.at(0, n) - sum);
        den += sum * sum;
    }
    REQUIRE(std::sqrt(num / den) < 1e-10);

    // scaling: alpha * s -> alpha * response
    SourceSet scaled = s1;
    for (double& v : scaled.signals[0]) v *= 3.25;
    const auto rs = simulate_forward(m, scaled, sensors, g);
    for (int n = 0; n < g.nt; ++n)
        REQUIRE_THAT(rs.data.at(0, n),
                     Catch::Matchers::WithinAbs(3.25 * r1.data.at(0, n),
                                                1e-12 + 3.25e-10 * std::abs(r1.data.at(0, n))));
}

TEST_CASE("delaying a source delays the data exactly") {
    Grid g = make_grid({48, 48}, 1e-3, 1800.0, 4e-5);
    Medium m = make_homogeneous_medium(g);
    auto pulse = synth_source_pulse(g, 0.8, 1500.0);
    SensorArray sensors;
    sensors.positions = {flat2(g, 34, 34)};
    SourceSet src;
    src.positions = {flat2(g, 20, 20)};
    src.signals = {pulse};

    const int delay = 17;
    SourceSet delayed = src;
    delayed.signals[0].insert(delayed.signals[0].begin(), delay, 0.0);

    const auto r0 = simulate_forward(m, src, sensors, g);
    const auto rd = simulate_forward(m, delayed, sensors, g);
    for (int n = 0; n < delay; ++n) REQUIRE(rd.data.at(0, n) == 0.0);
    for (int n = 0; n + delay < g.nt; ++n)
        REQUIRE_THAT(rd.data.at(0, n + delay),
                     Catch::Matchers::WithinAbs(r0.data.at(0, n), 1e-14));
}

TEST_CASE("homogeneous reciprocity: swapping source and receiver") {
    Grid g = make_grid({96, 96}, 1e-3, 1800.0, 6e-5);
    Medium m = make_homogeneous_medium(g);
    auto pulse = synth_source_pulse(g, 0.8, 1500.0);
    const std::size_t a = flat2(g, 30, 42), b = flat2(g, 75, 58);

    SourceSet sa;
    sa.positions = {a};
    sa.signals = {pulse};
    SensorArray ra;
    ra.positions = {b};
    const auto res_ab = simulate_forward(m, sa, ra, g);

    SourceSet sb;
    sb.positions = {b};
    sb.signals = {pulse};
    SensorArray rb;
    rb.positions = {a};
    const auto res_ba = simulate_forward(m, sb, rb, g);

    double num = 0.0, den = 0.0;
    for (int n = 0; n < g.nt; ++n) {
        num += std::pow(res_ab.data.at(0, n) - res_ba.data.at(0, n), 2);
        den += std::pow(res_ba.data.at(0, n), 2);
    }
    REQUIRE(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("PML: reflections stay below 1 percent of the incident pulse") {
    const double c = 1500.0, dx = 1e-3;
    Grid g = make_grid({128, 128}, dx, c, 2.2e-4);
    Medium m = make_homogeneous_medium(g, c);
    const int mid = g.dims[0] / 2;
    SourceSet src;
    src.positions = {flat2(g, mid, mid)};
    src.signals = {synth_source_pulse(g, 0.8, c)};
    SensorArray sensors;
    sensors.positions = {flat2(g, mid + 30, mid)};
    const auto res = simulate_forward(m, src, sensors, g);

    // direct wave passes the receiver around t1; anything after the shortest
    // boundary round trip is reflection
    const double t_direct = 30.0 * dx / c;
    const double t_reflect = ((mid - g.pml_size[0]) + (mid - 30 - g.pml_size[0])) * dx / c;
    double incident = 0.0, reflected = 0.0;
    for (int n = 0; n < g.nt; ++n) {
        const double t = n * g.dt;
        const double v = std::abs(res.data.at(0, n));
        if (t < t_direct + 4e-5) incident = std::max(incident, v);
        if (t > t_reflect + 4e-5) reflected = std::max(reflected, v);
    }
    REQUIRE(incident > 0.0);
    REQUIRE(reflected < 0.01 * incident);
}

TEST_CASE("lossless periodic domain conserves the discrete energy") {
    const double c = 1500.0, dx = 1e-3;
    Grid g;
    g.dims = {64, 64};
    g.dx = {dx, dx};
    g.pml_size = {0, 0};
    g.c_ref = c;
    g.dt = 0.3 * dx / c;
    g.nt = 1100;
    g.validate();
    Medium m = make_homogeneous_medium(g, c);
    SourceSet src;
    src.positions = {flat2(g, 32, 32)};
    src.signals = {synth_source_pulse(g, 0.5, c)};
    SensorArray sensors;
    SimOptions opt;
    opt.record_energy = true;
    opt.pml_enabled = false;
    const auto res = simulate_forward(m, src, sensors, g, opt);

    const int settle = static_cast<int>(src.signals[0].size()) + 10;
    double emin = 1e300, emax = 0.0;
    for (int n = settle; n < g.nt; ++n) {
        emin = std::min(emin, res.energy[static_cast<std::size_t>(n)]);
        emax = std::max(emax, res.energy[static_cast<std::size_t>(n)]);
    }
    REQUIRE(emax > 0.0);
    REQUIRE((emax - emin) / emax < 1e-3);
}

TEST_CASE("field power: basics and quadratic scaling") {
    Mask gamma({8, 8});
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma.set(i, true);
    Field zero({8, 8});
    Field p({8, 8}, 2.0);
    const double dV = 1e-6;
    CHECK(field_power({zero}, gamma, dV)[0] == 0.0);
    const double p1 = field_power({p}, gamma, dV)[0];
    Field p2x = p;
    p2x *= 2.0;
    CHECK_THAT(field_power({p2x}, gamma, dV)[0], Catch::Matchers::WithinRel(4.0 * p1, 1e-12));
}

TEST_CASE("field power decays after the source switches off") {
    const double c = 1500.0, dx = 1e-3;
    Grid g = make_grid({128, 128}, dx, c, 2.6e-4);
    Medium m = make_homogeneous_medium(g, c);
    const double cx = g.dims[0] / 2.0, cy = g.dims[1] / 2.0;
    m.gamma = ball_mask(g.dims, {cx, cy}, 24.0);
    SourceSet src;
    src.positions = {flat2(g, static_cast<int>(cx) - 34, static_cast<int>(cy))};
    src.signals = {synth_source_pulse(g, 0.6, c)};
    SensorArray sensors;
    SimOptions opt;
    opt.snapshot_decimation = 4;
    const auto res = simulate_forward(m, src, sensors, g, opt);
    const auto power = field_power(res.snapshots, m.gamma, dx * dx);

    // after source off plus one domain crossing, power must be essentially
    // monotone (5 percent ripple allowed) until the numerical floor
    const double t_settle = src.signals[0].size() * g.dt + (g.dims[0] * dx) / c;
    const int first = static_cast<int>(t_settle / (4 * g.dt)) + 1;
    REQUIRE(first + 10 < static_cast<int>(power.size()));
    double peak = 0.0;
    for (double v : power) peak = std::max(peak, v);
    REQUIRE(power[static_cast<std::size_t>(first)] < 1e-2 * peak);  // field has left gamma
    const double floor = 1e-2 * power[static_cast<std::size_t>(first)];
    double running = power[static_cast<std::size_t>(first)];
    for (std::size_t i = static_cast<std::size_t>(first) + 1; i < power.size(); ++i) {
        if (power[i] < floor) break;
        REQUIRE(power[i] < running * 1.05);
        running = std::min(running, power[i]);
    }
    REQUIRE(power.back() < power[static_cast<std::size_t>(first)]);
}

TEST_CASE("source pulse is band-limited to the grid-supported band") {
    const double c_min = 1500.0, dx = 1e-3;
    Grid g = make_grid({64, 64}, dx, 1800.0, 2e-4);
    const auto pulse = synth_source_pulse(g, 1.0, c_min);
    const double f_max = c_min / (2.0 * dx);

    // zero-padded spectrum
    const std::size_t nfft = 8192;
    std::vector<std::complex<double>> spec(nfft, {0.0, 0.0});
    for (std::size_t i = 0; i < pulse.size(); ++i) spec[i] = pulse[i];
    ComplexFft fft({static_cast<int>(nfft)});
    fft.forward_inplace(spec.data());
    double peak = 0.0;
    for (std::size_t i = 0; i < nfft / 2; ++i) peak = std::max(peak, std::abs(spec[i]));
    double above = 0.0;
    for (std::size_t i = 0; i < nfft / 2; ++i) {
        const double f = static_cast<double>(i) / (nfft * g.dt);
        if (f >= 1.2 * f_max) above = std::max(above, std::abs(spec[i]));
    }
    REQUIRE(above <= 1e-3 * peak);  // -60 dB

    // -20 dB duration below 10 / f_max
    double pk = 0.0;
    for (double v : pulse) pk = std::max(pk, std::abs(v));
    std::size_t first = pulse.size(), last = 0;
    for (std::size_t i = 0; i < pulse.size(); ++i)
        if (std::abs(pulse[i]) >= 0.1 * pk) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    REQUIRE((last - first) * g.dt < 10.0 / f_max);

    // unit peak, and doubling dx halves the supported band
    REQUIRE_THAT(pk, Catch::Matchers::WithinRel(1.0, 1e-12));
    Grid g2 = make_grid({32, 32}, 2.0 * dx, 1800.0, 2e-4);
    const auto pulse2 = synth_source_pulse(g2, 1.0, c_min);
    REQUIRE(pulse2.size() * g2.dt > pulse.size() * g.dt * 1.5);  // longer pulse, narrower band
}

TEST_CASE("absorbing medium attenuates more than a lossless one") {
    const double c = 1500.0, dx = 1e-3;
    Grid g = make_grid({96, 96}, dx, c, 1e-4);
    SourceSet src;
    src.positions = {flat2(g, 20, 48)};
    src.signals = {synth_source_pulse(g, 0.8, c)};
    SensorArray sensors;
    sensors.positions = {flat2(g, 80, 48)};

    Medium lossless = make_homogeneous_medium(g, c);
    Medium lossy = make_homogeneous_medium(g, c, 1000.0, 0.75, 1.5);
    const auto r0 = simulate_forward(lossless, src, sensors, g);
    const auto r1 = simulate_forward(lossy, src, sensors, g);
    double a0 = 0.0, a1 = 0.0;
    for (int n = 0; n < g.nt; ++n) {
        a0 = std::max(a0, std::abs(r0.data.at(0, n)));
        a1 = std::max(a1, std::abs(r1.data.at(0, n)));
    }
    REQUIRE(a1 < 0.9 * a0);
    REQUIRE(a1 > 0.05 * a0);  // sane, not annihilated
}

TEST_CASE("y = 2 disables dispersion and keeps the absorption term well-defined") {
    Grid g = make_grid({48, 48}, 1e-3, 1500.0, 3e-5);
    SpectralEngine eng(g);
    const auto n1 = eng.power_multiplier(0.0);  // y - 2 at y = 2
    for (double v : n1) CHECK(v == 1.0);

    Medium m = make_homogeneous_medium(g, 1500.0, 1000.0, 0.5, 2.0);
    StepperOptions opt;
    opt.dispersion_enabled = false;
    SpectralEngine eng2(g);
    WaveStepper stepper(g, m, eng2, opt);  // must not throw
    CHECK(stepper.absorbing());

    // with dispersion requested at y == 2 the medium is rejected
    CHECK_THROWS_AS(m.validate(g, true), std::invalid_argument);
}

TEST_CASE("CFL violation is rejected") {
    Grid g = make_grid({48, 48}, 1e-3, 1500.0, 3e-5);
    g.dt = 1e-3 / 1500.0;  // cfl = 1 > 2/pi
    Medium m = make_homogeneous_medium(g, 1500.0);
    SpectralEngine eng(g);
    CHECK_THROWS_AS(WaveStepper(g, m, eng), NumericalError);
}
