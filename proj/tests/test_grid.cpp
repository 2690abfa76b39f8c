#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ustfwi/grid/grid.hpp"
#include "ustfwi/grid/spectral.hpp"

using namespace ustfwi;

namespace {

Grid small_grid(Dims dims, double dx = 1e-3, double c = 1500.0) {
    Grid g;
    g.dims = std::move(dims);
    g.dx.assign(g.dims.size(), dx);
    g.pml_size.assign(g.dims.size(), 0);
    g.c_ref = c;
    g.dt = 0.3 * dx / c;
    g.nt = 16;
    g.validate();
    return g;
}

}  // namespace

TEST_CASE("choose_pml_size picks power-of-two friendly paddings") {
    CHECK(choose_pml_size({44}) == Dims{10});   // 64 = 2^6
    CHECK(choose_pml_size({100}) == Dims{14});  // 128 = 2^7
    CHECK(choose_pml_size({108}) == Dims{10});  // 128 again
    CHECK(choose_pml_size({44, 100}) == Dims{10, 14});
}

TEST_CASE("choose_pml_size is optimal against brute-force factorization") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> dist(4, 600);
    for (int trial = 0; trial < 200; ++trial) {
        const int interior = dist(rng);
        const int t = choose_pml_size({interior})[0];
        REQUIRE(t >= 10);
        REQUIRE(t <= 20);
        const long p = detail::largest_prime_factor(interior + 2L * t);
        for (int t2 = 10; t2 <= 20; ++t2) {
            const long p2 = detail::largest_prime_factor(interior + 2L * t2);
            REQUIRE(p <= p2);
            if (p2 == p) REQUIRE(t <= t2);  // ties broken by the thinner layer
        }
    }
}

TEST_CASE("wavenumbers follow the FFT ordering") {
    const auto k = fft_wavenumbers(4, 1.0);
    REQUIRE(k.size() == 4);
    CHECK(k[0] == 0.0);
    CHECK_THAT(k[1], Catch::Matchers::WithinRel(M_PI / 2, 1e-14));
    CHECK_THAT(k[2], Catch::Matchers::WithinRel(-M_PI, 1e-14));
    CHECK_THAT(k[3], Catch::Matchers::WithinRel(-M_PI / 2, 1e-14));
}

TEST_CASE("k-space correction field") {
    CHECK(sinc(0.0) == 1.0);
    CHECK_THAT(sinc(M_PI / 2), Catch::Matchers::WithinRel(2.0 / M_PI, 1e-12));

    auto g = small_grid({16, 16});
    const auto kv = make_kvectors(g);
    CHECK(kv.kappa[0] == 1.0);  // k = 0 bin
    for (std::size_t i = 0; i < kv.kappa.size(); ++i) {
        CHECK(kv.kappa[i] > 0.0);
        CHECK(kv.kappa[i] <= 1.0);
    }

    // grid engineered so the first mode lands exactly on c_ref*dt*|k|/2 = pi/2
    Grid g2 = small_grid({16});
    g2.dt = M_PI / (g2.c_ref * kv.k[0][1]);
    const auto kv2 = make_kvectors(g2);
    CHECK_THAT(kv2.kappa[1], Catch::Matchers::WithinRel(2.0 / M_PI, 1e-12));
}

TEST_CASE("spectral derivative of a constant vanishes") {
    auto g = small_grid({32, 20});
    const auto kv = make_kvectors(g);
    Field f(g.dims, 3.7);
    for (auto st : {Stagger::none, Stagger::plus, Stagger::minus}) {
        const auto d = spectral_derivative(f, 0, st, kv);
        CHECK(max_abs(d) < 1e-12 * 3.7);
    }
}

TEST_CASE("staggered derivative of a grid mode matches the shifted analytic derivative") {
    auto g = small_grid({48});
    auto kv = make_kvectors(g);
    kv.kappa.fill(1.0);  // isolate the derivative from the k-space correction
    const double k0 = kv.k[0][3];
    Field f(g.dims);
    for (int i = 0; i < g.dims[0]; ++i) f[i] = std::sin(k0 * i * g.dx[0]);

    for (auto [st, shift] : {std::pair{Stagger::plus, 0.5}, std::pair{Stagger::minus, -0.5}}) {
        const auto d = spectral_derivative(f, 0, st, kv);
        for (int i = 0; i < g.dims[0]; ++i) {
            const double x = (i + shift) * g.dx[0];
            REQUIRE_THAT(d[static_cast<std::size_t>(i)],
                         Catch::Matchers::WithinAbs(k0 * std::cos(k0 * x), 1e-9 * k0));
        }
    }
}

TEST_CASE("staggered derivatives are adjoint up to sign") {
    auto g = small_grid({24, 18});
    const auto kv = make_kvectors(g);
    std::mt19937 rng(11);
    std::normal_distribution<double> dist;
    Field u(g.dims), v(g.dims);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = dist(rng);
        v[i] = dist(rng);
    }
    for (int axis = 0; axis < 2; ++axis) {
        const double lhs = dot(spectral_derivative(u, axis, Stagger::plus, kv), v);
        const double rhs = dot(u, spectral_derivative(v, axis, Stagger::minus, kv));
        REQUIRE(std::abs(lhs + rhs) < 1e-10 * norm2(u) * norm2(v));
    }
}

TEST_CASE("fourier_interpolate identity and constants") {
    auto g = small_grid({16, 12});
    std::mt19937 rng(3);
    std::normal_distribution<double> dist;
    Field f(g.dims);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);

    const auto same = fourier_interpolate(f, g.dims, SpectralWindow::none);
    for (std::size_t i = 0; i < f.size(); ++i)
        REQUIRE_THAT(same[i], Catch::Matchers::WithinAbs(f[i], 1e-12));

    Field c(g.dims, 2.5);
    for (auto win : {SpectralWindow::none, SpectralWindow::blackman}) {
        const auto up = fourier_interpolate(c, {32, 18}, win);
        for (std::size_t i = 0; i < up.size(); ++i)
            REQUIRE_THAT(up[i], Catch::Matchers::WithinAbs(2.5, 1e-12));
    }
}

TEST_CASE("fourier_interpolate reproduces a single mode at new collocation points") {
    const int n = 16, m = 32;
    Field f({n});
    const double k0 = 2.0 * M_PI * 3.0 / n;  // mode 3, unit spacing
    for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = std::cos(k0 * i);
    const auto up = fourier_interpolate(f, {m});
    for (int j = 0; j < m; ++j)
        REQUIRE_THAT(up[static_cast<std::size_t>(j)],
                     Catch::Matchers::WithinAbs(std::cos(k0 * j * n / static_cast<double>(m)), 1e-12));
}

TEST_CASE("fourier_interpolate up-down round trip is exact") {
    auto g = small_grid({20, 14});
    std::mt19937 rng(5);
    std::normal_distribution<double> dist;
    Field f(g.dims);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = dist(rng);
    const auto up = fourier_interpolate(f, {40, 28});
    const auto back = fourier_interpolate(up, g.dims);
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) err = std::max(err, std::abs(back[i] - f[i]));
    REQUIRE(err < 1e-10 * norm2(f));
}

TEST_CASE("fourier_interpolate rejects odd target dims") {
    Field f({16});
    CHECK_THROWS_AS(fourier_interpolate(f, {15}), std::invalid_argument);
}

TEST_CASE("fourier_shift moves a mode by half a cell") {
    auto g = small_grid({32});
    const auto kv = make_kvectors(g);
    const double k0 = kv.k[0][2];
    Field f(g.dims);
    for (int i = 0; i < g.dims[0]; ++i) f[i] = std::cos(k0 * i * g.dx[0]);
    const auto shifted = fourier_shift(f, 0, 0.5, kv);
    for (int i = 0; i < g.dims[0]; ++i)
        REQUIRE_THAT(shifted[static_cast<std::size_t>(i)],
                     Catch::Matchers::WithinAbs(std::cos(k0 * (i + 0.5) * g.dx[0]), 1e-12));
}

TEST_CASE("grid validation catches bad inputs") {
    CHECK_THROWS_AS(small_grid({15, 16}), std::invalid_argument);
    CHECK_THROWS_AS(small_grid({2, 16}), std::invalid_argument);
    Grid g = small_grid({16, 16});
    g.dt = -1.0;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("pml profiles are one in the interior and in (0,1] inside the layer") {
    Grid g;
    g.dims = {64, 64};
    g.dx = {1e-3, 1e-3};
    g.pml_size = {10, 12};
    g.c_ref = 1500.0;
    g.dt = 0.3 * 1e-3 / 1500.0;
    g.nt = 8;
    g.validate();
    const auto pml = make_pml(g);
    for (int a = 0; a < 2; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        for (int i = g.pml_size[ua]; i < g.dims[ua] - g.pml_size[ua]; ++i) {
            CHECK(pml.regular[ua][static_cast<std::size_t>(i)] == 1.0);
        }
        for (int i = 0; i < g.dims[ua]; ++i) {
            CHECK(pml.regular[ua][static_cast<std::size_t>(i)] > 0.0);
            CHECK(pml.regular[ua][static_cast<std::size_t>(i)] <= 1.0);
            CHECK(pml.staggered[ua][static_cast<std::size_t>(i)] > 0.0);
            CHECK(pml.staggered[ua][static_cast<std::size_t>(i)] <= 1.0);
        }
        CHECK(pml.regular[ua][0] < 0.9);  // strong damping at the outer boundary
    }
}
