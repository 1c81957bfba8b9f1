// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tribeam/analysis.hpp"
#include "tribeam/grid.hpp"
#include "tribeam/solver.hpp"

using namespace tribeam;

TEST_CASE("Purcell factor reference points") {
    const double lam = 637.0, n = 2.4;
    const double lon3 = std::pow(lam / n, 3.0);
    CHECK(purcell_factor(lam, n, 200.0, 2.0 * lon3) == Catch::Approx(7.60).margin(0.01));
    CHECK(purcell_factor(lam, n, 22400.0, 1.8 * lon3) == Catch::Approx(946.0).margin(1.0));
    CHECK(purcell_factor(lam, n, 4.0 * pi * pi / 3.0, lon3) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(purcell_factor(lam, n, -1.0, lon3), config_error);
    CHECK_THROWS_AS(purcell_factor(lam, n, 200.0, 0.0), config_error);
}

TEST_CASE("Purcell scale invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.3, 3.0);
    for (int t = 0; t < 200; ++t) {
        const double lam = 500.0 + 300.0 * us(rng);
        const double vm = 1e7 * us(rng);
        const double q = 50.0 + 1e4 * us(rng);
        const double s = us(rng);
        const double f1 = purcell_factor(lam, 2.4, q, vm);
        const double f2 = purcell_factor(s * lam, 2.4, q, s * s * s * vm);
        CHECK(f2 == Catch::Approx(f1).epsilon(1e-12));
    }
}

TEST_CASE("mode volume: point, uniform, and Gaussian oracle") {
    SECTION("single nonzero cell gives one cell volume") {
        const double cell = 7.0;
        Field3<double> ex(10, 10, 10), ey(10, 10, 10), ez(10, 10, 10), eps(10, 10, 10, 1.0);
        ey(4, 5, 6) = 3.0;
        CHECK(mode_volume(ex, ey, ez, eps, cell) == Catch::Approx(cell * cell * cell));
    }
    SECTION("uniform field over uniform eps gives the domain volume") {
        const double cell = 2.5;
        const int n = 12;
        Field3<double> ex(n, n, n, 0.7), ey(n, n, n, -0.1), ez(n, n, n, 0.4);
        Field3<double> eps(n, n, n, 5.76);
        const double v = n * n * n * cell * cell * cell;
        CHECK(mode_volume(ex, ey, ez, eps, cell) == Catch::Approx(v).epsilon(1e-12));
    }
    SECTION("separable Gaussian against the quadrature oracle") {
        const double sigma = 40.0;
        const double cell = 5.0;
        const int n = 96; // +-240 nm = +-6 sigma
        Field3<double> ex(n, n, n), ey(n, n, n), ez(n, n, n), eps(n, n, n, 1.0);
        auto coord = [&](int i) { return (i - n / 2 + 0.5) * cell; };
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double r2 = coord(i) * coord(i) + coord(j) * coord(j) +
                                      coord(k) * coord(k);
                    ey(i, j, k) = std::exp(-r2 / (2.0 * sigma * sigma));
                }
        // independent quadrature: |E|^2 integral via fine 1D Simpson, cubed
        const int qn = 4000;
        const double lim = 6.0 * sigma;
        double one_d = 0.0;
        for (int q = 0; q <= qn; ++q) {
            const double x = -lim + 2.0 * lim * q / qn;
            const double c = (q == 0 || q == qn) ? 1.0 : (q % 2 ? 4.0 : 2.0);
            one_d += c * std::exp(-x * x / (sigma * sigma));
        }
        one_d *= 2.0 * lim / qn / 3.0;
        const double oracle = one_d * one_d * one_d; // peak is 1
        const double got = mode_volume(ex, ey, ez, eps, cell);
        CHECK(std::fabs(got - oracle) / oracle < 1e-3);
    }
    SECTION("invariant under uniform field rescaling") {
        Field3<double> ex(8, 8, 8), ey(8, 8, 8), ez(8, 8, 8), eps(8, 8, 8, 2.0);
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (auto& v : ey) v = u(rng);
        const double v1 = mode_volume(ex, ey, ez, eps, 3.0);
        for (auto& v : ey) v *= 17.5;
        const double v2 = mode_volume(ex, ey, ez, eps, 3.0);
        CHECK(v2 == Catch::Approx(v1).epsilon(1e-12));
    }
    SECTION("all-zero field rejected") {
        Field3<double> z(4, 4, 4), eps(4, 4, 4, 1.0);
        CHECK_THROWS_AS(mode_volume(z, z, z, eps, 1.0), config_error);
    }
}

TEST_CASE("energy density basics") {
    const int n = 6;
    Field3<double> e1(n, n, n, 1.0), z(n, n, n, 0.0), eps(n, n, n, 2.0);
    auto d = energy_density(e1, z, z, z, z, z, eps);
    for (double v : d.u_e) CHECK(v == 1.0);
    for (double v : d.u_m) CHECK(v == 0.0);
    for (double v : d.u) CHECK(v == 1.0);
}

TEST_CASE("traveling plane wave equipartitions electric and magnetic energy") {
    // vacuum channel; integrate sum(E^2) and sum(H^2) over the whole passage
    const int nz = 260;
    DielectricGrid grid;
    grid.layout.cell_nm = 10.0;
    grid.layout.nx = 3;
    grid.layout.ny = 3;
    grid.layout.nz = nz;
    grid.eps_x = Field3<double>(4, 4, nz + 1, 1.0);
    grid.eps_y = Field3<double>(4, 4, nz + 1, 1.0);
    grid.eps_z = Field3<double>(4, 4, nz + 1, 1.0);

    SimulationConfig cfg;
    cfg.steps = 1600;
    cfg.boundary = {BoundaryKind::pec, BoundaryKind::pec, BoundaryKind::pmc,
                    BoundaryKind::pmc, BoundaryKind::pml, BoundaryKind::pml};
    SheetSource sh;
    sh.comp = Comp::ex;
    sh.axis = 2;
    sh.index = 30;
    sh.waveform = GaussianSine::from_bandwidth(0.05, 0.3);
    cfg.sheets = {sh};
    Fdtd<double> f(grid, cfg);
    double ue_int = 0.0, um_int = 0.0;
    f.run([&](long) {
        // sample one x-row: fields are uniform transversely
        for (int k = 60; k <= nz - 20; ++k) {
            const double e = f.field(Comp::ex)(1, 1, k);
            const double h = f.field(Comp::hy)(1, 1, k);
            ue_int += 0.5 * e * e;
            um_int += 0.5 * h * h;
        }
    });
    REQUIRE(ue_int > 0.0);
    INFO("UE " << ue_int << " UM " << um_int);
    CHECK(std::fabs(ue_int - um_int) / ue_int < 0.01);
}

TEST_CASE("coupling assessment reference rates") {
    const double lam = 637.0;
    const double gamma = 1e8;
    auto c1 = coupling_assessment(200.0, 1e7, lam, gamma);
    CHECK(c1.kappa == Catch::Approx(1.177e12).epsilon(2e-3));
    auto c2 = coupling_assessment(22400.0, 1e7, lam, gamma);
    CHECK(c2.kappa == Catch::Approx(1.051e10).epsilon(2e-3));
    // kappa * 4 pi Q = omega0 exactly
    CHECK(c1.kappa * 4.0 * pi * 200.0 == Catch::Approx(c1.omega0).epsilon(1e-12));
    CHECK(c2.kappa * 4.0 * pi * 22400.0 == Catch::Approx(c2.omega0).epsilon(1e-12));
    // fixed point: V_m = V0 makes g = gamma_perp exactly
    auto c3 = coupling_assessment(1000.0, c1.v0_nm3, lam, gamma);
    CHECK(c3.g_rabi == Catch::Approx(gamma).epsilon(1e-12));
    CHECK(c2.q_above_3e3);
    CHECK_FALSE(c1.q_above_3e3);
    CHECK_THROWS_AS(coupling_assessment(-1.0, 1e7, lam, gamma), config_error);
}

TEST_CASE("flux ratio: y-symmetric slab radiates evenly up and down") {
    const int n = 60, nyc = 30;
    DielectricGrid grid;
    grid.layout.cell_nm = 10.0;
    grid.layout.nx = n;
    grid.layout.ny = 60;
    grid.layout.nz = n;
    grid.eps_x = Field3<double>(n + 1, 61, n + 1, 1.0);
    grid.eps_y = Field3<double>(n + 1, 61, n + 1, 1.0);
    grid.eps_z = Field3<double>(n + 1, 61, n + 1, 1.0);
    // slab eps=4 for y in [25, 35], symmetric about the source plane y=30
    for (int k = 0; k <= n; ++k)
        for (int j = 25; j <= 35; ++j)
            for (int i = 0; i <= n; ++i) {
                grid.eps_x(i, j, k) = 4.0;
                grid.eps_z(i, j, k) = 4.0;
                if (j < 35) grid.eps_y(i, j, k) = 4.0;
            }

    SimulationConfig cfg;
    cfg.steps = 1200;
    PointSource src;
    src.comp = Comp::ex; // tangential to the y mirror plane: even source
    src.i = n / 2;
    src.j = nyc;
    src.k = n / 2;
    src.waveform = GaussianSine::from_bandwidth(0.04, 0.4);
    cfg.sources = {src};
    cfg.flux_planes = {{1, 14, "up"}, {1, 46, "down"}};
    Fdtd<double> f(grid, cfg);
    f.run();
    // "up" monitor reads power toward +y; away from the slab means -y there
    auto up = f.flux_series()[0];
    for (double& v : up) v = -v;
    auto r = flux_ratio(up, f.flux_series()[1], f.dt());
    CHECK_FALSE(r.infinite);
    CHECK(r.ratio == Catch::Approx(1.0).margin(0.02));
}

TEST_CASE("flux ratio flags a vanishing downward integral") {
    std::vector<double> up(100, 1.0), down(100, 0.0);
    auto r = flux_ratio(up, down, 0.5);
    CHECK(r.infinite);
    CHECK_THROWS_AS(flux_ratio({}, down, 0.5), config_error);
}

TEST_CASE("readout visibility") {
    CHECK(readout_visibility(7.6, 10.0) == Catch::Approx(76.0).epsilon(1e-12));
    CHECK(readout_visibility(1.0, 1.0) == Catch::Approx(1.0));
    CHECK_THROWS_AS(readout_visibility(0.0, 10.0), config_error);
}

TEST_CASE("photon budget means match the Monte Carlo oracle within 3 sigma") {
    PhotonBudgetParams p;
    p.f_cav = 7.6;
    p.window_s = 100e-6;
    const auto budget = photon_budget(p);

    // Event-driven oracle of the same renewal model, built independently:
    // bright = Poisson emissions every Exp(tau); dim = Exp(shelving) dead time
    // before each emission; every emission detected with prob `collection`.
    std::mt19937_64 rng(77);
    std::exponential_distribution<double> wait_tau(p.f_cav / p.tau0_s);
    std::exponential_distribution<double> wait_shelf(1.0 / p.shelving_s);
    std::bernoulli_distribution detected(p.collection);
    const int trials = 100000;
    double bright_sum = 0.0, bright_sq = 0.0, dim_sum = 0.0, dim_sq = 0.0;
    for (int t = 0; t < trials; ++t) {
        double clock = 0.0;
        long counts = 0;
        while (true) {
            clock += wait_tau(rng);
            if (clock > p.window_s) break;
            if (detected(rng)) ++counts;
        }
        bright_sum += counts;
        bright_sq += double(counts) * counts;
        clock = 0.0;
        counts = 0;
        while (true) {
            clock += wait_shelf(rng) + wait_tau(rng);
            if (clock > p.window_s) break;
            if (detected(rng)) ++counts;
        }
        dim_sum += counts;
        dim_sq += double(counts) * counts;
    }
    const double bright_mc = bright_sum / trials;
    const double dim_mc = dim_sum / trials;
    const double bright_sigma =
        std::sqrt((bright_sq / trials - bright_mc * bright_mc) / trials);
    const double dim_sigma = std::sqrt((dim_sq / trials - dim_mc * dim_mc) / trials);

    INFO("bright " << budget.bright_mean << " mc " << bright_mc << " sigma " << bright_sigma);
    INFO("dim " << budget.dim_mean << " mc " << dim_mc << " sigma " << dim_sigma);
    CHECK(std::fabs(budget.bright_mean - bright_mc) < 3.0 * bright_sigma);
    CHECK(std::fabs(budget.dim_mean - dim_mc) < 3.0 * dim_sigma);
    CHECK(budget.contrast > 0.9); // shelving keeps the dim branch dark
}

TEST_CASE("parity classifier scores the injected sector") {
    // EO image quartet as in the solver parity test, then classify from the
    // H_y snapshot of a y-plane.
    const int n = 24;
    DielectricGrid grid;
    grid.layout.cell_nm = 10.0;
    grid.layout.nx = n;
    grid.layout.ny = 18;
    grid.layout.nz = n;
    grid.eps_x = Field3<double>(n + 1, 19, n + 1, 1.0);
    grid.eps_y = Field3<double>(n + 1, 19, n + 1, 1.0);
    grid.eps_z = Field3<double>(n + 1, 19, n + 1, 1.0);
    SimulationConfig cfg;
    cfg.steps = 500;
    cfg.boundary = {BoundaryKind::pec, BoundaryKind::pec, BoundaryKind::pec,
                    BoundaryKind::pec, BoundaryKind::pec, BoundaryKind::pec};
    GaussianSine w = GaussianSine::from_bandwidth(0.07, 0.5);
    GaussianSine wn = w;
    wn.amplitude = -w.amplitude;
    const int cx = n / 2, cz = n / 2;
    cfg.sources = {{Comp::ey, cx + 4, 9, cz + 5, w},
                   {Comp::ey, cx - 4, 9, cz + 5, wn},
                   {Comp::ey, cx + 4, 9, cz - 5, w},
                   {Comp::ey, cx - 4, 9, cz - 5, wn}};
    Fdtd<double> f(grid, cfg);
    f.run();
    auto p = classify_parity_hy(f.snapshot(1, 9));
    CHECK(p.assigned);
    CHECK(p.x == 'E');
    CHECK(p.z == 'O');
    CHECK(p.residual_x < 1e-6);
    CHECK(p.residual_z < 1e-6);
}

TEST_CASE("wall parity labels") {
    CHECK(parity_of_walls(BoundaryKind::pec, BoundaryKind::pmc) == "EO");
    CHECK(parity_of_walls(BoundaryKind::pmc, BoundaryKind::pec) == "OE");
    CHECK(parity_of_walls(BoundaryKind::pec, BoundaryKind::pec) == "EE");
    CHECK(parity_of_walls(BoundaryKind::pmc, BoundaryKind::pmc) == "OO");
}
