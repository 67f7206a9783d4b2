#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "frontera/operator_matrix.hpp"
#include "helpers.hpp"

using namespace frontera;
using testing_support::integrate;

TEST_CASE("grid construction") {
    const Grid1D g = build_grid(-1.0, 1.0, 4);
    CHECK(g.center(0) == Catch::Approx(-0.75));
    CHECK(g.center(1) == Catch::Approx(-0.25));
    CHECK(g.center(2) == Catch::Approx(0.25));
    CHECK(g.center(3) == Catch::Approx(0.75));
    CHECK(build_grid(0.0, 1.0, 10).dx == Catch::Approx(0.1));
    CHECK(build_grid(-2.0, 2.0, 400).dx == Catch::Approx(0.01));
    CHECK_THROWS_AS(build_grid(0.0, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(1.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("active window") {
    const Grid1D g = build_grid(-1.0, 1.0, 4);
    const auto w = active_window(g, -0.5, 0.5);
    REQUIRE(w.has_value());
    CHECK(w->lo_idx == 1);
    CHECK(w->hi_idx == 2);

    CHECK_FALSE(active_window(g, -0.1, 0.1).has_value());

    const auto full = active_window(g, -1.0, 1.0);
    REQUIRE(full.has_value());
    CHECK(full->lo_idx == 0);
    CHECK(full->hi_idx == 3);

    // centers on the boundary are outside: (g,h) is open
    const auto open = active_window(g, -0.75, 0.75);
    REQUIRE(open.has_value());
    CHECK(open->lo_idx == 1);
    CHECK(open->hi_idx == 2);
}

TEST_CASE("zeroth-order-only assembly is diagonal") {
    const Grid1D g = build_grid(-1.0, 1.0, 8);
    const std::vector<double> zero(8, 0.0), c(8, 0.3);
    const auto k = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    const OperatorMatrix M = assemble_operator(g, 0.0, k, zero, c);
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            CHECK(M.at(i, j) == (i == j ? 0.3 : 0.0));
}

TEST_CASE("interior and boundary row sums track the kernel mass") {
    const Grid1D g = build_grid(-5.0, 5.0, 200);
    const auto k = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    const std::vector<double> zero(200, 0.0);
    const OperatorMatrix M = assemble_operator(g, 1.0, k, zero, zero);

    // fully covered interior row: discrete mass ~ 1
    const int mid = 100;
    CHECK(M.row_sum(mid) == Catch::Approx(0.0).margin(2e-3));

    // boundary row: leakage = -(1 - mass over the window)
    const double x0 = g.center(0);
    const double covered = k.interval_mass(x0 - g.xmax(), x0 - g.xmin);
    CHECK(covered == Catch::Approx(0.525).margin(1e-12));
    CHECK(M.row_sum(0) == Catch::Approx(-(1.0 - covered)).margin(2e-2));
    CHECK(M.row_sum(0) == Catch::Approx(-0.475).margin(2e-2));
}

TEST_CASE("apply matches a brute-force double loop") {
    const Grid1D g = build_grid(0.0, 1.0, 5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    OperatorMatrix M(0.0, 1.0, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) M.at(i, j) = u(rng);
    std::vector<double> v(5);
    for (double& x : v) x = u(rng);
    const auto out = M.apply(v);
    for (int i = 0; i < 5; ++i) {
        double s = 0.0;
        for (int j = 0; j < 5; ++j) s += M.at(i, j) * v[j];
        CHECK(out[static_cast<std::size_t>(i)] == Catch::Approx(s).margin(1e-13));
    }

    OperatorMatrix scaled(0.0, 1.0, 3);
    for (int i = 0; i < 3; ++i) scaled.at(i, i) = 0.3;
    const auto sv = scaled.apply({1.0, 2.0, 3.0});
    CHECK(sv[0] == Catch::Approx(0.3));
    CHECK(sv[1] == Catch::Approx(0.6));
    CHECK(sv[2] == Catch::Approx(0.9));

    const OperatorMatrix zero(0.0, 1.0, 3);
    for (double x : zero.apply({1.0, 2.0, 3.0})) CHECK(x == 0.0);

    CHECK_THROWS_AS(scaled.apply({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("assembled matrices are Metzler with bounded Dirichlet leakage") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 25; ++rep) {
        const int n = 20 + static_cast<int>(u(rng) * 60);
        const Grid1D g = build_grid(-1.5 + u(rng), 0.5 + u(rng), n);
        const auto k = testing_support::random_kernel(rng);
        const double d = 1.5 * u(rng);
        std::vector<double> drift(static_cast<std::size_t>(n)), c(static_cast<std::size_t>(n));
        for (auto& x : drift) x = (u(rng) - 0.5);
        for (auto& x : c) x = (u(rng) - 0.5);
        const auto rule = rep % 2 ? DriftBoundary::Conservative : DriftBoundary::DirichletLeak;
        const OperatorMatrix M = assemble_operator(g, d, k, drift, c, rule);

        CHECK(M.min_off_diagonal() >= 0.0);

        if (d > 0.0) {
            double kmax = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) kmax = std::max(kmax, k.evaluate(g.center(i) - g.center(j)));
            const double quad_tol = kmax * g.dx;  // midpoint error scale for BV densities
            for (int i = 0; i < n; ++i) {
                double nonlocal = -d;
                for (int j = 0; j < n; ++j)
                    nonlocal += d * k.evaluate(g.center(i) - g.center(j)) * g.dx;
                CHECK(nonlocal / d <= 5.0 * quad_tol);
            }
        }
    }
}

TEST_CASE("drift block row sums by boundary rule") {
    const Grid1D g = build_grid(-1.0, 1.0, 10);
    const auto k = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    const std::vector<double> zeroc(10, 0.0);

    for (double p : {0.7, -0.4}) {
        const std::vector<double> drift(10, p);
        const OperatorMatrix cons = assemble_operator(g, 0.0, k, drift, zeroc,
                                                      DriftBoundary::Conservative);
        for (int i = 0; i < 10; ++i) CHECK(cons.row_sum(i) == 0.0);

        const OperatorMatrix leak = assemble_operator(g, 0.0, k, drift, zeroc,
                                                      DriftBoundary::DirichletLeak);
        const int boundary = p > 0.0 ? 9 : 0;
        for (int i = 0; i < 10; ++i) {
            if (i == boundary)
                CHECK(leak.row_sum(i) == Catch::Approx(-std::abs(p) / g.dx).margin(1e-12));
            else
                CHECK(leak.row_sum(i) == 0.0);
        }
    }
}

TEST_CASE("operator application converges on a smooth test function") {
    const auto k = KernelSpec::asymmetric_laplace(1.5, 2.0, 0.4);
    const double d = 0.8, p = 0.3, c0 = 0.2;
    auto phi = [](double x) { return std::cos(x); };
    auto dphi = [](double x) { return -std::sin(x); };

    auto sup_error = [&](int n) {
        const Grid1D g = build_grid(-1.0, 1.0, n);
        std::vector<double> drift(static_cast<std::size_t>(n), p), c(static_cast<std::size_t>(n), c0);
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = phi(g.center(i));
        const OperatorMatrix M = assemble_operator(g, d, k, drift, c);
        const auto Lv = M.apply(v);
        double worst = 0.0;
        // skip the forward-drift boundary row, whose stencil leaves the interval
        for (int i = 1; i < n - 1; ++i) {
            const double x = g.center(i);
            const double nonlocal =
                integrate([&](double y) { return k.evaluate(x - y) * phi(y); }, -1.0, 1.0, 1e-12);
            const double exact = d * (nonlocal - phi(x)) + p * dphi(x) + c0 * phi(x);
            worst = std::max(worst, std::abs(Lv[static_cast<std::size_t>(i)] - exact));
        }
        return worst;
    };

    const double e1 = sup_error(100);
    const double e2 = sup_error(200);
    const double order = std::log2(e1 / e2);
    CHECK(order >= 0.9);
}

TEST_CASE("row and column deletion equals reassembly on the subinterval") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 24 + static_cast<int>(u(rng) * 30);
        const Grid1D g = build_grid(-1.0, 1.2, n);
        const auto k = testing_support::random_kernel(rng);
        const double d = 0.3 + u(rng);
        const bool with_drift = rep % 2 == 0;
        std::vector<double> drift(static_cast<std::size_t>(n), with_drift ? 0.4 : 0.0);
        std::vector<double> c = testing_support::random_profile(rng, g, -0.4, 0.6);

        const int k1 = 2, k2 = 3;
        const int m = n - k1 - k2;
        const Grid1D sub = build_grid(g.xmin + k1 * g.dx, g.xmax() - k2 * g.dx, m);
        std::vector<double> drift_sub(drift.begin() + k1, drift.end() - k2);
        std::vector<double> c_sub(c.begin() + k1, c.end() - k2);

        // exact under the Dirichlet-leak rule for any drift
        const OperatorMatrix big =
            assemble_operator(g, d, k, drift, c, DriftBoundary::DirichletLeak);
        const OperatorMatrix small =
            assemble_operator(sub, d, k, drift_sub, c_sub, DriftBoundary::DirichletLeak);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
                CHECK(small.at(i, j) == Catch::Approx(big.at(i + k1, j + k1)).margin(1e-12));

        // and under the conservative rule whenever the drift vanishes
        if (!with_drift) {
            const OperatorMatrix big_c = assemble_operator(g, d, k, drift, c);
            const OperatorMatrix small_c = assemble_operator(sub, d, k, drift_sub, c_sub);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    CHECK(small_c.at(i, j) == Catch::Approx(big_c.at(i + k1, j + k1)).margin(1e-12));
        }
    }
}

TEST_CASE("assembly rejects bad inputs") {
    const Grid1D g = build_grid(0.0, 1.0, 4);
    const auto k = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    const std::vector<double> four(4, 0.0), three(3, 0.0);
    CHECK_THROWS_AS(assemble_operator(g, -1.0, k, four, four), std::invalid_argument);
    CHECK_THROWS_AS(assemble_operator(g, 1.0, k, three, four), std::invalid_argument);
    CHECK_THROWS_AS(assemble_operator(g, 1.0, k, four, three), std::invalid_argument);
}

TEST_CASE("coefficient checks") {
    const Grid1D g = build_grid(-1.0, 1.0, 20);
    CoefficientSet good;
    good.a.assign(20, 0.1);
    good.b.assign(20, 0.2);
    good.gamma.assign(20, 1.0);
    CHECK(check_coefficients(good, g).empty());

    CoefficientSet bad = good;
    bad.gamma[3] = -0.1;
    const std::string err = check_coefficients(bad, g);
    CHECK(err.find("(H2)") != std::string::npos);

    CoefficientSet periodic = good;
    periodic.period = 0.5;  // 5 cells
    for (int i = 0; i < 20; ++i)
        periodic.gamma[static_cast<std::size_t>(i)] = 1.0 + 0.3 * std::sin(2.0 * M_PI * g.center(i) / 0.5);
    CHECK(check_coefficients(periodic, g).empty());
    periodic.gamma[7] += 1e-6;
    CHECK_FALSE(check_coefficients(periodic, g).empty());
}
