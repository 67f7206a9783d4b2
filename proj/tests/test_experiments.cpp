#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "frontera/experiments.hpp"
#include "helpers.hpp"

using namespace frontera;

namespace {

/// Subcritical threshold scenario: the initial habitat (len 1.0) sits just
/// below the critical length (~1.1), the susceptible pool starts on the
/// disease-free dome so its amplitude persists, and the verdict at horizon 40
/// flips with the expansion rate mu.
SimConfig threshold_scenario(int n = 320) {
    SimConfig cfg;
    cfg.xmin = -8.0;
    cfg.xmax = 8.0;
    cfg.n = n;
    cfg.J1 = KernelSpec::asymmetric_laplace(6.0, 7.0, 0.5);
    cfg.J2 = KernelSpec::uniform_asymmetric(-0.55, 0.45);
    cfg.d1 = 0.02;
    cfg.d2 = 2.0;
    cfg.a.assign(static_cast<std::size_t>(n), 0.0);
    cfg.b.assign(static_cast<std::size_t>(n), 0.1);
    cfg.gamma.assign(static_cast<std::size_t>(n), 0.8);
    cfg.incidence = IncidenceModel::bilinear(1.5);
    cfg.Scap = 1.0;
    cfg.mu = 1e-3;
    cfg.h0 = 0.5;
    const auto dome = disease_free_profile(-0.5, 0.5, 0.02, cfg.J1,
                                           [](double) { return 0.0; }, 80, 1.0);
    cfg.S0.kind = InitialProfile::Kind::Tabulated;
    for (int i = 0; i < 80; ++i) {
        cfg.S0.xs.push_back(dome.grid.center(i));
        cfg.S0.vals.push_back(dome.Sstar[static_cast<std::size_t>(i)]);
    }
    cfg.I0 = {InitialProfile::Kind::Constant, 3e-3, {}, {}};
    cfg.T = 40.0;
    cfg.record_every = 2;
    return cfg;
}

/// Fixed wide habitat, leakage small against the infection pressure.
SimConfig supercritical_scenario(int n = 320) {
    SimConfig cfg;
    cfg.xmin = -6.0;
    cfg.xmax = 6.0;
    cfg.n = n;
    cfg.J1 = KernelSpec::asymmetric_laplace(6.0, 7.0, 0.5);
    cfg.J2 = KernelSpec::uniform_asymmetric(-0.55, 0.45);
    cfg.d1 = 0.05;
    cfg.d2 = 1.0;
    cfg.a.assign(static_cast<std::size_t>(n), 0.0);
    cfg.b.assign(static_cast<std::size_t>(n), 0.1);
    cfg.gamma.assign(static_cast<std::size_t>(n), 0.65);
    cfg.incidence = IncidenceModel::bilinear(1.05);
    cfg.mu = 0.0;
    cfg.h0 = 1.5;
    cfg.S0 = {InitialProfile::Kind::Constant, 1.0, {}, {}};
    cfg.I0 = {InitialProfile::Kind::Bump, 0.2, {}, {}};
    cfg.T = 40.0;
    cfg.record_every = 2;
    return cfg;
}

/// Strongly subcritical decay scenario with fast shape settling.
SimConfig vanishing_scenario(int n = 200) {
    SimConfig cfg;
    cfg.xmin = -6.0;
    cfg.xmax = 6.0;
    cfg.n = n;
    cfg.J1 = KernelSpec::asymmetric_laplace(6.0, 7.0, 0.5);
    cfg.J2 = KernelSpec::uniform_asymmetric(-0.55, 0.45);
    cfg.d1 = 0.5;
    cfg.d2 = 1.0;
    cfg.a.assign(static_cast<std::size_t>(n), 0.02);
    cfg.b.assign(static_cast<std::size_t>(n), 0.1);
    cfg.gamma.assign(static_cast<std::size_t>(n), 0.7);
    cfg.incidence = IncidenceModel::bilinear(1.3);
    cfg.mu = 1e-3;
    cfg.h0 = 0.2;
    cfg.S0 = {InitialProfile::Kind::Constant, 1.0, {}, {}};
    cfg.I0 = {InitialProfile::Kind::Bump, 0.2, {}, {}};
    cfg.T = 40.0;
    cfg.record_every = 2;
    return cfg;
}

}  // namespace

TEST_CASE("classifier rejects short trajectories") {
    SimConfig cfg = vanishing_scenario();
    cfg.T = 2.0;
    cfg.record_every = 50;
    const Trajectory traj = simulate(cfg);
    REQUIRE(traj.samples() < 50);
    CHECK_THROWS_AS(classify(traj, cfg), TooShortError);
}

TEST_CASE("subcritical habitat with tiny mu yields Vanishing with a small S-gap") {
    SimConfig cfg = vanishing_scenario();
    const Trajectory traj = simulate(cfg);
    const Verdict v = classify(traj, cfg);
    CHECK(v.kind == VerdictKind::Vanishing);
    CHECK(v.supI_final < 1e-4);
    CHECK(v.length_growth_rate < 1e-4);
    REQUIRE(v.supS_gap.has_value());
    CHECK(*v.supS_gap < 10.0 * 1e-4);  // Vanishing implies a near disease-free shape
}

TEST_CASE("fixed supercritical habitat shows Spreading-type evidence") {
    SimConfig cfg = supercritical_scenario();
    const Trajectory traj = simulate(cfg);
    const Verdict v = classify(traj, cfg, /*ell_star=*/2.0);
    CHECK(v.kind == VerdictKind::Spreading);
    CHECK(v.supI_final > 1e-4);
}

TEST_CASE("critical length separates the threshold scenario regimes") {
    const SimConfig cfg = threshold_scenario();
    const CriticalLengthResult ell = critical_length_for(cfg, 0.5, 2.0);
    CHECK(ell.ell_star > 2.0 * cfg.h0);  // initial habitat is subcritical
    CHECK(ell.ell_star < 1.6);           // the mu = 1 run grows decisively past it
}

TEST_CASE("mu-star bisection brackets the threshold") {
    SimConfig cfg = threshold_scenario();
    MuStarOptions opts;
    opts.max_iter = 12;
    opts.rel_width = 0.04;
    opts.ell_bracket_lo = 0.5;
    opts.ell_bracket_hi = 2.0;
    // residual boundary creep scales with mu S C_J here, so "stalled" means
    // slower than 0.05 length per time, well under the habitat scale
    opts.tols.tolG = 0.05;

    const ThresholdEstimate est = estimate_mu_star(cfg, 1e-3, 1.0, opts);
    CHECK_FALSE(est.undecided_at_midpoint);
    CHECK(est.verdict_lo == VerdictKind::Vanishing);
    CHECK(est.verdict_hi == VerdictKind::Spreading);
    CHECK(est.iterations <= 12);
    CHECK((est.mu_hi - est.mu_lo) <= 0.04 * (1.0 - 1e-3) + 1e-12);
    CHECK(est.mu_star > est.mu_lo);
    CHECK(est.mu_star < est.mu_hi);
    CHECK(est.rows.size() >= 4);
}

TEST_CASE("mu-star preconditions") {
    SimConfig cfg = threshold_scenario();
    MuStarOptions opts;
    opts.ell_bracket_lo = 0.5;
    opts.ell_bracket_hi = 2.0;

    SimConfig super = cfg;
    super.h0 = 0.8;  // 2 h0 = 1.6 exceeds ell*, spreading always occurs
    CHECK_THROWS_AS(estimate_mu_star(super, 1e-3, 1.0, opts), BracketInvalidError);

    // a bracket whose lower end already spreads is rejected
    MuStarOptions wide = opts;
    wide.tols.tolG = 0.05;
    CHECK_THROWS_AS(estimate_mu_star(cfg, 1.0, 2.0, wide), BracketInvalidError);
}

TEST_CASE("verdicts are monotone along a mu grid") {
    SimConfig cfg = threshold_scenario();
    const CriticalLengthResult ell = critical_length_for(cfg, 0.5, 2.0);

    ClassifyTols tols;
    tols.tolG = 0.05;
    int seen_spreading = 0;
    bool interleaved = false;
    for (int k = 0; k < 8; ++k) {
        cfg.mu = 1e-3 + (1.0 - 1e-3) * k / 7.0;
        const Verdict v = classify(simulate(cfg), cfg, ell.ell_star, tols);
        if (v.kind == VerdictKind::Spreading) ++seen_spreading;
        if (v.kind == VerdictKind::Vanishing && seen_spreading > 0) interleaved = true;
    }
    CHECK_FALSE(interleaved);
    CHECK(seen_spreading >= 1);
}

TEST_CASE("small-diffusion sweep approaches max beta") {
    EigenSweepParams p;
    p.kernel = KernelSpec::asymmetric_laplace(1.0, 2.0, 0.5);
    p.b = [](double) { return 0.2; };
    p.beta = [](double x) { return 0.5 + 0.3 * std::cos(2.0 * M_PI * x); };
    p.resolution = 400;
    const SweepResult r = sweep_small_d(p, -1.0, 1.0, {1e-1, 1e-2, 1e-3});
    CHECK(r.gaps_decreasing);
    CHECK(r.rows.back().gap < 0.05);

    // constant beta: the gap is the discrete leakage, at most d
    EigenSweepParams pc = p;
    pc.b = [](double) { return 0.0; };
    pc.beta = [](double) { return 0.8; };
    pc.resolution = 100;
    const SweepResult rc = sweep_small_d(pc, -1.0, 1.0, {0.3, 0.1});
    for (const auto& row : rc.rows) CHECK(row.gap <= row.parameter + 1e-12);

    // d = 0 with no drift: the operator is diagonal
    const SweepResult rz = sweep_small_d(pc, -1.0, 1.0, {0.0});
    CHECK(rz.rows[0].lambda_p == Catch::Approx(0.8).margin(1e-12));
}

TEST_CASE("small-interval sweep approaches beta(x0) - d") {
    EigenSweepParams p;
    p.kernel = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    p.b = [](double) { return 0.0; };
    p.beta = [](double) { return 0.8; };
    p.resolution = 16;

    const SweepResult r = sweep_small_interval(p, 1.0, {0.5, 0.1, 0.01}, 0.0);
    CHECK(r.gaps_decreasing);
    CHECK(r.rows.back().gap < 0.02);

    // strong drift does not move the limit
    EigenSweepParams pb = p;
    pb.b = [](double) { return 5.0; };
    const SweepResult rb = sweep_small_interval(pb, 1.0, {0.5, 0.1, 0.01}, 0.0);
    CHECK(rb.gaps_decreasing);
    CHECK(rb.rows.back().gap < 0.02);

    // d = 0, no drift: lambda_p is max beta over the window
    const SweepResult rz = sweep_small_interval(p, 0.0, {0.1}, 0.0);
    CHECK(rz.rows[0].lambda_p == Catch::Approx(0.8).margin(1e-12));

    CHECK_THROWS_AS(sweep_small_interval(p, 1.0, {-0.1}, 0.0), EmptyWindowError);
    EigenSweepParams coarse = p;
    coarse.resolution = 2;
    CHECK_THROWS_AS(sweep_small_interval(coarse, 1.0, {0.1}, 0.0), EmptyWindowError);
}
