#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontera/equilibrium.hpp"
#include "frontera/grid.hpp"
#include "frontera/kernels.hpp"

namespace frontera {

struct DynamicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyWindowError : DynamicsError {
    using DynamicsError::DynamicsError;
};
struct BoundaryHitGridEdgeError : DynamicsError {
    using DynamicsError::DynamicsError;
};
struct ClampBudgetExceededError : DynamicsError {
    using DynamicsError::DynamicsError;
};
struct PreconditionUnorderedError : DynamicsError {
    using DynamicsError::DynamicsError;
};

/// Initial data generator; continuous profiles supported in [-h0, h0] per (H3).
struct InitialProfile {
    enum class Kind { Constant, Bump, Tabulated };
    Kind kind = Kind::Bump;
    double amplitude = 1.0;
    std::vector<double> xs;    // tabulated nodes
    std::vector<double> vals;  // tabulated values

    double operator()(double x, double h0) const {
        if (std::abs(x) >= h0) return 0.0;
        switch (kind) {
            case Kind::Constant:
                return amplitude;
            case Kind::Bump: {
                const double c = std::cos(M_PI * x / (2.0 * h0));
                return amplitude * std::max(0.0, c) * c;
            }
            case Kind::Tabulated: {
                if (xs.empty()) return 0.0;
                if (x <= xs.front() || x >= xs.back()) return 0.0;
                auto it = std::upper_bound(xs.begin(), xs.end(), x);
                const std::size_t j = static_cast<std::size_t>(it - xs.begin());
                const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                return vals[j - 1] * (1.0 - w) + vals[j] * w;
            }
        }
        return 0.0;
    }
};

struct SimConfig {
    double xmin = -6.0;
    double xmax = 6.0;
    int n = 400;
    KernelSpec J1 = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    KernelSpec J2 = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    double d1 = 1.0;
    double d2 = 1.0;
    std::vector<double> a;      // length n
    std::vector<double> b;      // length n
    std::vector<double> gamma;  // length n
    std::optional<double> period;
    IncidenceModel incidence = IncidenceModel::bilinear(0.0);
    double mu = 0.0;
    double h0 = 1.0;
    InitialProfile S0;
    InitialProfile I0;
    double T = 40.0;
    double cfl_safety = 0.5;
    int record_every = 1;
    bool clamp_enabled = true;
    double clamp_tol = 1e-12;        // negatives beyond this count against the budget
    double clamp_budget_rel = 1e-6;  // budget relative to ||S0|| + ||I0||
    double Scap = 1.0;               // disease-free normalization used downstream

    Grid1D grid() const { return build_grid(xmin, xmax, n); }
};

struct SimulationState {
    double t = 0.0;
    ActiveWindow window{-1.0, 1.0, 0, 0};
    std::vector<double> S;  // full grid, exactly 0 outside the window
    std::vector<double> I;
    double flux_right = 0.0;  // last computed h'
    double flux_left = 0.0;   // last computed g', <= 0
};

enum class FluxSide { Right, Left };

/// Outward nonlocal boundary flux of susceptibles; the inner dy-integral is
/// the kernel CDF in closed form. Right >= 0, Left <= 0.
inline double boundary_flux(const SimulationState& state, const Grid1D& grid,
                            const KernelSpec& kernel1, FluxSide side, double mu) {
    if (state.window.size() <= 0) throw EmptyWindowError("dynamics: empty active window");
    const double dx = grid.dx;
    double acc = 0.0;
    for (int i = state.window.lo_idx; i <= state.window.hi_idx; ++i) {
        const double Si = state.S[static_cast<std::size_t>(i)];
        if (Si == 0.0) continue;
        const double xi = grid.center(i);
        if (side == FluxSide::Right)
            acc += dx * Si * kernel1.cdf(xi - state.window.h);
        else
            acc += dx * Si * (1.0 - kernel1.cdf(xi - state.window.g));
    }
    return side == FluxSide::Right ? mu * acc : -mu * acc;
}

/// Per-run accounting used by invariant checks.
struct RunDiagnostics {
    double sup_S_run = 0.0;        // max over all steps
    double sup_I_run = 0.0;
    double min_field_run = 0.0;    // most negative value ever seen (pre-clamp)
    double clamp_total = 0.0;
    double max_flux_minus_len_bound = -std::numeric_limits<double>::infinity();
    double max_flux_minus_cj_bound = -std::numeric_limits<double>::infinity();
    double C_J = 0.0;
    double M_S = 0.0;  // Gronwall envelope at horizon
    double M_I = 0.0;
    int dt_refreshes = 0;
    double dt_initial = 0.0;
    double dt_final = 0.0;
};

namespace detail {

inline double sup_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// dt = safety * min(dx/max|a|, dx/max|b|, 1/(d1 + d2 + max gamma + L_F)) with
/// L_F the Lipschitz bound of F on the working box [0,RS] x [0,RI].
inline double cfl_dt_box(const SimConfig& cfg, double RS, double RI) {
    const Grid1D grid = cfg.grid();
    double dt = std::numeric_limits<double>::infinity();
    const double amax = sup_abs(cfg.a);
    const double bmax = sup_abs(cfg.b);
    if (amax > 0.0) dt = std::min(dt, grid.dx / amax);
    if (bmax > 0.0) dt = std::min(dt, grid.dx / bmax);
    double gmax = 0.0;
    for (double g : cfg.gamma) gmax = std::max(gmax, g);
    const double denom = cfg.d1 + cfg.d2 + gmax + cfg.incidence.lipschitz_bound(RS, RI);
    if (denom > 0.0) dt = std::min(dt, 1.0 / denom);
    if (!std::isfinite(dt)) dt = cfg.T > 0.0 ? cfg.T / 100.0 : 1.0;
    return cfg.cfl_safety * dt;
}

inline void sample_initial(const SimConfig& cfg, const Grid1D& grid, std::vector<double>& S,
                           std::vector<double>& I, const ActiveWindow& w) {
    S.assign(static_cast<std::size_t>(grid.n), 0.0);
    I.assign(static_cast<std::size_t>(grid.n), 0.0);
    for (int i = w.lo_idx; i <= w.hi_idx; ++i) {
        const double x = grid.center(i);
        S[static_cast<std::size_t>(i)] = cfg.S0(x, cfg.h0);
        I[static_cast<std::size_t>(i)] = cfg.I0(x, cfg.h0);
    }
}

}  // namespace detail

/// CFL-stable explicit step size from the initial-data working box. simulate()
/// refreshes it if the fields outgrow the box.
inline double cfl_dt(const SimConfig& cfg) {
    const Grid1D grid = cfg.grid();
    const auto w0 = active_window(grid, -cfg.h0, cfg.h0);
    if (!w0) throw EmptyWindowError("dynamics: initial window holds no cell");
    std::vector<double> S, I;
    detail::sample_initial(cfg, grid, S, I, *w0);
    const double box = 2.0 * (detail::sup_abs(S) + detail::sup_abs(I)) + 1.0;
    return detail::cfl_dt_box(cfg, box, box);
}

/// One explicit method-of-lines step: upwind advection and midpoint nonlocal
/// quadrature on the active cells, Euler update, then the boundary ODEs with
/// the pre-step S, then window recompute (fresh cells start at 0).
inline void step(SimulationState& st, const SimConfig& cfg, const Grid1D& grid, double dt,
                 RunDiagnostics* diag = nullptr) {
    const double dx = grid.dx;
    const int lo = st.window.lo_idx, hi = st.window.hi_idx;
    const double len_pre = st.window.h - st.window.g;
    double supS_pre = 0.0;
    for (int i = lo; i <= hi; ++i) supS_pre = std::max(supS_pre, st.S[static_cast<std::size_t>(i)]);

    const double fr = boundary_flux(st, grid, cfg.J1, FluxSide::Right, cfg.mu);
    const double fl = boundary_flux(st, grid, cfg.J1, FluxSide::Left, cfg.mu);

    const int m = hi - lo + 1;
    std::vector<double> dS(static_cast<std::size_t>(m), 0.0), dI(static_cast<std::size_t>(m), 0.0);
    for (int i = lo; i <= hi; ++i) {
        const double xi = grid.center(i);
        double conv1 = 0.0, conv2 = 0.0;
        for (int j = lo; j <= hi; ++j) {
            const double z = xi - grid.center(j);
            conv1 += cfg.J1.evaluate(z) * st.S[static_cast<std::size_t>(j)];
            conv2 += cfg.J2.evaluate(z) * st.I[static_cast<std::size_t>(j)];
        }
        conv1 *= dx;
        conv2 *= dx;

        auto upwind = [&](const std::vector<double>& U, double p) {
            if (p == 0.0) return 0.0;
            const int nb = p > 0.0 ? i + 1 : i - 1;
            const double Unb = (nb >= lo && nb <= hi) ? U[static_cast<std::size_t>(nb)] : 0.0;
            const double Ui = U[static_cast<std::size_t>(i)];
            return p > 0.0 ? p * (Unb - Ui) / dx : p * (Ui - Unb) / dx;
        };

        const double Si = st.S[static_cast<std::size_t>(i)];
        const double Ii = st.I[static_cast<std::size_t>(i)];
        const double gi = cfg.gamma[static_cast<std::size_t>(i)];
        const double Fi = cfg.incidence.F(Si, Ii);
        dS[static_cast<std::size_t>(i - lo)] =
            cfg.d1 * (conv1 - Si) + upwind(st.S, cfg.a[static_cast<std::size_t>(i)]) + gi * Ii - Fi;
        dI[static_cast<std::size_t>(i - lo)] =
            cfg.d2 * (conv2 - Ii) + upwind(st.I, cfg.b[static_cast<std::size_t>(i)]) - gi * Ii + Fi;
    }

    double clamp_added = 0.0;
    double min_seen = 0.0;
    auto apply = [&](std::vector<double>& U, const std::vector<double>& dU) {
        for (int i = lo; i <= hi; ++i) {
            double v = U[static_cast<std::size_t>(i)] + dt * dU[static_cast<std::size_t>(i - lo)];
            min_seen = std::min(min_seen, v);
            if (cfg.clamp_enabled && v < 0.0) {
                if (v < -cfg.clamp_tol) clamp_added += -v;
                v = 0.0;
            }
            U[static_cast<std::size_t>(i)] = v;
        }
    };
    apply(st.S, dS);
    apply(st.I, dI);

    const double h_new = st.window.h + dt * fr;
    const double g_new = st.window.g + dt * fl;
    if (h_new >= grid.xmax() || g_new <= grid.xmin)
        throw BoundaryHitGridEdgeError(
            "dynamics: free boundary reached the grid edge, rerun with a wider grid");
    const auto w = active_window(grid, g_new, h_new);
    if (!w) throw EmptyWindowError("dynamics: active window lost all cells");

    st.window = *w;
    st.flux_right = fr;
    st.flux_left = fl;
    st.t += dt;

    if (diag) {
        double supS = 0.0, supI = 0.0;
        for (int i = lo; i <= hi; ++i) {
            supS = std::max(supS, st.S[static_cast<std::size_t>(i)]);
            supI = std::max(supI, st.I[static_cast<std::size_t>(i)]);
        }
        diag->sup_S_run = std::max(diag->sup_S_run, supS);
        diag->sup_I_run = std::max(diag->sup_I_run, supI);
        diag->min_field_run = std::min(diag->min_field_run, min_seen);
        diag->clamp_total += clamp_added;
        diag->max_flux_minus_len_bound = std::max(
            diag->max_flux_minus_len_bound, std::max(fr, -fl) - cfg.mu * supS_pre * len_pre);
        diag->max_flux_minus_cj_bound = std::max(
            diag->max_flux_minus_cj_bound, std::max(fr, -fl) - cfg.mu * supS_pre * diag->C_J);
    }
}

struct Trajectory {
    std::vector<double> times;
    std::vector<double> g;
    std::vector<double> h;
    std::vector<double> supS;
    std::vector<double> supI;
    std::vector<double> len_envelope;  // 2 h0 exp(2 mu M_S t)
    SimulationState final_state;
    RunDiagnostics diag;
    double h0 = 0.0;
    double sup_S0 = 0.0;
    double sup_I0 = 0.0;
    bool clamp_budget_exceeded = false;

    int samples() const { return static_cast<int>(times.size()); }
};

/// Integrates the free-boundary system on [0, T]. Envelope diagnostics follow
/// the Gronwall bounds with the observed sup ||I|| as the R_I input, so the
/// recorded M_S / M_I are valid a posteriori bounds whenever the run itself
/// stayed under them.
inline Trajectory simulate(const SimConfig& cfg) {
    const Grid1D grid = cfg.grid();
    if (cfg.a.size() != static_cast<std::size_t>(grid.n) ||
        cfg.b.size() != static_cast<std::size_t>(grid.n) ||
        cfg.gamma.size() != static_cast<std::size_t>(grid.n))
        throw std::invalid_argument("dynamics: coefficient sample length does not match grid");
    const auto w0 = active_window(grid, -cfg.h0, cfg.h0);
    if (!w0) throw EmptyWindowError("dynamics: initial window holds no cell");

    SimulationState st;
    st.window = *w0;
    detail::sample_initial(cfg, grid, st.S, st.I, st.window);

    Trajectory traj;
    traj.h0 = cfg.h0;
    traj.sup_S0 = detail::sup_abs(st.S);
    traj.sup_I0 = detail::sup_abs(st.I);
    traj.diag.C_J = cfg.J1.abs_first_moment();
    traj.diag.sup_S_run = traj.sup_S0;
    traj.diag.sup_I_run = traj.sup_I0;

    double box = 2.0 * (traj.sup_S0 + traj.sup_I0) + 1.0;
    double dt = detail::cfl_dt_box(cfg, box, box);
    traj.diag.dt_initial = dt;
    const double clamp_budget = cfg.clamp_budget_rel * (traj.sup_S0 + traj.sup_I0);

    auto record = [&]() {
        traj.times.push_back(st.t);
        traj.g.push_back(st.window.g);
        traj.h.push_back(st.window.h);
        double supS = 0.0, supI = 0.0;
        for (int i = st.window.lo_idx; i <= st.window.hi_idx; ++i) {
            supS = std::max(supS, st.S[static_cast<std::size_t>(i)]);
            supI = std::max(supI, st.I[static_cast<std::size_t>(i)]);
        }
        traj.supS.push_back(supS);
        traj.supI.push_back(supI);
    };
    record();

    long step_index = 0;
    while (st.t < cfg.T - 1e-12) {
        if (traj.diag.sup_S_run + traj.diag.sup_I_run > 0.5 * box) {
            box *= 2.0;
            dt = detail::cfl_dt_box(cfg, box, box);
            ++traj.diag.dt_refreshes;
        }
        const double dt_step = std::min(dt, cfg.T - st.t);
        step(st, cfg, grid, dt_step, &traj.diag);
        ++step_index;
        if (traj.diag.clamp_total > clamp_budget && clamp_budget > 0.0)
            throw ClampBudgetExceededError(
                "dynamics: cumulative negative-clamp exceeded budget, reduce dt");
        if (step_index % std::max(1, cfg.record_every) == 0 || st.t >= cfg.T - 1e-12) record();
    }
    traj.diag.dt_final = dt;
    traj.final_state = st;

    // Gronwall envelopes at the horizon. The observed run suprema are valid
    // inputs for the a posteriori bounds: any R_I >= sup_t ||I|| makes the
    // S-envelope rigorous, and the Lipschitz constant belongs on a box that
    // dominates the solution itself, so the observed box is the sharp choice.
    const double RS = traj.diag.sup_S_run;
    const double RI = traj.diag.sup_I_run;
    double gmax = 0.0, gmin = std::numeric_limits<double>::infinity();
    for (double g : cfg.gamma) {
        gmax = std::max(gmax, g);
        gmin = std::min(gmin, g);
    }
    const double T = cfg.T;
    const double MS =
        cfg.d1 > 0.0
            ? std::exp(cfg.d1 * T) * traj.sup_S0 + gmax / cfg.d1 * (std::exp(cfg.d1 * T) - 1.0) * RI
            : traj.sup_S0 + gmax * RI * T;
    const double L = cfg.incidence.lipschitz_bound(RS, RI);
    const double alpha = cfg.d2 - gmin + L;
    const double MI = std::abs(alpha) > 1e-14
                          ? std::exp(alpha * T) * traj.sup_I0 +
                                L * RS / alpha * (std::exp(alpha * T) - 1.0)
                          : traj.sup_I0 + L * RS * T;
    traj.diag.M_S = MS;
    traj.diag.M_I = MI;
    // Length envelope 2 h0 exp(2 mu M t) with the observed S-bound as M; it
    // dominates the run and implies the same bound with any larger M.
    traj.len_envelope.resize(traj.times.size());
    for (std::size_t k = 0; k < traj.times.size(); ++k)
        traj.len_envelope[k] = 2.0 * cfg.h0 * std::exp(2.0 * cfg.mu * RS * traj.times[k]);
    return traj;
}

struct OrderingReport {
    bool ok = false;
    double worst_S_violation = 0.0;  // max(S_low - S_high) over samples
    double worst_I_violation = 0.0;
    double worst_g_violation = 0.0;  // max(g_high - g_low)
    double worst_h_violation = 0.0;  // max(h_low - h_high)
    int samples = 0;
};

/// Lockstep comparison run (Lemma-2 analog): identical grids, kernels, and
/// coefficients, ordered initial data; both trajectories advance with one
/// shared CFL dt so the discrete quasi-monotone ordering applies.
inline OrderingReport compare_runs(const SimConfig& lo_cfg, const SimConfig& hi_cfg,
                                   double tol = 1e-9) {
    auto same = [](double x, double y) { return x == y; };
    if (!same(lo_cfg.xmin, hi_cfg.xmin) || !same(lo_cfg.xmax, hi_cfg.xmax) ||
        lo_cfg.n != hi_cfg.n || lo_cfg.J1.describe() != hi_cfg.J1.describe() ||
        lo_cfg.J2.describe() != hi_cfg.J2.describe() || !same(lo_cfg.d1, hi_cfg.d1) ||
        !same(lo_cfg.d2, hi_cfg.d2) || lo_cfg.a != hi_cfg.a || lo_cfg.b != hi_cfg.b ||
        lo_cfg.gamma != hi_cfg.gamma || !same(lo_cfg.mu, hi_cfg.mu) ||
        !same(lo_cfg.h0, hi_cfg.h0) ||
        lo_cfg.incidence.describe() != hi_cfg.incidence.describe() || !same(lo_cfg.T, hi_cfg.T))
        throw PreconditionUnorderedError("compare: runs must share grid, kernels, and coefficients");

    const Grid1D grid = lo_cfg.grid();
    const auto w0 = active_window(grid, -lo_cfg.h0, lo_cfg.h0);
    if (!w0) throw EmptyWindowError("compare: initial window holds no cell");

    SimulationState lo, hi;
    lo.window = hi.window = *w0;
    detail::sample_initial(lo_cfg, grid, lo.S, lo.I, lo.window);
    detail::sample_initial(hi_cfg, grid, hi.S, hi.I, hi.window);
    for (std::size_t i = 0; i < lo.S.size(); ++i)
        if (lo.S[i] > hi.S[i] + 1e-14 || lo.I[i] > hi.I[i] + 1e-14)
            throw PreconditionUnorderedError("compare: initial data are not ordered low <= high");

    const double box =
        2.0 * (detail::sup_abs(hi.S) + detail::sup_abs(hi.I)) + 1.0;
    const double dt0 = std::min(detail::cfl_dt_box(lo_cfg, box, box),
                                detail::cfl_dt_box(hi_cfg, box, box));

    OrderingReport rep;
    const double T = lo_cfg.T;
    while (lo.t < T - 1e-12) {
        const double dt_step = std::min(dt0, T - lo.t);
        step(lo, lo_cfg, grid, dt_step);
        step(hi, hi_cfg, grid, dt_step);
        ++rep.samples;
        for (int i = 0; i < grid.n; ++i) {
            rep.worst_S_violation = std::max(
                rep.worst_S_violation, lo.S[static_cast<std::size_t>(i)] - hi.S[static_cast<std::size_t>(i)]);
            rep.worst_I_violation = std::max(
                rep.worst_I_violation, lo.I[static_cast<std::size_t>(i)] - hi.I[static_cast<std::size_t>(i)]);
        }
        rep.worst_g_violation = std::max(rep.worst_g_violation, hi.window.g - lo.window.g);
        rep.worst_h_violation = std::max(rep.worst_h_violation, lo.window.h - hi.window.h);
    }
    rep.ok = rep.worst_S_violation <= tol && rep.worst_I_violation <= tol &&
             rep.worst_g_violation <= tol && rep.worst_h_violation <= tol;
    return rep;
}

}  // namespace frontera
