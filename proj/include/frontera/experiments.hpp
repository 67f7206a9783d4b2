#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontera/dynamics.hpp"
#include "frontera/equilibrium.hpp"
#include "frontera/spectral.hpp"

namespace frontera {

struct TooShortError : DynamicsError {
    using DynamicsError::DynamicsError;
};

enum class VerdictKind { Spreading, Vanishing, Undecided };

inline const char* to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Spreading: return "Spreading";
        case VerdictKind::Vanishing: return "Vanishing";
        case VerdictKind::Undecided: return "Undecided";
    }
    return "?";
}

struct ClassifyTols {
    double tolI = 1e-4;
    double tolG = 1e-4;
    double margin = 0.05;
};

/// Finite-horizon proxy for the spreading--vanishing dichotomy, with
/// quantitative evidence. The infinite-time alternatives themselves are out of
/// reach at a finite horizon, hence the explicit Undecided outcome.
struct Verdict {
    VerdictKind kind = VerdictKind::Undecided;
    double final_length = 0.0;
    double length_growth_rate = 0.0;  // over the last 20% of the horizon
    double supI_final = 0.0;
    double supI_trend = 0.0;          // signed slope of sup I over the last 20%
    std::optional<double> ell_star_reference;
    std::optional<double> supS_gap;   // ||S(T) - S*||_inf, Vanishing only
};

namespace detail {

/// Linear interpolation of a cell-centered sample vector at x (clamped).
inline double sample_at(const std::vector<double>& v, const Grid1D& grid, double x) {
    if (v.empty()) return 0.0;
    const double s = (x - grid.xmin) / grid.dx - 0.5;
    if (s <= 0.0) return v.front();
    if (s >= static_cast<double>(grid.n - 1)) return v.back();
    const auto i = static_cast<std::size_t>(s);
    const double w = s - static_cast<double>(i);
    return v[i] * (1.0 - w) + v[i + 1] * w;
}

}  // namespace detail

/// Classifies a finished trajectory. Vanishing needs a dead infection and a
/// stalled habitat; Spreading needs live infection plus a habitat beyond the
/// critical-length reference (or, with no reference, visible growth). The
/// Vanishing branch also reports the sup gap between S(T) and the disease-free
/// profile on the final window, shape-matched by normalizing S* to max S(T)
/// (the profile is defined only up to scale).
inline Verdict classify(const Trajectory& traj, const SimConfig& cfg,
                        std::optional<double> ell_star = std::nullopt,
                        const ClassifyTols& tols = {}) {
    if (traj.samples() < 50)
        throw TooShortError("classify: need at least 50 recorded samples");

    Verdict v;
    v.ell_star_reference = ell_star;
    v.supI_final = traj.supI.back();
    v.final_length = traj.h.back() - traj.g.back();

    const double t_end = traj.times.back();
    const double t_cut = 0.8 * t_end;
    std::size_t k80 = 0;
    while (k80 + 1 < traj.times.size() && traj.times[k80] < t_cut) ++k80;
    const double dt_tail = std::max(t_end - traj.times[k80], 1e-12);
    v.length_growth_rate =
        ((traj.h.back() - traj.g.back()) - (traj.h[k80] - traj.g[k80])) / dt_tail;
    v.supI_trend = (traj.supI.back() - traj.supI[k80]) / dt_tail;

    const bool vanishing = v.supI_final < tols.tolI && v.length_growth_rate < tols.tolG;
    const bool spreading =
        ell_star ? (v.final_length > *ell_star + tols.margin && v.supI_final > tols.tolI)
                 : (v.supI_final > tols.tolI && v.length_growth_rate > tols.tolG);

    if (vanishing) {
        v.kind = VerdictKind::Vanishing;
        const Grid1D grid = cfg.grid();
        const ActiveWindow& w = traj.final_state.window;
        const int m = w.size();
        double maxS = 0.0;
        for (int i = w.lo_idx; i <= w.hi_idx; ++i)
            maxS = std::max(maxS, traj.final_state.S[static_cast<std::size_t>(i)]);
        if (m >= 3 && maxS > 0.0) {
            const double sub_lo = grid.xmin + w.lo_idx * grid.dx;
            const double sub_hi = grid.xmin + (w.hi_idx + 1) * grid.dx;
            std::vector<double> a_sub(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i)
                a_sub[static_cast<std::size_t>(i)] = cfg.a[static_cast<std::size_t>(w.lo_idx + i)];
            const DiseaseFreeProfile p =
                disease_free_profile(sub_lo, sub_hi, cfg.d1, cfg.J1, a_sub, m, maxS);
            double gap = 0.0;
            for (int i = 0; i < m; ++i)
                gap = std::max(gap, std::abs(traj.final_state.S[static_cast<std::size_t>(w.lo_idx + i)] -
                                             p.Sstar[static_cast<std::size_t>(i)]));
            v.supS_gap = gap;
        } else {
            v.supS_gap = maxS;
        }
    } else if (spreading) {
        v.kind = VerdictKind::Spreading;
    } else {
        v.kind = VerdictKind::Undecided;
    }
    return v;
}

/// Critical length of the config's own linearized infected operator: the
/// beta profile is rebuilt per candidate interval from the disease-free
/// profile, with coefficients interpolated off the global grid.
inline CriticalLengthResult critical_length_for(const SimConfig& cfg, double h_lo, double h_hi,
                                                const CriticalLengthOptions& opts = {}) {
    const Grid1D global = cfg.grid();
    auto b_of = [&](const Grid1D& g) {
        std::vector<double> out(static_cast<std::size_t>(g.n));
        for (int i = 0; i < g.n; ++i)
            out[static_cast<std::size_t>(i)] = detail::sample_at(cfg.b, global, g.center(i));
        return out;
    };
    auto beta_of = [&](const Grid1D& g) {
        std::vector<double> a_sub(static_cast<std::size_t>(g.n));
        std::vector<double> gamma_sub(static_cast<std::size_t>(g.n));
        for (int i = 0; i < g.n; ++i) {
            a_sub[static_cast<std::size_t>(i)] = detail::sample_at(cfg.a, global, g.center(i));
            gamma_sub[static_cast<std::size_t>(i)] = detail::sample_at(cfg.gamma, global, g.center(i));
        }
        const DiseaseFreeProfile p =
            disease_free_profile(g.xmin, g.xmax(), cfg.d1, cfg.J1, a_sub, g.n, cfg.Scap);
        return beta_profile(p, cfg.incidence, gamma_sub);
    };
    return critical_length(cfg.d2, cfg.J2, b_of, beta_of, h_lo, h_hi, opts);
}

struct MuRow {
    double mu;
    VerdictKind verdict;
    double supI_final;
    double final_length;
};

struct ThresholdEstimate {
    double mu_star = 0.0;
    double mu_lo = 0.0;
    double mu_hi = 0.0;
    int iterations = 0;
    VerdictKind verdict_lo = VerdictKind::Undecided;
    VerdictKind verdict_hi = VerdictKind::Undecided;
    bool undecided_at_midpoint = false;
    double ell_star = 0.0;
    std::vector<MuRow> rows;
};

struct MuStarOptions {
    int max_iter = 12;
    double rel_width = 0.04;      // stop when bracket width / initial width <= this
    ClassifyTols tols{};
    CriticalLengthOptions ell_opts{};
    double ell_bracket_lo = 0.0;  // 0: derived from h0
    double ell_bracket_hi = 0.0;  // 0: derived from the grid span
};

/// Bisection for the critical expansion rate mu*. Midpoints that classify
/// Undecided get one horizon doubling before the estimate is reported as
/// UndecidedAtMidpoint with the bracket as-is.
inline ThresholdEstimate estimate_mu_star(const SimConfig& tmpl, double mu_lo, double mu_hi,
                                          const MuStarOptions& opts = {}) {
    if (!(mu_lo >= 0.0) || !(mu_hi > mu_lo))
        throw BracketInvalidError("mu-star: need 0 <= muLo < muHi");

    const double h_lo = opts.ell_bracket_lo > 0.0 ? opts.ell_bracket_lo : 0.9 * tmpl.h0;
    const double h_hi = opts.ell_bracket_hi > 0.0
                            ? opts.ell_bracket_hi
                            : 0.45 * (tmpl.xmax - tmpl.xmin);
    const CriticalLengthResult ell = critical_length_for(tmpl, h_lo, h_hi, opts.ell_opts);
    if (!(tmpl.h0 < 0.5 * ell.ell_star))
        throw BracketInvalidError(
            "mu-star: h0 >= ell*/2, spreading occurs for every mu, no threshold to bracket");

    ThresholdEstimate est;
    est.ell_star = ell.ell_star;

    auto run = [&](double mu, bool allow_extend) {
        SimConfig cfg = tmpl;
        cfg.mu = mu;
        Verdict v = classify(simulate(cfg), cfg, ell.ell_star, opts.tols);
        if (v.kind == VerdictKind::Undecided && allow_extend) {
            cfg.T = 2.0 * tmpl.T;
            v = classify(simulate(cfg), cfg, ell.ell_star, opts.tols);
        }
        est.rows.push_back(MuRow{mu, v.kind, v.supI_final, v.final_length});
        return v.kind;
    };

    est.verdict_lo = run(mu_lo, true);
    est.verdict_hi = run(mu_hi, true);
    if (est.verdict_lo != VerdictKind::Vanishing)
        throw BracketInvalidError("mu-star: verdict at muLo is not Vanishing");
    if (est.verdict_hi != VerdictKind::Spreading)
        throw BracketInvalidError("mu-star: verdict at muHi is not Spreading");

    const double width0 = mu_hi - mu_lo;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        if ((mu_hi - mu_lo) <= opts.rel_width * width0) break;
        const double mid = 0.5 * (mu_lo + mu_hi);
        const VerdictKind k = run(mid, true);
        if (k == VerdictKind::Undecided) {
            est.undecided_at_midpoint = true;
            break;
        }
        if (k == VerdictKind::Vanishing)
            mu_lo = mid;
        else
            mu_hi = mid;
    }
    est.mu_lo = mu_lo;
    est.mu_hi = mu_hi;
    est.mu_star = 0.5 * (mu_lo + mu_hi);
    est.iterations = it;
    return est;
}

struct SweepRow {
    double parameter;  // d or eps
    double lambda_p;
    double gap;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    bool gaps_decreasing = true;
};

struct EigenSweepParams {
    KernelSpec kernel = KernelSpec::uniform_asymmetric(-0.5, 0.5);
    std::function<double(double)> b = [](double) { return 0.0; };
    std::function<double(double)> beta = [](double) { return 0.0; };
    int resolution = 200;
};

/// Small-diffusion sweep on a fixed interval; gap column measured against
/// max beta, which must be attained at an interior sample.
inline SweepResult sweep_small_d(const EigenSweepParams& p, double L1, double L2,
                                 const std::vector<double>& d_list) {
    const Grid1D grid = build_grid(L1, L2, p.resolution);
    double beta_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.n; ++i) beta_max = std::max(beta_max, p.beta(grid.center(i)));
    bool interior_max = false;
    for (int i = 1; i + 1 < grid.n; ++i)
        if (p.beta(grid.center(i)) >= beta_max - 1e-12 * (1.0 + std::abs(beta_max)))
            interior_max = true;
    if (!interior_max)
        throw std::invalid_argument("sweep: beta must attain an interior maximum");

    SweepResult out;
    for (double d : d_list) {
        const EigenResult r = lambda_p(L1, L2, d, p.kernel, p.b, p.beta, p.resolution);
        out.rows.push_back(SweepRow{d, r.lambda, std::abs(r.lambda - beta_max)});
    }
    for (std::size_t k = 1; k < out.rows.size(); ++k)
        if (!(out.rows[k].gap < out.rows[k - 1].gap)) out.gaps_decreasing = false;
    return out;
}

/// Small-interval sweep centered at x0 with fixed d; gap column measured
/// against the limit beta(x0) - d.
inline SweepResult sweep_small_interval(const EigenSweepParams& p, double d,
                                        const std::vector<double>& eps_list, double x0) {
    if (p.resolution < 3)
        throw EmptyWindowError("sweep: resolution floor is 3 cells per interval");
    SweepResult out;
    const double limit = p.beta(x0) - d;
    for (double eps : eps_list) {
        if (!(eps > 0.0)) throw EmptyWindowError("sweep: interval length must be positive");
        const EigenResult r =
            lambda_p(x0 - eps / 2.0, x0 + eps / 2.0, d, p.kernel, p.b, p.beta, p.resolution);
        out.rows.push_back(SweepRow{eps, r.lambda, std::abs(r.lambda - limit)});
    }
    for (std::size_t k = 1; k < out.rows.size(); ++k)
        if (!(out.rows[k].gap < out.rows[k - 1].gap)) out.gaps_decreasing = false;
    return out;
}

}  // namespace frontera
