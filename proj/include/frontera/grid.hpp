#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace frontera {

/// Uniform cell-centered grid: node i sits at xmin + (i + 1/2) dx. No node
/// ever coincides with an interval endpoint, which keeps the Dirichlet
/// exterior rule exact.
struct Grid1D {
    double xmin;
    double dx;
    int n;

    double center(int i) const { return xmin + (static_cast<double>(i) + 0.5) * dx; }
    double xmax() const { return xmin + static_cast<double>(n) * dx; }
};

inline Grid1D build_grid(double xmin, double xmax, int n) {
    if (!(xmax > xmin)) throw std::invalid_argument("grid: xmax must exceed xmin");
    if (n < 3) throw std::invalid_argument("grid: need at least 3 cells");
    return Grid1D{xmin, (xmax - xmin) / static_cast<double>(n), n};
}

/// Inclusive index range of cell centers strictly inside (g,h).
struct ActiveWindow {
    double g;
    double h;
    int lo_idx;
    int hi_idx;

    int size() const { return hi_idx - lo_idx + 1; }
    bool contains(int i) const { return i >= lo_idx && i <= hi_idx; }
};

/// Maximal window of centers inside (g,h); nullopt when no center qualifies
/// (a reported outcome, not an error, so small-interval sweeps stop gracefully).
inline std::optional<ActiveWindow> active_window(const Grid1D& grid, double g, double h) {
    if (!(g < h)) throw std::invalid_argument("window: requires g < h");
    int lo = static_cast<int>(std::floor((g - grid.xmin) / grid.dx - 0.5)) + 1;
    lo = std::max(lo, 0);
    while (lo < grid.n && grid.center(lo) <= g) ++lo;
    int hi = static_cast<int>(std::ceil((h - grid.xmin) / grid.dx - 0.5)) - 1;
    hi = std::min(hi, grid.n - 1);
    while (hi >= 0 && grid.center(hi) >= h) --hi;
    if (lo > hi || lo >= grid.n || hi < 0) return std::nullopt;
    return ActiveWindow{g, h, lo, hi};
}

/// Strictly positive coefficient samples a, b, gamma on a grid, optionally
/// ell-periodic.
struct CoefficientSet {
    std::vector<double> a;
    std::vector<double> b;
    std::vector<double> gamma;
    std::optional<double> period;
};

/// Checks (H2)-style constraints; returns an empty string on success, else a
/// message naming the offending coefficient.
inline std::string check_coefficients(const CoefficientSet& c, const Grid1D& grid) {
    const std::size_t n = static_cast<std::size_t>(grid.n);
    if (c.a.size() != n || c.b.size() != n || c.gamma.size() != n)
        return "coefficient sample length does not match grid";
    auto nonneg = [](const std::vector<double>& v) {
        for (double x : v)
            if (x < 0.0) return false;
        return true;
    };
    if (!nonneg(c.a)) return "coefficient a has a negative entry, violates (H2)";
    if (!nonneg(c.b)) return "coefficient b has a negative entry, violates (H2)";
    for (double x : c.gamma)
        if (!(x >= 0.0)) return "coefficient gamma has a negative entry, violates (H2)";
    if (c.period) {
        const double ell = *c.period;
        if (!(ell > 0.0)) return "coefficient period must be positive, violates (H2)";
        const double cells = ell / grid.dx;
        const int k = static_cast<int>(std::lround(cells));
        if (k >= 1 && std::abs(cells - k) * grid.dx < 1e-9) {
            for (int i = 0; i + k < grid.n; ++i) {
                if (std::abs(c.a[i] - c.a[i + k]) > 1e-9 ||
                    std::abs(c.b[i] - c.b[i + k]) > 1e-9 ||
                    std::abs(c.gamma[i] - c.gamma[i + k]) > 1e-9)
                    return "coefficients are not ell-periodic within 1e-9, violates (H2)";
            }
        }
    }
    return {};
}

}  // namespace frontera
