#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "frontera/grid.hpp"
#include "frontera/kernels.hpp"

namespace frontera {

/// Dense collocation matrix of a nonlocal-advection operator
///   L[phi] = d (int_Omega J(x-y) phi(y) dy - phi) + p phi' + c phi
/// on an interval with Dirichlet exterior condition. Off-diagonals are
/// nonnegative by construction (Metzler), which the Perron iteration relies on.
class OperatorMatrix {
public:
    OperatorMatrix(double L1, double L2, int m)
        : L1_(L1), L2_(L2), m_(m), a_(static_cast<std::size_t>(m) * m, 0.0) {
        if (m < 1) throw std::invalid_argument("operator: size must be positive");
    }

    double& at(int i, int j) { return a_[static_cast<std::size_t>(i) * m_ + j]; }
    double at(int i, int j) const { return a_[static_cast<std::size_t>(i) * m_ + j]; }

    int size() const { return m_; }
    double interval_lo() const { return L1_; }
    double interval_hi() const { return L2_; }
    const std::vector<double>& entries() const { return a_; }
    std::vector<double>& entries() { return a_; }

    double d = 0.0;
    std::string kernel_id;
    std::string drift_rule = "upwind-by-sign";
    std::vector<double> zeroth;

    std::vector<double> apply(const std::vector<double>& v) const {
        if (static_cast<int>(v.size()) != m_)
            throw std::invalid_argument("operator: apply length mismatch");
        std::vector<double> out(static_cast<std::size_t>(m_), 0.0);
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* row = a_.data() + static_cast<std::size_t>(i) * m_;
            for (int j = 0; j < m_; ++j) s += row[j] * v[j];
            out[static_cast<std::size_t>(i)] = s;
        }
        return out;
    }

    double row_sum(int i) const {
        double s = 0.0;
        for (int j = 0; j < m_; ++j) s += at(i, j);
        return s;
    }

    double min_off_diagonal() const {
        double lo = 0.0;
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j)
                if (i != j) lo = std::min(lo, at(i, j));
        return lo;
    }

    double sup_norm() const {
        double best = 0.0;
        for (int i = 0; i < m_; ++i) {
            double s = 0.0;
            for (int j = 0; j < m_; ++j) s += std::abs(at(i, j));
            best = std::max(best, s);
        }
        return best;
    }

private:
    double L1_, L2_;
    int m_;
    std::vector<double> a_;
};

/// Boundary rule for the drift stencil when the upwind neighbor falls outside
/// the interval. Conservative drops the drift term there, so the drift block
/// annihilates constants on every row, matching how the operator acts on the
/// constant test functions that carry the small-d and small-interval limits.
/// DirichletLeak substitutes the exterior value 0 and keeps the -|p|/dx
/// diagonal part, which makes row/column deletion agree exactly with
/// reassembly on the subinterval.
enum class DriftBoundary { Conservative, DirichletLeak };

/// Composite-midpoint collocation of L on the cells of `grid` (one row per
/// cell center). Drift is differenced one-sidedly toward the transport
/// direction of u_t = p u_x: forward neighbor for p > 0, backward for p < 0.
inline OperatorMatrix assemble_operator(const Grid1D& grid, double d, const KernelSpec& kernel,
                                        std::span<const double> drift,
                                        std::span<const double> zeroth,
                                        DriftBoundary boundary = DriftBoundary::Conservative) {
    if (d < 0.0) throw std::invalid_argument("operator: negative diffusion rate");
    const int m = grid.n;
    if (static_cast<int>(drift.size()) != m || static_cast<int>(zeroth.size()) != m)
        throw std::invalid_argument("operator: sample length does not match grid");

    OperatorMatrix M(grid.xmin, grid.xmax(), m);
    M.d = d;
    M.kernel_id = kernel.describe();
    M.zeroth.assign(zeroth.begin(), zeroth.end());

    const double dx = grid.dx;
    for (int i = 0; i < m; ++i) {
        const double xi = grid.center(i);
        for (int j = 0; j < m; ++j) {
            if (j == i) continue;
            M.at(i, j) = d * kernel.evaluate(xi - grid.center(j)) * dx;
        }
        M.at(i, i) = -d + d * kernel.evaluate(0.0) * dx + zeroth[static_cast<std::size_t>(i)];

        const double p = drift[static_cast<std::size_t>(i)];
        if (p != 0.0) {
            const int nb = (p > 0.0) ? i + 1 : i - 1;
            const bool interior = nb >= 0 && nb < m;
            if (interior || boundary == DriftBoundary::DirichletLeak) {
                M.at(i, i) -= std::abs(p) / dx;
                if (interior) M.at(i, nb) += std::abs(p) / dx;
            }
        }
    }
    return M;
}

}  // namespace frontera
