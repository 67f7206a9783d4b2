#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "frontera/grid.hpp"
#include "frontera/kernels.hpp"
#include "frontera/operator_matrix.hpp"

namespace frontera {

struct SpectralError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergenceError : SpectralError {
    NonConvergenceError(int iters, double residual)
        : SpectralError("eigen: power iteration did not converge after " + std::to_string(iters) +
                        " steps, residual " + std::to_string(residual)),
          iterations(iters),
          last_residual(residual) {}
    int iterations;
    double last_residual;
};

struct ReducibleSuspectedError : SpectralError {
    using SpectralError::SpectralError;
};

struct SingularVError : SpectralError {
    using SpectralError::SpectralError;
};

struct SingularShiftError : SpectralError {
    using SpectralError::SpectralError;
};

struct UnstableAsError : SpectralError {
    using SpectralError::SpectralError;
};

struct BracketInvalidError : SpectralError {
    using SpectralError::SpectralError;
};

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> phi;  // strictly positive, sup-norm 1
    double residual = 0.0;    // ||M phi - lambda phi||_inf
    int iterations = 0;
};

struct EigenOptions {
    double tol_rel = 1e-10;  // residual threshold relative to ||M||_inf
    int max_iter = 50000;
};

namespace detail {

inline Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
as_eigen(const OperatorMatrix& M) {
    return {M.entries().data(), M.size(), M.size()};
}

}  // namespace detail

/// Perron pair of a Metzler matrix by power iteration on M + sI with the
/// max-shift s = 1 + max|M_ii|; the shifted matrix is entrywise nonnegative
/// with positive diagonal, so the iteration converges to the Perron pair for
/// irreducible matrices without any factorization. Off-diagonals may dip
/// negative by a relative 1e-6 to admit Schur complements of weakly coupled
/// blocks, which perturb the Metzler structure at the coupling scale.
inline EigenResult principal_eigenpair(const OperatorMatrix& M, const EigenOptions& opts = {}) {
    const int m = M.size();
    if (M.min_off_diagonal() < -1e-6 * std::max(M.sup_norm(), 1.0))
        throw std::invalid_argument("eigen: matrix has a negative off-diagonal entry");

    double shift = 0.0;
    for (int i = 0; i < m; ++i) shift = std::max(shift, std::abs(M.at(i, i)));
    shift += 1.0;

    const double norm = M.sup_norm();
    const double tol_abs = opts.tol_rel * std::max(norm, 1.0);

    std::vector<double> x(static_cast<std::size_t>(m), 1.0);
    std::vector<double> y(static_cast<std::size_t>(m), 0.0);
    double mu = 0.0;  // Perron value of the shifted matrix
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        for (int i = 0; i < m; ++i) {
            double s = shift * x[static_cast<std::size_t>(i)];
            const double* row = &M.entries()[static_cast<std::size_t>(i) * m];
            for (int j = 0; j < m; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
            y[static_cast<std::size_t>(i)] = s;
        }
        mu = 0.0;
        for (double v : y) mu = std::max(mu, v);
        if (!(mu > 0.0)) throw ReducibleSuspectedError("eigen: shifted iterate collapsed to zero");
        residual = 0.0;
        for (int i = 0; i < m; ++i)
            residual = std::max(residual, std::abs(y[static_cast<std::size_t>(i)] -
                                                   mu * x[static_cast<std::size_t>(i)]));
        for (int i = 0; i < m; ++i) x[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / mu;
        if (residual < tol_abs) {
            ++it;
            break;
        }
    }
    if (residual >= tol_abs) throw NonConvergenceError(opts.max_iter, residual);
    for (double v : x)
        if (v < 1e-14)
            throw ReducibleSuspectedError(
                "eigen: eigenvector has near-zero entries, matrix may be reducible");
    return EigenResult{mu - shift, std::move(x), residual, it};
}

/// Rightmost real part of the full spectrum, via a dense eigensolve. Oracle
/// route, independent of the power iteration.
inline double rightmost_eigenvalue_dense(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw SpectralError("eigen: dense eigensolver failed");
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < A.rows(); ++i) best = std::max(best, es.eigenvalues()[i].real());
    return best;
}

inline double rightmost_eigenvalue_dense(const OperatorMatrix& M) {
    return rightmost_eigenvalue_dense(Eigen::MatrixXd(detail::as_eigen(M)));
}

/// Generalized principal eigenvalue of L = d(K - I) + b d/dx + diag(beta) on
/// (L1,L2), as the Perron root of the collocation matrix on a dedicated grid
/// with `resolution` cells.
inline EigenResult lambda_p(double L1, double L2, double d, const KernelSpec& kernel,
                            std::span<const double> b, std::span<const double> beta, int resolution,
                            const EigenOptions& opts = {}) {
    const Grid1D grid = build_grid(L1, L2, resolution);
    OperatorMatrix M = assemble_operator(grid, d, kernel, b, beta);
    return principal_eigenpair(M, opts);
}

/// Same, with coefficient profiles sampled on the dedicated grid.
inline EigenResult lambda_p(double L1, double L2, double d, const KernelSpec& kernel,
                            const std::function<double(double)>& b,
                            const std::function<double(double)>& beta, int resolution,
                            const EigenOptions& opts = {}) {
    const Grid1D grid = build_grid(L1, L2, resolution);
    std::vector<double> bs(static_cast<std::size_t>(resolution));
    std::vector<double> betas(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        bs[static_cast<std::size_t>(i)] = b(grid.center(i));
        betas[static_cast<std::size_t>(i)] = beta(grid.center(i));
    }
    OperatorMatrix M = assemble_operator(grid, d, kernel, bs, betas);
    return principal_eigenpair(M, opts);
}

struct R0Result {
    double value = 0.0;
    std::vector<double> eigvec;  // nonnegative, sup-norm 1 (zero when value == 0)
    double residual = 0.0;
    int iterations = 0;
};

struct R0Options {
    double tol = 1e-12;
    int max_iter = 20000;
};

namespace detail {

/// Spectral radius of K_lambda = (V + lambda I)^{-1} F with V = -Ai, by power
/// iteration with one LU factorization. Requires lambda > lambda_p(Ai) so the
/// resolvent is positive.
inline R0Result k_radius_impl(const OperatorMatrix& Ai, std::span<const double> F_diag,
                              double lambda, const R0Options& opts) {
    const int m = Ai.size();
    if (static_cast<int>(F_diag.size()) != m)
        throw std::invalid_argument("r0: F diagonal length mismatch");

    Eigen::MatrixXd Vs = -Eigen::MatrixXd(as_eigen(Ai));
    Vs.diagonal().array() += lambda;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Vs);

    double fmax = 0.0;
    for (double f : F_diag) {
        if (f < 0.0) throw std::invalid_argument("r0: F diagonal must be nonnegative");
        fmax = std::max(fmax, f);
    }
    if (fmax == 0.0) return R0Result{0.0, std::vector<double>(static_cast<std::size_t>(m), 0.0), 0.0, 0};

    Eigen::VectorXd u = Eigen::VectorXd::Ones(m);
    double rho = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        Eigen::VectorXd w = u;
        for (int i = 0; i < m; ++i) w[i] *= F_diag[static_cast<std::size_t>(i)];
        Eigen::VectorXd v = lu.solve(w);
        rho = v.lpNorm<Eigen::Infinity>();
        if (!(rho > 0.0)) return R0Result{0.0, std::vector<double>(static_cast<std::size_t>(m), 0.0), 0.0, it};
        residual = (v - rho * u).lpNorm<Eigen::Infinity>();
        u = v / rho;
        if (residual < opts.tol * std::max(1.0, rho)) {
            ++it;
            break;
        }
    }
    R0Result out;
    out.value = rho;
    out.eigvec.assign(u.data(), u.data() + m);
    for (double& v : out.eigvec) v = std::max(v, 0.0);
    out.residual = residual;
    out.iterations = it;
    return out;
}

}  // namespace detail

/// Basic reproduction number R0 = r(V^{-1} F) with V = -Ai; Ai must be stable
/// (Perron root < -1e-10), otherwise the next-generation operator is not
/// well defined and SingularV is raised.
inline R0Result basic_reproduction_number(const OperatorMatrix& Ai, std::span<const double> F_diag,
                                          const R0Options& opts = {}) {
    const EigenResult sAi = principal_eigenpair(Ai);
    if (sAi.lambda >= -1e-10)
        throw SingularVError("r0: spectral bound of A_I is not strictly negative (" +
                             std::to_string(sAi.lambda) + "), V is not invertible-positive");
    return detail::k_radius_impl(Ai, F_diag, 0.0, opts);
}

/// r(K_lambda) for a shifted next-generation operator; decreasing in lambda.
inline double k_lambda_radius(const OperatorMatrix& Ai, std::span<const double> F_diag,
                              double lambda, const R0Options& opts = {}) {
    const EigenResult sAi = principal_eigenpair(Ai);
    if (lambda <= sAi.lambda + 1e-12)
        throw SingularShiftError("r0: shift lambda must exceed the Perron root of A_I for a positive resolvent");
    return detail::k_radius_impl(Ai, F_diag, lambda, opts).value;
}

struct CriticalLengthOptions {
    double lambda_tol = 1e-6;
    double length_tol = 1e-4;
    int max_iter = 200;
    int resolution = 200;
};

/// Builds beta (and b) samples for a given interval grid; recomputed per
/// bisection step since the disease-free profile depends on the interval.
using ProfileBuilder = std::function<std::vector<double>(const Grid1D&)>;

struct CriticalLengthResult {
    double ell_star = 0.0;   // full length 2h
    double lambda_at_root = 0.0;
    int iterations = 0;
};

/// Critical habitat length: bisection on the half-length h of (-h,h) for the
/// sign change of lambda_p(d2(K-I) + b d/dx + beta). Requires a valid bracket:
/// lambda_p(hLo) < 0 < lambda_p(hHi).
inline CriticalLengthResult critical_length(double d2, const KernelSpec& kernel,
                                            const ProfileBuilder& b_profile,
                                            const ProfileBuilder& beta_profile, double h_lo,
                                            double h_hi, const CriticalLengthOptions& opts = {}) {
    if (!(h_lo > 0.0) || !(h_hi > h_lo))
        throw BracketInvalidError("critical-length: need 0 < hLo < hHi");

    auto lam = [&](double h) {
        const Grid1D grid = build_grid(-h, h, opts.resolution);
        const std::vector<double> b = b_profile(grid);
        const std::vector<double> beta = beta_profile(grid);
        double beta_max = -std::numeric_limits<double>::infinity();
        for (double v : beta) beta_max = std::max(beta_max, v);
        if (beta_max <= 0.0)
            throw BracketInvalidError(
                "critical-length: sup beta <= 0, lambda_p <= max beta < 0 for every interval");
        OperatorMatrix M = assemble_operator(grid, d2, kernel, b, beta);
        return principal_eigenpair(M).lambda;
    };

    double f_lo = lam(h_lo);
    double f_hi = lam(h_hi);
    if (!(f_lo < 0.0) || !(f_hi > 0.0))
        throw BracketInvalidError("critical-length: bracket does not straddle the sign change (lambda_p(hLo)=" +
                                  std::to_string(f_lo) + ", lambda_p(hHi)=" + std::to_string(f_hi) + ")");

    double mid = 0.5 * (h_lo + h_hi);
    double f_mid = 0.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
        mid = 0.5 * (h_lo + h_hi);
        f_mid = lam(mid);
        if (std::abs(f_mid) < opts.lambda_tol || (h_hi - h_lo) < opts.length_tol) break;
        if (f_mid < 0.0)
            h_lo = mid;
        else
            h_hi = mid;
    }
    return CriticalLengthResult{2.0 * mid, f_mid, it + 1};
}

/// Linearized block operator about the disease-free state:
///   [ As  diag(B) ]
///   [ diag(C)  Ai ]
struct BlockOperator {
    OperatorMatrix As;
    OperatorMatrix Ai;
    std::vector<double> B_diag;
    std::vector<double> C_diag;

    Eigen::MatrixXd assemble_full() const {
        const int m = As.size();
        if (Ai.size() != m || static_cast<int>(B_diag.size()) != m ||
            static_cast<int>(C_diag.size()) != m)
            throw std::invalid_argument("block: component sizes disagree");
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * m, 2 * m);
        A.topLeftCorner(m, m) = Eigen::MatrixXd(detail::as_eigen(As));
        A.bottomRightCorner(m, m) = Eigen::MatrixXd(detail::as_eigen(Ai));
        for (int i = 0; i < m; ++i) {
            A(i, m + i) = B_diag[static_cast<std::size_t>(i)];
            A(m + i, i) = C_diag[static_cast<std::size_t>(i)];
        }
        return A;
    }
};

/// s(A) = sup of real parts of the assembled 2m x 2m spectrum.
inline double block_spectral_bound(const BlockOperator& block) {
    return rightmost_eigenvalue_dense(block.assemble_full());
}

/// Effective infection operator L_eff = Ai - C As^{-1} B (Schur complement at
/// zero). Requires s(As) < 0.
inline OperatorMatrix effective_operator(const BlockOperator& block) {
    const int m = block.As.size();
    const EigenResult sAs = principal_eigenpair(block.As);
    if (sAs.lambda >= 0.0)
        throw UnstableAsError("block: A_s is not stable, Schur reduction unavailable");

    Eigen::MatrixXd As = Eigen::MatrixXd(detail::as_eigen(block.As));
    Eigen::MatrixXd Bd = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) Bd(i, i) = block.B_diag[static_cast<std::size_t>(i)];
    Eigen::MatrixXd Y = As.partialPivLu().solve(Bd);

    OperatorMatrix out(block.Ai.interval_lo(), block.Ai.interval_hi(), m);
    out.d = block.Ai.d;
    out.kernel_id = block.Ai.kernel_id;
    out.zeroth = block.Ai.zeroth;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            out.at(i, j) = block.Ai.at(i, j) - block.C_diag[static_cast<std::size_t>(i)] * Y(i, j);
    return out;
}

}  // namespace frontera
