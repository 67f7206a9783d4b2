#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "frontera/kernels.hpp"
#include "frontera/operator_matrix.hpp"

namespace testing_support {

/// Adaptive Simpson quadrature, independent of every library integration path.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    // Seed the recursion with 32 panels so narrow features cannot hide between
    // the initial probe points.
    const int panels = 32;
    const double w = (b - a) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double pa = a + k * w, pb = pa + w;
        const double m = 0.5 * (pa + pb);
        const double fa = f(pa), fm = f(m), fb = f(pb);
        const double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        acc += simpson_rec(f, pa, pb, fa, fm, fb, whole, tol / panels, 40);
    }
    return acc;
}

/// Random kernels whose support contains a neighborhood of 0, so assembled
/// operators stay irreducible.
inline frontera::KernelSpec random_kernel(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (pick(rng)) {
        case 0: {
            const double w = 0.6 + 1.0 * u(rng);
            const double off = (w / 2 - 0.2) * (2.0 * u(rng) - 1.0);
            return frontera::KernelSpec::uniform_asymmetric(off - w / 2, off + w / 2);
        }
        case 1:
            return frontera::KernelSpec::asymmetric_laplace(0.8 + 2.0 * u(rng), 0.8 + 2.0 * u(rng),
                                                            0.2 + 0.6 * u(rng));
        default:
            return frontera::KernelSpec::shifted_gaussian(-0.2 + 0.4 * u(rng), 0.3 + 0.7 * u(rng));
    }
}

/// Smooth random reaction profile with a few Fourier modes.
inline std::vector<double> random_profile(std::mt19937_64& rng, const frontera::Grid1D& g,
                                          double base_lo, double base_hi) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double c0 = base_lo + (base_hi - base_lo) * u(rng);
    const double a1 = 0.5 * u(rng), a2 = 0.25 * u(rng);
    const double p1 = 2.0 * M_PI * u(rng), p2 = 2.0 * M_PI * u(rng);
    std::vector<double> v(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        const double x = g.center(i);
        v[static_cast<std::size_t>(i)] =
            c0 + a1 * std::cos(M_PI * x + p1) + a2 * std::cos(2.0 * M_PI * x + p2);
    }
    return v;
}

}  // namespace testing_support
