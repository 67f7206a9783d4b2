#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace frontera {

enum class KernelFamily { UniformAsymmetric, AsymmetricLaplace, ShiftedGaussian, Tabulated };

struct KernelValidationReport {
    double mass_error = 0.0;
    double abs_first_moment = 0.0;
    bool first_moment_finite = true;
    bool exp_moment_finite = true;       // at +rate and -rate jointly
    double pre_normalization_defect = 0.0;
    bool passed = false;
    std::string detail;                  // names the violated hypothesis, empty on pass
};

/// Dispersal-kernel family with exact mass/CDF/moment queries. Kernels are
/// normalized to unit total mass and may be asymmetric; no operation assumes
/// J(z) == J(-z). Immutable after construction.
class KernelSpec {
public:
    static KernelSpec uniform_asymmetric(double lo, double hi) {
        if (!(hi > lo)) throw std::invalid_argument("kernel: uniform support requires hi > lo");
        KernelSpec k(KernelFamily::UniformAsymmetric);
        k.p1_ = lo;
        k.p2_ = hi;
        return k;
    }

    static KernelSpec asymmetric_laplace(double rate_left, double rate_right, double weight_left) {
        if (!(rate_left > 0.0) || !(rate_right > 0.0))
            throw std::invalid_argument("kernel: laplace rates must be positive");
        if (weight_left < 0.0 || weight_left > 1.0)
            throw std::invalid_argument("kernel: weight_left must lie in [0,1]");
        KernelSpec k(KernelFamily::AsymmetricLaplace);
        k.p1_ = rate_left;
        k.p2_ = rate_right;
        k.p3_ = weight_left;
        return k;
    }

    static KernelSpec shifted_gaussian(double mean, double stddev) {
        if (!(stddev > 0.0)) throw std::invalid_argument("kernel: gaussian stddev must be positive");
        KernelSpec k(KernelFamily::ShiftedGaussian);
        k.p1_ = mean;
        k.p2_ = stddev;
        return k;
    }

    /// Samples are (z, density) at uniform spacing; density is renormalized at
    /// construction so the piecewise-linear reconstruction has unit mass. The
    /// pre-normalization defect is kept for the validation report.
    static KernelSpec tabulated(std::vector<std::pair<double, double>> samples, double spacing) {
        if (samples.size() < 2) throw std::invalid_argument("kernel: tabulated needs >= 2 samples");
        if (!(spacing > 0.0)) throw std::invalid_argument("kernel: tabulated spacing must be positive");
        KernelSpec k(KernelFamily::Tabulated);
        k.tab_z0_ = samples.front().first;
        k.tab_dz_ = spacing;
        k.tab_v_.reserve(samples.size());
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const auto& [z, v] = samples[i];
            if (v < 0.0) throw std::invalid_argument("kernel: tabulated density must be >= 0");
            if (std::abs(z - (k.tab_z0_ + static_cast<double>(i) * spacing)) > 1e-9 * (1.0 + std::abs(z)))
                throw std::invalid_argument("kernel: tabulated samples must sit on a uniform z-grid");
            k.tab_v_.push_back(v);
        }
        double mass = 0.0;
        for (std::size_t i = 0; i + 1 < k.tab_v_.size(); ++i)
            mass += 0.5 * (k.tab_v_[i] + k.tab_v_[i + 1]) * spacing;
        if (!(mass > 0.0)) throw std::invalid_argument("kernel: tabulated samples carry no mass");
        k.tab_defect_ = std::abs(1.0 - mass);
        for (double& v : k.tab_v_) v /= mass;
        return k;
    }

    KernelFamily family() const { return family_; }

    /// Pointwise density J(z); tabulated kernels interpolate linearly and are 0
    /// outside the sample range. At a jump the value is the jump midpoint, so
    /// midpoint quadrature stays second order even when cell centers align
    /// with the discontinuity.
    double evaluate(double z) const {
        switch (family_) {
            case KernelFamily::UniformAsymmetric: {
                const double q = 1.0 / (p2_ - p1_);
                const double tol = 1e-12 * (1.0 + std::abs(p1_) + std::abs(p2_));
                if (std::abs(z - p1_) <= tol || std::abs(z - p2_) <= tol) return 0.5 * q;
                return (z > p1_ && z < p2_) ? q : 0.0;
            }
            case KernelFamily::AsymmetricLaplace:
                if (z == 0.0) return 0.5 * (p3_ * p1_ + (1.0 - p3_) * p2_);
                if (z < 0.0) return p3_ * p1_ * std::exp(p1_ * z);
                return (1.0 - p3_) * p2_ * std::exp(-p2_ * z);
            case KernelFamily::ShiftedGaussian: {
                const double u = (z - p1_) / p2_;
                return std::exp(-0.5 * u * u) / (p2_ * std::sqrt(2.0 * M_PI));
            }
            case KernelFamily::Tabulated: {
                const double zend = tab_z0_ + tab_dz_ * static_cast<double>(tab_v_.size() - 1);
                if (z < tab_z0_ || z > zend) return 0.0;
                const double s = (z - tab_z0_) / tab_dz_;
                auto i = static_cast<std::size_t>(std::min(s, static_cast<double>(tab_v_.size() - 2)));
                const double w = s - static_cast<double>(i);
                return tab_v_[i] * (1.0 - w) + tab_v_[i + 1] * w;
            }
        }
        return 0.0;
    }

    /// CDF(z) = mass over (-inf, z]. Analytic for closed-form families so the
    /// boundary-flux tails keep full precision.
    double cdf(double z) const {
        if (std::isinf(z)) return z > 0.0 ? 1.0 : 0.0;
        switch (family_) {
            case KernelFamily::UniformAsymmetric:
                return std::clamp((z - p1_) / (p2_ - p1_), 0.0, 1.0);
            case KernelFamily::AsymmetricLaplace:
                if (z < 0.0) return p3_ * std::exp(p1_ * z);
                return p3_ + (1.0 - p3_) * (1.0 - std::exp(-p2_ * z));
            case KernelFamily::ShiftedGaussian:
                return 0.5 * std::erfc(-(z - p1_) / (p2_ * std::sqrt(2.0)));
            case KernelFamily::Tabulated:
                return tab_mass_below(z);
        }
        return 0.0;
    }

    /// Mass over [lo, hi]; +/-inf endpoints allowed.
    double interval_mass(double lo, double hi) const {
        if (!(lo <= hi)) throw std::invalid_argument("kernel: interval_mass requires lo <= hi");
        return std::clamp(cdf(hi) - cdf(lo), 0.0, 1.0);
    }

    /// C_J = int |z| J(z) dz, finite for every family by construction.
    double abs_first_moment() const {
        switch (family_) {
            case KernelFamily::UniformAsymmetric: {
                const double q = 1.0 / (p2_ - p1_);
                return q * 0.5 * (p2_ * std::abs(p2_) - p1_ * std::abs(p1_));
            }
            case KernelFamily::AsymmetricLaplace:
                return p3_ / p1_ + (1.0 - p3_) / p2_;
            case KernelFamily::ShiftedGaussian: {
                const double m = p1_, s = p2_;
                return s * std::sqrt(2.0 / M_PI) * std::exp(-0.5 * m * m / (s * s)) +
                       m * std::erf(m / (s * std::sqrt(2.0)));
            }
            case KernelFamily::Tabulated:
                return tab_abs_moment();
        }
        return 0.0;
    }

    /// True when int e^{rate z} J(z) dz < +inf. Compactly supported families and
    /// the Gaussian admit every rate; the Laplace tails bound the admissible band.
    bool exp_moment_finite(double rate) const {
        switch (family_) {
            case KernelFamily::UniformAsymmetric:
            case KernelFamily::ShiftedGaussian:
            case KernelFamily::Tabulated:
                return true;
            case KernelFamily::AsymmetricLaplace:
                return rate < p2_ && rate > -p1_;
        }
        return true;
    }

    /// (J1)/(J2) check at the given exponential rate. A failed report is an
    /// outcome, not a fault.
    KernelValidationReport validate(double exp_rate) const {
        if (!(exp_rate > 0.0)) throw std::invalid_argument("kernel: validation rate must be positive");
        KernelValidationReport r;
        r.mass_error = std::abs(1.0 - interval_mass(-std::numeric_limits<double>::infinity(),
                                                    std::numeric_limits<double>::infinity()));
        r.abs_first_moment = abs_first_moment();
        r.first_moment_finite = std::isfinite(r.abs_first_moment);
        r.exp_moment_finite = exp_moment_finite(exp_rate) && exp_moment_finite(-exp_rate);
        r.pre_normalization_defect = tab_defect_;
        r.passed = r.mass_error <= 1e-10 && r.first_moment_finite && r.exp_moment_finite;
        if (r.mass_error > 1e-10) r.detail = "(J1) total mass differs from 1";
        else if (!r.first_moment_finite) r.detail = "(J1) first absolute moment not finite";
        else if (!r.exp_moment_finite) r.detail = "(J2) exponential moment diverges at requested rate";
        return r;
    }

    double pre_normalization_defect() const { return tab_defect_; }

    std::string describe() const {
        char buf[128];
        switch (family_) {
            case KernelFamily::UniformAsymmetric:
                std::snprintf(buf, sizeof buf, "uniform_asymmetric(%g,%g)", p1_, p2_);
                return buf;
            case KernelFamily::AsymmetricLaplace:
                std::snprintf(buf, sizeof buf, "asymmetric_laplace(%g,%g,%g)", p1_, p2_, p3_);
                return buf;
            case KernelFamily::ShiftedGaussian:
                std::snprintf(buf, sizeof buf, "shifted_gaussian(%g,%g)", p1_, p2_);
                return buf;
            case KernelFamily::Tabulated:
                std::snprintf(buf, sizeof buf, "tabulated(%zu,%g,%g)", tab_v_.size(), tab_z0_, tab_dz_);
                return buf;
        }
        return "kernel";
    }

private:
    explicit KernelSpec(KernelFamily f) : family_(f) {}

    // Exact integral of the piecewise-linear interpolant over (-inf, z_hi].
    double tab_mass_below(double z_hi) const {
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < tab_v_.size(); ++i) {
            const double zl = tab_z0_ + tab_dz_ * static_cast<double>(i);
            const double b = std::min(z_hi, zl + tab_dz_);
            if (b <= zl) break;
            const double slope = (tab_v_[i + 1] - tab_v_[i]) / tab_dz_;
            const double c0 = tab_v_[i] - slope * zl;
            acc += c0 * (b - zl) + slope * 0.5 * (b * b - zl * zl);
        }
        return acc;
    }

    // Exact int |z| * interpolant dz, cells straddling 0 split at 0.
    double tab_abs_moment() const {
        auto piece = [](double a, double b, double c0, double slope) {
            // int_a^b z (c0 + slope z) dz on a sign-definite [a,b]
            const double m1 = 0.5 * (b * b - a * a);
            const double m2 = (b * b * b - a * a * a) / 3.0;
            const double val = c0 * m1 + slope * m2;
            return (a >= 0.0) ? val : -val;
        };
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < tab_v_.size(); ++i) {
            const double zl = tab_z0_ + tab_dz_ * static_cast<double>(i);
            const double zr = zl + tab_dz_;
            const double slope = (tab_v_[i + 1] - tab_v_[i]) / tab_dz_;
            const double c0 = tab_v_[i] - slope * zl;
            if (zl >= 0.0 || zr <= 0.0)
                acc += piece(zl, zr, c0, slope);
            else
                acc += piece(zl, 0.0, c0, slope) + piece(0.0, zr, c0, slope);
        }
        return acc;
    }

    KernelFamily family_;
    double p1_ = 0.0, p2_ = 0.0, p3_ = 0.0;
    std::vector<double> tab_v_;
    double tab_z0_ = 0.0, tab_dz_ = 0.0;
    double tab_defect_ = 0.0;
};

}  // namespace frontera
