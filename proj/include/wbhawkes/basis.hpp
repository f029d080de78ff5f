#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace wbhawkes {

// Gaussian kernel basis used to represent impact functions
//   phi_{cc'}(t) = sum_m a_{cc'm} * g_m(t).
//
// Kernels are unnormalized, g_m(t) = exp(-(t - center_m)^2 / (2 sigma^2)),
// so coefficients read as peak heights. Both g_m and phi are treated as
// exactly zero beyond the support length, which bounds history scans and
// keeps total excitation finite.
struct BasisConfig {
    std::size_t m_count = 0;
    std::vector<double> centers;   // strictly increasing, inside [0, support]
    double bandwidth = 0.0;        // sigma
    double support = 0.0;          // T_phi

    // Evenly spaced centers over [0, support]; bandwidth defaults to half
    // the center spacing when not given.
    static BasisConfig evenly_spaced(std::size_t m_count, double support, double bandwidth = 0.0) {
        if (m_count < 1) throw std::invalid_argument("basis: m_count must be >= 1");
        if (!(support > 0.0)) throw std::invalid_argument("basis: support must be positive");
        BasisConfig cfg;
        cfg.m_count = m_count;
        cfg.support = support;
        cfg.centers.resize(m_count);
        for (std::size_t m = 0; m < m_count; ++m)
            cfg.centers[m] = m_count == 1 ? 0.0
                                          : static_cast<double>(m) * support / static_cast<double>(m_count - 1);
        cfg.bandwidth = bandwidth > 0.0
                            ? bandwidth
                            : (m_count == 1 ? support / 2.0 : support / (2.0 * static_cast<double>(m_count - 1)));
        return cfg;
    }

    // Basis used throughout the synthetic experiments.
    static BasisConfig default_synthetic() { return evenly_spaced(7, 5.0); }

    void validate() const {
        if (m_count < 1) throw std::invalid_argument("basis: m_count must be >= 1");
        if (!(bandwidth > 0.0)) throw std::invalid_argument("basis: bandwidth must be positive");
        if (!(support > 0.0)) throw std::invalid_argument("basis: support must be positive");
        if (centers.size() != m_count) throw std::invalid_argument("basis: centers size mismatch");
        for (std::size_t m = 0; m < m_count; ++m) {
            if (centers[m] < 0.0 || centers[m] > support)
                throw std::invalid_argument("basis: center outside [0, support]");
            if (m > 0 && !(centers[m] > centers[m - 1]))
                throw std::invalid_argument("basis: centers must be strictly increasing");
        }
    }
};

// g_m(t); zero outside [0, support].
inline double basis_value(std::size_t m, double t, const BasisConfig& cfg) {
    if (m >= cfg.m_count) throw std::out_of_range("basis_value: kernel index out of range");
    if (t < 0.0 || t > cfg.support) return 0.0;
    const double z = (t - cfg.centers[m]) / cfg.bandwidth;
    return std::exp(-0.5 * z * z);
}

// G_m(t) = int_0^t g_m(s) ds in closed form; saturates at t = support.
inline double basis_integral(std::size_t m, double t, const BasisConfig& cfg) {
    if (m >= cfg.m_count) throw std::out_of_range("basis_integral: kernel index out of range");
    if (t <= 0.0) return 0.0;
    const double upper = std::min(t, cfg.support);
    const double s = cfg.bandwidth;
    const double c = cfg.centers[m];
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    const double scale = s * std::sqrt(std::numbers::pi / 2.0);
    return scale * (std::erf((upper - c) / s * inv_sqrt2) + std::erf(c / s * inv_sqrt2));
}

// Coefficient tensor a indexed by (target type c, source type c', kernel m).
// All entries are non-negative; that keeps every impact function, and with
// it the conditional intensity, non-negative.
struct ImpactCoefficients {
    std::size_t c_count = 0;
    std::size_t m_count = 0;
    std::vector<double> data;  // layout: (c * c_count + c') * m_count + m

    ImpactCoefficients() = default;
    ImpactCoefficients(std::size_t c_count_, std::size_t m_count_)
        : c_count(c_count_), m_count(m_count_), data(c_count_ * c_count_ * m_count_, 0.0) {}

    double& at(std::size_t c, std::size_t c_src, std::size_t m) {
        return data[(c * c_count + c_src) * m_count + m];
    }
    double at(std::size_t c, std::size_t c_src, std::size_t m) const {
        return data[(c * c_count + c_src) * m_count + m];
    }

    std::span<double> group(std::size_t c, std::size_t c_src) {
        return {data.data() + (c * c_count + c_src) * m_count, m_count};
    }
    std::span<const double> group(std::size_t c, std::size_t c_src) const {
        return {data.data() + (c * c_count + c_src) * m_count, m_count};
    }

    double group_norm(std::size_t c, std::size_t c_src) const {
        double sq = 0.0;
        for (double v : group(c, c_src)) sq += v * v;
        return std::sqrt(sq);
    }

    void validate() const {
        if (data.size() != c_count * c_count * m_count)
            throw std::invalid_argument("coefficients: tensor size mismatch");
        for (double v : data)
            if (!(v >= 0.0)) throw std::invalid_argument("coefficients: entries must be non-negative");
    }
};

// phi_{cc'}(t) = sum_m a_{cc'm} g_m(t).
inline double impact_value(const ImpactCoefficients& coef, std::size_t c, std::size_t c_src,
                           double t, const BasisConfig& cfg) {
    if (t < 0.0 || t > cfg.support) return 0.0;
    double sum = 0.0;
    const auto row = coef.group(c, c_src);
    for (std::size_t m = 0; m < cfg.m_count; ++m) {
        if (row[m] != 0.0) sum += row[m] * basis_value(m, t, cfg);
    }
    return sum;
}

// int_0^T phi_{cc'}(s) ds; equals the infectivity entry once T >= support.
inline double impact_integral(const ImpactCoefficients& coef, std::size_t c, std::size_t c_src,
                              double horizon, const BasisConfig& cfg) {
    double sum = 0.0;
    const auto row = coef.group(c, c_src);
    for (std::size_t m = 0; m < cfg.m_count; ++m) {
        if (row[m] != 0.0) sum += row[m] * basis_integral(m, horizon, cfg);
    }
    return sum;
}

} // namespace wbhawkes
