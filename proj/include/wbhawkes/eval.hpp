#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wbhawkes/intensity.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/simulate.hpp"

namespace wbhawkes {

// The measure criteria comparing a fitted model against ground truth and
// held-out data. Truth-dependent entries stay empty when no ground truth is
// available (real-data runs).
struct MetricsReport {
    std::optional<double> loglike_test;
    std::optional<double> e_mu;
    std::optional<double> e_rho;
    std::optional<double> e_h;
    std::optional<double> e_phi;
    std::optional<double> granger_accuracy;
};

// L2 relative error ||est - truth|| / ||truth||.
inline double rel_err_vector(const std::vector<double>& estimate, const std::vector<double>& truth) {
    if (estimate.size() != truth.size()) throw std::invalid_argument("rel_err_vector: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = estimate[i] - truth[i];
        num += d * d;
        den += truth[i] * truth[i];
    }
    if (!(den > 0.0)) throw std::invalid_argument("rel_err_vector: truth vector has zero norm");
    return std::sqrt(num) / std::sqrt(den);
}

// Mean over types of int |h_est - h_true| / int h_true on the window.
// The numerator is a trapezoid sum (the base intensities have no joint
// closed form); the denominator is exact. A window starting at 0 would put
// a grid node on the rho < 1 singularity, so that node is nudged inward.
inline double rel_err_base(const std::vector<double>& mu_est, const std::vector<double>& rho_est,
                           const std::vector<double>& mu_true, const std::vector<double>& rho_true,
                           double t_begin, double t_end, std::size_t steps = 10000) {
    if (!(t_end > t_begin) || t_begin < 0.0) throw std::invalid_argument("rel_err_base: bad window");
    const std::size_t c_count = mu_true.size();
    const double h = (t_end - t_begin) / static_cast<double>(steps);
    double total = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
        auto deviation = [&](double t) {
            return std::abs(base_intensity(mu_est[c], rho_est[c], t) -
                            base_intensity(mu_true[c], rho_true[c], t));
        };
        const double t0 = t_begin > 0.0 ? t_begin : h * 1e-6;
        double num = 0.5 * (deviation(t0) + deviation(t_end));
        for (std::size_t k = 1; k < steps; ++k) num += deviation(t_begin + static_cast<double>(k) * h);
        num *= h;
        const double den = base_integral(mu_true[c], rho_true[c], t_begin, t_end);
        total += num / den;
    }
    return total / static_cast<double>(c_count);
}

// Summed absolute deviation between fitted and true impact functions over
// [0, horizon], all C^2 pairs, trapezoid quadrature.
inline double abs_err_impact(const ModelParams& params, const GroundTruth& truth, double horizon,
                             std::size_t steps = 10000) {
    if (!(horizon > 0.0)) throw std::invalid_argument("abs_err_impact: horizon must be positive");
    const double h = horizon / static_cast<double>(steps);
    double total = 0.0;
    for (std::size_t c = 0; c < truth.c_count; ++c) {
        for (std::size_t cs = 0; cs < truth.c_count; ++cs) {
            auto deviation = [&](double t) {
                return std::abs(impact_value(params.coef, c, cs, t, params.basis) -
                                true_impact_value(truth, c, cs, t));
            };
            double sum = 0.5 * (deviation(0.0) + deviation(horizon));
            for (std::size_t k = 1; k < steps; ++k) sum += deviation(static_cast<double>(k) * h);
            total += sum * h;
        }
    }
    return total;
}

// Fraction of (c, c') pairs whose predicted zero/nonzero status matches the
// truth. A pair is predicted nonzero when its coefficient group norm
// exceeds zero_threshold times the largest group norm.
inline double granger_accuracy(const ModelParams& params, const GroundTruth& truth,
                               double zero_threshold = 1e-2) {
    if (!(zero_threshold > 0.0)) throw std::invalid_argument("granger_accuracy: threshold must be positive");
    const std::size_t c_count = truth.c_count;
    double max_norm = 0.0;
    for (std::size_t c = 0; c < c_count; ++c)
        for (std::size_t cs = 0; cs < c_count; ++cs)
            max_norm = std::max(max_norm, params.coef.group_norm(c, cs));
    std::size_t correct = 0;
    for (std::size_t c = 0; c < c_count; ++c) {
        for (std::size_t cs = 0; cs < c_count; ++cs) {
            const bool predicted = params.coef.group_norm(c, cs) > zero_threshold * max_norm;
            const bool actual = truth.pair(c, cs).kind != ImpactKind::zero;
            if (predicted == actual) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(c_count * c_count);
}

} // namespace wbhawkes
