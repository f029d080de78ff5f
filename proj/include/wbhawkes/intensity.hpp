#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wbhawkes/errors.hpp"
#include "wbhawkes/event_sequence.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/parallel.hpp"

namespace wbhawkes {

// Weibull hazard h(t) = mu rho t^(rho - 1). Singular at t = 0 for rho < 1,
// so t must be strictly positive.
inline double base_intensity(double mu, double rho, double t) {
    if (!(t > 0.0)) throw std::domain_error("base_intensity: t must be positive");
    return mu * rho * std::pow(t, rho - 1.0);
}

// x^rho with the 0^rho := 0 convention.
inline double pow0(double x, double rho) { return x > 0.0 ? std::pow(x, rho) : 0.0; }

// ln(x) * x^rho with the x -> 0+ limit hard-coded to 0.
inline double log_pow0(double x, double rho) { return x > 0.0 ? std::log(x) * std::pow(x, rho) : 0.0; }

// int_{t0}^{t1} h(s) ds = mu (t1^rho - t0^rho).
inline double base_integral(double mu, double rho, double t0, double t1) {
    return mu * (pow0(t1, rho) - pow0(t0, rho));
}

// Weibull density mu rho t^(rho-1) exp(-mu t^rho).
inline double weibull_event_density(double mu, double rho, double t) {
    if (!(t > 0.0)) throw std::domain_error("weibull_event_density: t must be positive");
    return mu * rho * std::pow(t, rho - 1.0) * std::exp(-mu * std::pow(t, rho));
}

// Weibull survival function S(t) = exp(-mu t^rho).
inline double weibull_survival(double mu, double rho, double t) {
    return std::exp(-mu * pow0(t, rho));
}

// lambda_c(t) given the events of seq strictly before t. Events older than
// the basis support contribute exactly zero and are skipped via a binary
// search for the left edge of the active history.
inline double conditional_intensity(const ModelParams& params, const EventSequence& seq,
                                    std::size_t c, double t) {
    if (!(t > 0.0)) throw std::domain_error("conditional_intensity: t must be positive");
    double lambda = base_intensity(params.mu[c], params.rho[c], t);
    const double oldest = t - params.basis.support;
    auto first = std::lower_bound(seq.events.begin(), seq.events.end(), oldest,
                                  [](const Event& e, double v) { return e.time < v; });
    for (auto it = first; it != seq.events.end() && it->time < t; ++it)
        lambda += impact_value(params.coef, c, it->type, t - it->time, params.basis);
    return lambda;
}

namespace detail {

// Log-likelihood of one sequence, Eq.-(9)-style:
//   sum_i log lambda_{c_i}(t_i)
//   - sum_c mu_c (t_end^rho_c - t_begin^rho_c)
//   - sum_c sum_i sum_m a_{c c_i m} G_m(t_end - t_i)
// The compensator is evaluated in closed form; quadrature exists only as a
// test oracle.
inline double sequence_log_likelihood(const ModelParams& params, const EventSequence& seq) {
    const std::size_t c_count = params.c_count;
    double log_term = 0.0;
    std::size_t left = 0;  // sliding cursor: first event within the support window
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
        const Event& ev = seq.events[i];
        double lambda = base_intensity(params.mu[ev.type], params.rho[ev.type], ev.time);
        while (left < i && seq.events[left].time < ev.time - params.basis.support) ++left;
        for (std::size_t j = left; j < i; ++j)
            lambda += impact_value(params.coef, ev.type, seq.events[j].type,
                                   ev.time - seq.events[j].time, params.basis);
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw NumericalError("log_likelihood: non-positive or non-finite intensity");
        log_term += std::log(lambda);
    }

    double compensator = 0.0;
    for (std::size_t c = 0; c < c_count; ++c)
        compensator += base_integral(params.mu[c], params.rho[c], seq.t_begin, seq.t_end);
    for (const Event& ev : seq.events) {
        for (std::size_t m = 0; m < params.basis.m_count; ++m) {
            const double g_int = basis_integral(m, seq.t_end - ev.time, params.basis);
            if (g_int == 0.0) continue;
            for (std::size_t c = 0; c < c_count; ++c)
                compensator += params.coef.at(c, ev.type, m) * g_int;
        }
    }
    const double value = log_term - compensator;
    if (!std::isfinite(value)) throw NumericalError("log_likelihood: non-finite result");
    return value;
}

} // namespace detail

// Total log-likelihood of a dataset. Per-sequence terms are computed in
// parallel into slots and reduced in sequence order, so the result is
// bit-identical for any thread count.
inline double log_likelihood(const ModelParams& params, const std::vector<EventSequence>& dataset,
                             std::size_t threads = 1) {
    std::vector<double> per_seq(dataset.size(), 0.0);
    parallel_for(dataset.size(), threads,
                 [&](std::size_t n) { per_seq[n] = detail::sequence_log_likelihood(params, dataset[n]); });
    double total = 0.0;
    for (double v : per_seq) total += v;
    return total;
}

} // namespace wbhawkes
