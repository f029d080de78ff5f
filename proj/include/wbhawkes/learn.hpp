#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wbhawkes/basis.hpp"
#include "wbhawkes/errors.hpp"
#include "wbhawkes/event_sequence.hpp"
#include "wbhawkes/intensity.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/parallel.hpp"
#include "wbhawkes/rng.hpp"

namespace wbhawkes {

// EM-based penalized maximum-likelihood learning of the Weibull-base Hawkes
// process: closed-form multiplicative updates for mu and the coefficient
// tensor, projected gradient steps for rho, L1 + group-lasso regularization
// and validation-based early stopping.

struct FitConfig {
    double alpha_s = 10.0;   // L1 weight
    double alpha_g = 100.0;  // group-lasso weight
    // Learning rate for rho. When unset, 1e-3 / n_training_sequences: the
    // gradient is an unnormalized sum over sequences, so the step must
    // shrink with the dataset.
    std::optional<double> alpha_rho;
    std::size_t k_rho_steps = 5;  // rho updates per outer iteration
    double inner_tol = 1e-6;      // relative objective change for convergence
    std::size_t max_inner = 100;
    std::size_t max_outer = 200;
    double validation_fraction = 0.2;
    std::size_t patience = 3;
    double rho_floor = 0.05;
    bool freeze_rho = false;       // MLE baseline: rho pinned at 1
    double group_norm_floor = 1e-10;

    void validate() const {
        if (alpha_s < 0.0 || alpha_g < 0.0) throw std::invalid_argument("fit: alphas must be non-negative");
        if (alpha_rho && !(*alpha_rho > 0.0)) throw std::invalid_argument("fit: alpha_rho must be positive");
        if (k_rho_steps < 1) throw std::invalid_argument("fit: k_rho_steps must be >= 1");
        if (!(inner_tol > 0.0)) throw std::invalid_argument("fit: inner_tol must be positive");
        if (max_inner < 1 || max_outer < 1) throw std::invalid_argument("fit: iteration caps must be >= 1");
        if (validation_fraction < 0.0 || validation_fraction >= 1.0)
            throw std::invalid_argument("fit: validation_fraction must lie in [0, 1)");
        if (!(rho_floor > 0.0)) throw std::invalid_argument("fit: rho_floor must be positive");
        if (!(group_norm_floor > 0.0)) throw std::invalid_argument("fit: group_norm_floor must be positive");
    }
};

enum class StopReason { converged, early_stopped, max_iterations };

struct FitReport {
    ModelParams params;
    std::vector<double> objective_trace;   // penalized -logL on training data, per outer iteration
    std::vector<double> validation_trace;  // validation logL, per outer iteration
    StopReason stop_reason = StopReason::max_iterations;
};

inline constexpr double kMuFloor = 1e-12;  // keeps log(lambda) finite for types with no events

// ---------------------------------------------------------------------------
// Prepared data: everything about (dataset, basis) that EM reuses across
// iterations. Neighbor kernels g_m(t_i - t_j) and the compensator sums
// sum_{c_i = c'} G_m(t_end - t_i) depend only on the data, never on the
// parameters, so they are computed exactly once.
// ---------------------------------------------------------------------------

struct PreparedSequence {
    std::vector<std::uint32_t> nbr_offset;  // per event, into nbr_event; size events+1
    std::vector<std::uint32_t> nbr_event;   // history index j of each neighbor
    std::vector<double> nbr_g;              // m_count kernel values per neighbor
};

struct PreparedDataset {
    std::size_t c_count = 0;
    BasisConfig basis;
    std::vector<EventSequence> sequences;  // owned copy; seqs[n] indexes into sequences[n]
    std::vector<PreparedSequence> seqs;
    std::vector<std::pair<double, double>> windows;   // (t_begin, t_end) per sequence
    std::vector<double> g_compensator;                // [c_src * m_count + m]
    std::vector<std::size_t> type_counts;
    std::size_t event_count = 0;
    double window_span_sum = 0.0;

    double base_compensator_sum(std::size_t /*c*/, double rho) const {
        double sum = 0.0;
        for (const auto& [tb, te] : windows) sum += pow0(te, rho) - pow0(tb, rho);
        return sum;
    }
};

inline PreparedDataset prepare_dataset(const std::vector<EventSequence>& dataset, std::size_t c_count,
                                       const BasisConfig& basis, std::size_t threads = 1) {
    basis.validate();
    validate_dataset(dataset, c_count);
    PreparedDataset prep;
    prep.c_count = c_count;
    prep.basis = basis;
    prep.sequences = dataset;
    prep.seqs.resize(dataset.size());
    prep.windows.resize(dataset.size());
    prep.g_compensator.assign(c_count * basis.m_count, 0.0);
    prep.type_counts.assign(c_count, 0);

    const std::size_t m_count = basis.m_count;
    parallel_for(dataset.size(), threads, [&](std::size_t n) {
        const EventSequence& seq = prep.sequences[n];
        PreparedSequence& ps = prep.seqs[n];
        ps.nbr_offset.assign(seq.events.size() + 1, 0);
        std::size_t left = 0;
        for (std::size_t i = 0; i < seq.events.size(); ++i) {
            const double t_i = seq.events[i].time;
            while (left < i && seq.events[left].time < t_i - basis.support) ++left;
            for (std::size_t j = left; j < i; ++j) {
                ps.nbr_event.push_back(static_cast<std::uint32_t>(j));
                const double tau = t_i - seq.events[j].time;
                for (std::size_t m = 0; m < m_count; ++m) ps.nbr_g.push_back(basis_value(m, tau, basis));
            }
            ps.nbr_offset[i + 1] = static_cast<std::uint32_t>(ps.nbr_event.size());
        }
    });

    for (std::size_t n = 0; n < dataset.size(); ++n) {
        const EventSequence& seq = dataset[n];
        prep.windows[n] = {seq.t_begin, seq.t_end};
        prep.window_span_sum += seq.t_end - seq.t_begin;
        prep.event_count += seq.events.size();
        for (const Event& ev : seq.events) {
            ++prep.type_counts[ev.type];
            for (std::size_t m = 0; m < m_count; ++m)
                prep.g_compensator[ev.type * m_count + m] += basis_integral(m, seq.t_end - ev.time, basis);
        }
    }
    return prep;
}

// ---------------------------------------------------------------------------
// E-step.
// ---------------------------------------------------------------------------

// Per-event responsibilities of one sequence: p_ii plus one weight per
// (triggering event, kernel) pair within the basis support. The weights of
// each event sum to one by construction.
struct EventResponsibilities {
    double self = 0.0;  // p_ii
    struct Parent {
        std::uint32_t event;   // history index j
        std::uint32_t kernel;  // m
        double weight;         // p_ijm
    };
    std::vector<Parent> parents;
};

namespace detail {

// Core E-step sweep over one prepared sequence. For each event i the
// visitor receives lambda_i, the self weight and each parent weight; this
// is the single source of truth for the responsibility math.
template <typename SelfFn, typename ParentFn>
void visit_responsibilities(const ModelParams& params, const EventSequence& seq,
                            const PreparedSequence& ps, SelfFn&& on_self, ParentFn&& on_parent) {
    const std::size_t m_count = params.basis.m_count;
    for (std::size_t i = 0; i < seq.events.size(); ++i) {
        const Event& ev = seq.events[i];
        const double base = base_intensity(params.mu[ev.type], params.rho[ev.type], ev.time);
        double lambda = base;
        for (std::uint32_t k = ps.nbr_offset[i]; k < ps.nbr_offset[i + 1]; ++k) {
            const Event& parent = seq.events[ps.nbr_event[k]];
            const auto row = params.coef.group(ev.type, parent.type);
            const double* g = ps.nbr_g.data() + static_cast<std::size_t>(k) * m_count;
            for (std::size_t m = 0; m < m_count; ++m) lambda += row[m] * g[m];
        }
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw NumericalError("responsibilities: non-positive or non-finite intensity");
        on_self(i, base / lambda, lambda);
        for (std::uint32_t k = ps.nbr_offset[i]; k < ps.nbr_offset[i + 1]; ++k) {
            const Event& parent = seq.events[ps.nbr_event[k]];
            const auto row = params.coef.group(ev.type, parent.type);
            const double* g = ps.nbr_g.data() + static_cast<std::size_t>(k) * m_count;
            for (std::size_t m = 0; m < m_count; ++m) {
                if (row[m] != 0.0) on_parent(i, ps.nbr_event[k], m, row[m] * g[m] / lambda);
            }
        }
    }
}

} // namespace detail

// Materialized per-event weights for one sequence (the contract form; the
// fitting loop uses the aggregated form below).
inline std::vector<EventResponsibilities> responsibilities(const ModelParams& params,
                                                           const EventSequence& seq) {
    params.validate();
    auto prep = prepare_dataset({seq}, params.c_count, params.basis);
    std::vector<EventResponsibilities> out(seq.events.size());
    detail::visit_responsibilities(
        params, prep.sequences[0], prep.seqs[0],
        [&](std::size_t i, double p_self, double) { out[i].self = p_self; },
        [&](std::size_t i, std::uint32_t j, std::size_t m, double w) {
            out[i].parents.push_back({j, static_cast<std::uint32_t>(m), w});
        });
    return out;
}

// Sufficient statistics of the E-step over a whole dataset.
struct ResponsibilityAggregates {
    std::vector<double> self_sum;       // per type: sum of p_ii
    std::vector<double> self_logt_sum;  // per type: sum of p_ii * ln(t_i)
    ImpactCoefficients parent_sum;      // (c, c', m): sum of p_ijm
    double log_intensity_sum = 0.0;     // sum_i log lambda_i at the current parameters

    static ResponsibilityAggregates compute(const ModelParams& params, const PreparedDataset& prep,
                                            std::size_t threads = 1) {
        const std::size_t c_count = prep.c_count;
        const std::size_t m_count = prep.basis.m_count;
        std::vector<ResponsibilityAggregates> slots(prep.seqs.size());
        parallel_for(prep.seqs.size(), threads, [&](std::size_t n) {
            ResponsibilityAggregates& agg = slots[n];
            agg.self_sum.assign(c_count, 0.0);
            agg.self_logt_sum.assign(c_count, 0.0);
            agg.parent_sum = ImpactCoefficients(c_count, m_count);
            const EventSequence& seq = prep.sequences[n];
            detail::visit_responsibilities(
                params, seq, prep.seqs[n],
                [&](std::size_t i, double p_self, double lambda) {
                    const Event& ev = seq.events[i];
                    agg.self_sum[ev.type] += p_self;
                    agg.self_logt_sum[ev.type] += p_self * std::log(ev.time);
                    agg.log_intensity_sum += std::log(lambda);
                },
                [&](std::size_t i, std::uint32_t j, std::size_t m, double w) {
                    agg.parent_sum.at(seq.events[i].type, seq.events[j].type, m) += w;
                });
        });

        ResponsibilityAggregates total;
        total.self_sum.assign(c_count, 0.0);
        total.self_logt_sum.assign(c_count, 0.0);
        total.parent_sum = ImpactCoefficients(c_count, m_count);
        for (const auto& agg : slots) {  // sequence order: bit-reproducible for any thread count
            for (std::size_t c = 0; c < c_count; ++c) {
                total.self_sum[c] += agg.self_sum[c];
                total.self_logt_sum[c] += agg.self_logt_sum[c];
            }
            for (std::size_t k = 0; k < total.parent_sum.data.size(); ++k)
                total.parent_sum.data[k] += agg.parent_sum.data[k];
            total.log_intensity_sum += agg.log_intensity_sum;
        }
        return total;
    }
};

// ---------------------------------------------------------------------------
// M-step.
// ---------------------------------------------------------------------------

// mu_c = (sum of type-c self weights) / sum_n (t_end^rho_c - t_begin^rho_c),
// floored so that types with no attributed events keep a positive rate.
inline std::vector<double> update_mu(const ResponsibilityAggregates& aggs, const PreparedDataset& prep,
                                     const std::vector<double>& rho) {
    std::vector<double> mu(prep.c_count);
    for (std::size_t c = 0; c < prep.c_count; ++c) {
        const double denom = prep.base_compensator_sum(c, rho[c]);
        if (!(denom > 0.0)) throw std::invalid_argument("update_mu: degenerate observation windows");
        mu[c] = std::max(aggs.self_sum[c] / denom, kMuFloor);
    }
    return mu;
}

// Closed-form coefficient update. Per (c, c', m):
//   A = alpha_g / max(||a_{cc'}||, group_norm_floor)   (previous iterate's norm)
//   B = sum over source-type-c' events of G_m(t_end - t_i) + alpha_s
//   C = -(sum of p_ijm responsibilities)
// The positive root of A a^2 + B a + C = 0 is evaluated in the
// cancellation-free form -2C / (B + sqrt(B^2 - 4AC)), which also reduces to
// -C / B as A -> 0, the unregularized ratio.
inline ImpactCoefficients update_a(const ResponsibilityAggregates& aggs, const PreparedDataset& prep,
                                   const ImpactCoefficients& coef_prev, const FitConfig& cfg) {
    const std::size_t c_count = prep.c_count;
    const std::size_t m_count = prep.basis.m_count;
    ImpactCoefficients next(c_count, m_count);
    for (std::size_t c = 0; c < c_count; ++c) {
        for (std::size_t cs = 0; cs < c_count; ++cs) {
            const double a_quad = cfg.alpha_g > 0.0
                                      ? cfg.alpha_g / std::max(coef_prev.group_norm(c, cs), cfg.group_norm_floor)
                                      : 0.0;
            for (std::size_t m = 0; m < m_count; ++m) {
                const double b_lin = prep.g_compensator[cs * m_count + m] + cfg.alpha_s;
                const double c_neg = -aggs.parent_sum.at(c, cs, m);  // <= 0
                if (c_neg == 0.0) continue;                          // update is exactly zero
                if (!(b_lin > 0.0))
                    throw std::logic_error("update_a: non-positive linear term with active responsibilities");
                next.at(c, cs, m) = -2.0 * c_neg / (b_lin + std::sqrt(b_lin * b_lin - 4.0 * a_quad * c_neg));
            }
        }
    }
    return next;
}

// ---------------------------------------------------------------------------
// rho updates.
// ---------------------------------------------------------------------------

// dF/drho_c of the EM surrogate (responsibilities frozen):
//   sum_n mu_c (ln t_end t_end^rho - ln t_begin t_begin^rho)
//   - sum over type-c events of p_ii (ln t_i + 1/rho_c),
// with the x ln x -> 0 convention at t_begin = 0.
inline std::vector<double> grad_rho(const ResponsibilityAggregates& aggs, const PreparedDataset& prep,
                                    const std::vector<double>& mu, const std::vector<double>& rho) {
    std::vector<double> grad(prep.c_count);
    for (std::size_t c = 0; c < prep.c_count; ++c) {
        double window_term = 0.0;
        for (const auto& [tb, te] : prep.windows)
            window_term += log_pow0(te, rho[c]) - log_pow0(tb, rho[c]);
        grad[c] = mu[c] * window_term - (aggs.self_logt_sum[c] + aggs.self_sum[c] / rho[c]);
    }
    return grad;
}

// One projected gradient-descent step; identity under freeze_rho.
inline std::vector<double> update_rho(const std::vector<double>& rho, const std::vector<double>& grad,
                                      const FitConfig& cfg, double alpha_rho) {
    if (cfg.freeze_rho) return rho;
    std::vector<double> next(rho.size());
    for (std::size_t c = 0; c < rho.size(); ++c)
        next[c] = std::max(rho[c] - alpha_rho * grad[c], cfg.rho_floor);
    return next;
}

// ---------------------------------------------------------------------------
// Objective bookkeeping.
// ---------------------------------------------------------------------------

inline double penalty_value(const ImpactCoefficients& coef, double alpha_s, double alpha_g) {
    double l1 = 0.0;
    for (double v : coef.data) l1 += std::abs(v);
    double group = 0.0;
    for (std::size_t c = 0; c < coef.c_count; ++c)
        for (std::size_t cs = 0; cs < coef.c_count; ++cs) group += coef.group_norm(c, cs);
    return alpha_s * l1 + alpha_g * group;
}

namespace detail {

inline double compensator_value(const ModelParams& params, const PreparedDataset& prep) {
    double total = 0.0;
    for (std::size_t c = 0; c < prep.c_count; ++c)
        total += params.mu[c] * prep.base_compensator_sum(c, params.rho[c]);
    const std::size_t m_count = prep.basis.m_count;
    for (std::size_t c = 0; c < prep.c_count; ++c)
        for (std::size_t cs = 0; cs < prep.c_count; ++cs)
            for (std::size_t m = 0; m < m_count; ++m)
                total += params.coef.at(c, cs, m) * prep.g_compensator[cs * m_count + m];
    return total;
}

// logL via the prepared neighbor tables; equal (up to rounding) to
// log_likelihood() on the raw sequences.
inline double prepared_log_likelihood(const ModelParams& params, const PreparedDataset& prep,
                                      std::size_t threads = 1) {
    std::vector<double> per_seq(prep.seqs.size(), 0.0);
    parallel_for(prep.seqs.size(), threads, [&](std::size_t n) {
        double log_sum = 0.0;
        detail::visit_responsibilities(
            params, prep.sequences[n], prep.seqs[n],
            [&](std::size_t, double, double lambda) { log_sum += std::log(lambda); },
            [](std::size_t, std::uint32_t, std::size_t, double) {});
        per_seq[n] = log_sum;
    });
    double total = 0.0;
    for (double v : per_seq) total += v;
    return total - compensator_value(params, prep);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Full fitting loop.
// ---------------------------------------------------------------------------

inline ModelParams random_initial_params(const PreparedDataset& prep, std::uint64_t seed) {
    ModelParams params(prep.c_count, prep.basis);
    SplitMix64 rng = rng_stream(seed, 102);
    for (std::size_t c = 0; c < prep.c_count; ++c) {
        const double rate = static_cast<double>(prep.type_counts[c]) / prep.window_span_sum;
        params.mu[c] = std::max(rng.next_uniform(0.5, 1.5) * rate, kMuFloor);
        params.rho[c] = 1.0;
    }
    const double a_cap = 0.1 / static_cast<double>(prep.c_count * prep.basis.m_count);
    for (double& v : params.coef.data) v = rng.next_uniform(0.0, a_cap);
    return params;
}

// Alternating EM: an inner loop of (E-step, mu update, A update) until the
// penalized objective stalls, then k projected gradient steps on rho, until
// the outer objective converges, validation stops improving for `patience`
// outer iterations, or the iteration cap. Returns the parameters with the
// best validation log-likelihood seen.
inline FitReport em_fit(const std::vector<EventSequence>& dataset, std::size_t c_count,
                        const BasisConfig& basis, const FitConfig& cfg, std::uint64_t init_seed,
                        std::size_t threads = 1) {
    cfg.validate();
    if (dataset.empty()) throw std::invalid_argument("em_fit: dataset must be non-empty");

    // Deterministic validation split.
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::size_t n_val = 0;
    if (cfg.validation_fraction > 0.0 && dataset.size() >= 2) {
        SplitMix64 split_rng = rng_stream(init_seed, 101);
        for (std::size_t i = order.size() - 1; i > 0; --i)
            std::swap(order[i], order[split_rng.next_u64() % (i + 1)]);
        n_val = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::llround(cfg.validation_fraction * static_cast<double>(dataset.size()))),
            1, dataset.size() - 1);
    }
    std::vector<EventSequence> train, validation;
    for (std::size_t i = 0; i < order.size() - n_val; ++i) train.push_back(dataset[order[i]]);
    for (std::size_t i = order.size() - n_val; i < order.size(); ++i) validation.push_back(dataset[order[i]]);
    if (validation.empty()) validation = train;  // early stopping then watches the training fit

    const PreparedDataset prep = prepare_dataset(train, c_count, basis, threads);
    const PreparedDataset prep_val = prepare_dataset(validation, c_count, basis, threads);
    const double alpha_rho = cfg.alpha_rho.value_or(1e-3 / static_cast<double>(train.size()));

    ModelParams params = random_initial_params(prep, init_seed);
    if (cfg.freeze_rho) std::fill(params.rho.begin(), params.rho.end(), 1.0);

    FitReport report;
    double best_val = -std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    double prev_outer_objective = std::numeric_limits<double>::infinity();
    report.stop_reason = StopReason::max_iterations;

    for (std::size_t outer = 0; outer < cfg.max_outer; ++outer) {
        // Inner loop: alternate E-step and closed-form (mu, A) updates.
        double prev_inner = std::numeric_limits<double>::infinity();
        for (std::size_t inner = 0; inner < cfg.max_inner; ++inner) {
            const auto aggs = ResponsibilityAggregates::compute(params, prep, threads);
            const double objective = -(aggs.log_intensity_sum - detail::compensator_value(params, prep)) +
                                     penalty_value(params.coef, cfg.alpha_s, cfg.alpha_g);
            if (inner > 0 && std::abs(objective - prev_inner) <= cfg.inner_tol * (1.0 + std::abs(objective)))
                break;
            prev_inner = objective;
            auto mu_next = update_mu(aggs, prep, params.rho);
            auto coef_next = update_a(aggs, prep, params.coef, cfg);
            params.mu = std::move(mu_next);
            params.coef = std::move(coef_next);
        }

        // k projected gradient steps on rho with frozen responsibilities.
        if (!cfg.freeze_rho) {
            const auto aggs = ResponsibilityAggregates::compute(params, prep, threads);
            for (std::size_t step = 0; step < cfg.k_rho_steps; ++step) {
                const auto grad = grad_rho(aggs, prep, params.mu, params.rho);
                params.rho = update_rho(params.rho, grad, cfg, alpha_rho);
            }
        }

        const double train_ll = detail::prepared_log_likelihood(params, prep, threads);
        const double objective = -train_ll + penalty_value(params.coef, cfg.alpha_s, cfg.alpha_g);
        const double val_ll = detail::prepared_log_likelihood(params, prep_val, threads);
        report.objective_trace.push_back(objective);
        report.validation_trace.push_back(val_ll);

        if (val_ll > best_val) {
            best_val = val_ll;
            report.params = params;
            stale = 0;
        } else if (++stale >= std::max<std::size_t>(cfg.patience, 1)) {
            report.stop_reason = StopReason::early_stopped;
            break;
        }
        if (outer > 0 && std::abs(objective - prev_outer_objective) <= cfg.inner_tol * (1.0 + std::abs(objective))) {
            report.stop_reason = StopReason::converged;
            break;
        }
        prev_outer_objective = objective;
    }
    return report;
}

} // namespace wbhawkes
