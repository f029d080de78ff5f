#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wbhawkes/errors.hpp"
#include "wbhawkes/event_sequence.hpp"
#include "wbhawkes/intensity.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/rng.hpp"

namespace wbhawkes {

// ---------------------------------------------------------------------------
// Ground truth for synthetic experiments: exact functional impact kernels.
// ---------------------------------------------------------------------------

enum class ImpactKind { zero, sine, square };

struct TruthImpact {
    ImpactKind kind = ImpactKind::zero;
    double amplitude = 0.0;  // A
    double omega = 0.0;      // angular frequency
    double phase = 0.0;      // phase offset
};

struct GroundTruth {
    std::size_t c_count = 0;
    std::vector<double> mu;
    std::vector<double> rho;
    std::vector<TruthImpact> pairs;  // (target c, source c') at c * c_count + c'

    // The square wave switches on where the sine reaches this fraction of
    // its 2A peak. At 0.5 (the sine's mean level) the square integrates to
    // exactly the sine's integral.
    double square_threshold_frac = 0.5;

    const TruthImpact& pair(std::size_t c, std::size_t c_src) const {
        return pairs[c * c_count + c_src];
    }
    TruthImpact& pair(std::size_t c, std::size_t c_src) { return pairs[c * c_count + c_src]; }

    double pair_support(std::size_t c, std::size_t c_src) const {
        const TruthImpact& p = pair(c, c_src);
        if (p.kind == ImpactKind::zero || p.omega <= 0.0) return 0.0;
        return (2.0 * std::numbers::pi - p.phase) / p.omega;
    }

    double max_support() const {
        double s = 0.0;
        for (std::size_t c = 0; c < c_count; ++c)
            for (std::size_t cs = 0; cs < c_count; ++cs) s = std::max(s, pair_support(c, cs));
        return s;
    }
};

// Exact ground-truth phi_{cc'}(t). The square kind is the sine truncated to
// a two-level wave: it sits at the sine's 2A peak wherever the sine is at or
// above the switch threshold and at 0 elsewhere, sharing the sine's support.
inline double true_impact_value(const GroundTruth& truth, std::size_t c, std::size_t c_src, double t) {
    const TruthImpact& p = truth.pair(c, c_src);
    if (p.kind == ImpactKind::zero) return 0.0;
    if (t < 0.0 || t > truth.pair_support(c, c_src)) return 0.0;
    const double sine = p.amplitude * (1.0 - std::cos(p.omega * t + p.phase));
    if (p.kind == ImpactKind::sine) return sine;
    const double peak = 2.0 * p.amplitude;
    return sine >= truth.square_threshold_frac * peak ? peak : 0.0;
}

// ---------------------------------------------------------------------------
// Intensity-model concept: anything exposing a Weibull base and an impact
// kernel of bounded support can be simulated.
// ---------------------------------------------------------------------------

template <typename M>
concept IntensityModel = requires(const M& m, std::size_t c, double t) {
    { m.c_count() } -> std::convertible_to<std::size_t>;
    { m.mu(c) } -> std::convertible_to<double>;
    { m.rho(c) } -> std::convertible_to<double>;
    { m.impact(c, c, t) } -> std::convertible_to<double>;
    { m.impact_support() } -> std::convertible_to<double>;
};

struct ModelIntensity {
    const ModelParams* params;

    std::size_t c_count() const { return params->c_count; }
    double mu(std::size_t c) const { return params->mu[c]; }
    double rho(std::size_t c) const { return params->rho[c]; }
    double impact(std::size_t c, std::size_t c_src, double dt) const {
        return impact_value(params->coef, c, c_src, dt, params->basis);
    }
    double impact_support() const { return params->basis.support; }
};

struct TruthIntensity {
    const GroundTruth* truth;

    std::size_t c_count() const { return truth->c_count; }
    double mu(std::size_t c) const { return truth->mu[c]; }
    double rho(std::size_t c) const { return truth->rho[c]; }
    double impact(std::size_t c, std::size_t c_src, double dt) const {
        return true_impact_value(*truth, c, c_src, dt);
    }
    double impact_support() const { return truth->max_support(); }
};

// ---------------------------------------------------------------------------
// Thinning simulation.
// ---------------------------------------------------------------------------

struct SimConfig {
    double horizon = 50.0;        // T
    std::uint64_t seed = 0;
    double epsilon = 1e-6;        // start time; the base intensity may be singular at 0
    std::size_t bound_grid = 64;  // sampling points for the excitation bound
    double bound_margin = 1.05;   // safety factor on the sampled supremum
};

struct ThinningStats {
    std::uint64_t candidates = 0;
    std::uint64_t accepted = 0;
    std::uint64_t bound_refreshes = 0;
    std::uint64_t bound_violations = 0;  // candidates whose intensity exceeded the audited bound
};

namespace detail {

template <IntensityModel M>
double total_excitation(const M& model, const std::vector<Event>& history, double t, double support) {
    if (history.empty()) return 0.0;
    double sum = 0.0;
    const double oldest = t - support;
    auto first = std::lower_bound(history.begin(), history.end(), oldest,
                                  [](const Event& e, double v) { return e.time < v; });
    const std::size_t types = model.c_count();
    for (auto it = first; it != history.end() && it->time < t; ++it)
        for (std::size_t c = 0; c < types; ++c) sum += model.impact(c, it->type, t - it->time);
    return sum;
}

// Upper bound on the total intensity over [a, b] given the history so far.
// The Weibull base is monotone per type, so its supremum sits at a window
// endpoint and is computed analytically; the excitation (which can rise
// after an event under sine-like kernels) is sampled on a grid.
template <IntensityModel M>
double intensity_bound(const M& model, const std::vector<Event>& history, double a, double b,
                       const SimConfig& cfg, double support) {
    double base_sup = 0.0;
    for (std::size_t c = 0; c < model.c_count(); ++c)
        base_sup += std::max(base_intensity(model.mu(c), model.rho(c), a),
                             base_intensity(model.mu(c), model.rho(c), b));
    double excitation_sup = 0.0;
    if (!history.empty()) {
        const std::size_t grid = std::max<std::size_t>(cfg.bound_grid, 2);
        for (std::size_t k = 0; k < grid; ++k) {
            const double s = a + (b - a) * static_cast<double>(k) / static_cast<double>(grid - 1);
            excitation_sup = std::max(excitation_sup, total_excitation(model, history, s, support));
        }
    }
    return (base_sup + excitation_sup) * cfg.bound_margin;
}

} // namespace detail

// Ogata-style thinning on the window [epsilon, T]. The intensity bound is
// refreshed whenever an event is accepted or the lookahead window is
// exhausted. Candidates with total intensity below M*U are rejected: the
// clock still advances but no event is recorded. Deterministic given the
// seed.
template <IntensityModel M>
EventSequence thinning_simulate(const M& model, const SimConfig& cfg, ThinningStats* stats = nullptr) {
    if (!(cfg.horizon > cfg.epsilon)) throw std::invalid_argument("simulate: horizon must exceed epsilon");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("simulate: epsilon must be positive");
    if (!(cfg.bound_margin >= 1.0)) throw std::invalid_argument("simulate: bound_margin must be >= 1");

    EventSequence seq;
    seq.t_begin = cfg.epsilon;
    seq.t_end = cfg.horizon;

    SplitMix64 rng = rng_stream(cfg.seed, 0);
    const double support = model.impact_support();
    const std::size_t types = model.c_count();

    double t = cfg.epsilon;
    std::vector<double> lambda(types);
    while (t < cfg.horizon) {
        const double lookahead = support > 0.0 ? support : cfg.horizon - t;
        const double window_end = std::min(t + lookahead, cfg.horizon);
        const double bound = detail::intensity_bound(model, seq.events, t, window_end, cfg, support);
        if (stats) ++stats->bound_refreshes;
        if (!(bound > 0.0)) break;  // all-zero model: nothing can ever fire

        bool window_live = true;
        while (window_live && t < cfg.horizon) {
            const double gap = rng.next_exponential(bound);
            if (t + gap > window_end) {
                t = window_end;
                break;  // bound expired before a candidate landed
            }
            const double u = rng.next_unit();
            const double candidate = t + gap;
            for (std::size_t c = 0; c < types; ++c)
                lambda[c] = base_intensity(model.mu(c), model.rho(c), candidate);
            for (auto it = seq.events.rbegin(); it != seq.events.rend(); ++it) {
                if (candidate - it->time > support) break;
                for (std::size_t c = 0; c < types; ++c)
                    lambda[c] += model.impact(c, it->type, candidate - it->time);
            }
            double total = 0.0;
            for (double v : lambda) total += v;
            if (!std::isfinite(total)) throw NumericalError("simulate: non-finite intensity");
            if (stats) {
                ++stats->candidates;
                if (total > bound * cfg.bound_margin) ++stats->bound_violations;
            }
            t = candidate;
            const double threshold = bound * u;
            if (total >= threshold) {
                double cumulative = 0.0;
                std::size_t chosen = types - 1;
                for (std::size_t c = 0; c < types; ++c) {
                    cumulative += lambda[c];
                    if (cumulative >= threshold) {
                        chosen = c;
                        break;
                    }
                }
                seq.events.push_back({candidate, chosen});
                if (stats) ++stats->accepted;
                window_live = false;  // history changed; bound must be refreshed
            }
        }
    }
    return seq;
}

inline EventSequence thinning_simulate(const ModelParams& params, const SimConfig& cfg,
                                       ThinningStats* stats = nullptr) {
    return thinning_simulate(ModelIntensity{&params}, cfg, stats);
}

inline EventSequence thinning_simulate(const GroundTruth& truth, const SimConfig& cfg,
                                       ThinningStats* stats = nullptr) {
    return thinning_simulate(TruthIntensity{&truth}, cfg, stats);
}

// ---------------------------------------------------------------------------
// Synthetic-data protocol: 5 types, block-structured sine or square kernels,
// Weibull parameters drawn once from the seed.
// ---------------------------------------------------------------------------

enum class SynthKind { sine, square };

struct SynthResult {
    std::vector<EventSequence> dataset;
    GroundTruth truth;
};

// Block structure (0-based types):
//   {0,1,2} x {0,1,2}: A = 0.05, omega = 0.6 pi, phase = 0
//   {3,4}   x {3,4}  : A = 0.05, omega = 0.4 pi, phase = pi
//   4 <-> {0,1,2}    : zero
//   3 <-> {0,1,2}    : A = 0.02, omega = 0.2 pi, phase = pi
inline GroundTruth synth_ground_truth(SynthKind kind, std::uint64_t seed, bool constant_base = false) {
    constexpr std::size_t c_count = 5;
    GroundTruth truth;
    truth.c_count = c_count;
    truth.mu.resize(c_count);
    truth.rho.resize(c_count);
    truth.pairs.resize(c_count * c_count);

    SplitMix64 param_rng = rng_stream(seed, 1);
    for (std::size_t c = 0; c < c_count; ++c) truth.mu[c] = param_rng.next_uniform(0.0, 0.2);
    for (std::size_t c = 0; c < c_count; ++c) truth.rho[c] = param_rng.next_uniform(0.5, 1.5);
    if (constant_base) std::fill(truth.rho.begin(), truth.rho.end(), 1.0);

    const ImpactKind nonzero = kind == SynthKind::sine ? ImpactKind::sine : ImpactKind::square;
    const auto low = [](std::size_t c) { return c <= 2; };
    for (std::size_t c = 0; c < c_count; ++c) {
        for (std::size_t cs = 0; cs < c_count; ++cs) {
            TruthImpact& p = truth.pair(c, cs);
            if (low(c) && low(cs)) {
                p = {nonzero, 0.05, 0.6 * std::numbers::pi, 0.0};
            } else if (c >= 3 && cs >= 3) {
                p = {nonzero, 0.05, 0.4 * std::numbers::pi, std::numbers::pi};
            } else if (c == 4 || cs == 4) {
                p = {ImpactKind::zero, 0.0, 0.0, 0.0};
            } else {  // 3 <-> {0,1,2} in either direction
                p = {nonzero, 0.02, 0.2 * std::numbers::pi, std::numbers::pi};
            }
        }
    }
    return truth;
}

inline SynthResult synth_protocol(SynthKind kind, std::size_t n_sequences, double horizon,
                                  std::uint64_t seed, bool constant_base = false) {
    if (n_sequences < 1) throw std::invalid_argument("synth: n_sequences must be >= 1");
    SynthResult result;
    result.truth = synth_ground_truth(kind, seed, constant_base);
    result.dataset.resize(n_sequences);
    for (std::size_t n = 0; n < n_sequences; ++n) {
        SimConfig cfg;
        cfg.horizon = horizon;
        cfg.seed = derive_seed(seed, 2 + n);  // stream 1 is the parameter draw
        result.dataset[n] = thinning_simulate(result.truth, cfg);
    }
    return result;
}

} // namespace wbhawkes
