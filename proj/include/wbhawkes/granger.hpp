#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wbhawkes/model.hpp"

namespace wbhawkes {

// Granger-causality readout of a fitted model: the infectivity matrix of
// integrated impacts, its thresholded edge set, and a per-edge trigger
// pattern taxonomy (delay / stable / unstable).

// matrix[c][c'] = int_0^inf phi_{cc'}: row = target type, column = source.
inline std::vector<std::vector<double>> infectivity_matrix(const ModelParams& params) {
    std::vector<std::vector<double>> matrix(params.c_count, std::vector<double>(params.c_count, 0.0));
    for (std::size_t c = 0; c < params.c_count; ++c)
        for (std::size_t cs = 0; cs < params.c_count; ++cs)
            matrix[c][cs] = impact_integral(params.coef, c, cs, params.basis.support, params.basis);
    return matrix;
}

struct GrangerEdge {
    std::size_t source = 0;  // exciting type c'
    std::size_t target = 0;  // excited type c
    double weight = 0.0;     // infectivity entry
};

// Directed edge c' -> c for every coefficient group whose norm exceeds
// threshold times the largest group norm. Self-loops are kept:
// self-triggering is meaningful. threshold = 0 keeps every group with any
// nonzero coefficient.
inline std::vector<GrangerEdge> causality_graph(const ModelParams& params, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("causality_graph: threshold must be >= 0");
    double max_norm = 0.0;
    for (std::size_t c = 0; c < params.c_count; ++c)
        for (std::size_t cs = 0; cs < params.c_count; ++cs)
            max_norm = std::max(max_norm, params.coef.group_norm(c, cs));
    std::vector<GrangerEdge> edges;
    for (std::size_t c = 0; c < params.c_count; ++c) {
        for (std::size_t cs = 0; cs < params.c_count; ++cs) {
            if (params.coef.group_norm(c, cs) > threshold * max_norm) {
                edges.push_back({cs, c,
                                 impact_integral(params.coef, c, cs, params.basis.support, params.basis)});
            }
        }
    }
    return edges;
}

enum class TriggerPattern { delay, stable, unstable };

struct TriggerClass {
    std::size_t source = 0;
    std::size_t target = 0;
    TriggerPattern pattern = TriggerPattern::stable;
    double peak_time = 0.0;
    double peak_value = 0.0;
    std::optional<double> delay_length;          // delay pattern only
    std::optional<double> decay_time_to_10pct;   // stable pattern only
    std::vector<double> peaks;                   // salient peak times (unstable only)
};

struct TriggerClassifyConfig {
    std::size_t grid_points = 10000;
    double delay_frac = 0.1;     // "close to 0 at the beginning" cutoff, relative to peak
    double min_delay = 1.0;      // shortest initial quiet span that counts as a delay
    double stable_window = 50.0; // the impact must fall below stable_frac*peak within this span
    double stable_frac = 0.1;
    double salience_frac = 0.5;  // local peaks above this fraction are reported for unstable edges
};

// Classifies one impact function evaluated on a uniform grid over the basis
// support. Grid-based peak finding: robust for sums of Gaussians and
// deterministic.
inline TriggerClass classify_impact(const ModelParams& params, std::size_t target, std::size_t source,
                                    const TriggerClassifyConfig& cfg) {
    const std::size_t n = std::max<std::size_t>(cfg.grid_points, 8);
    const double support = params.basis.support;
    std::vector<double> phi(n);
    std::vector<double> times(n);
    for (std::size_t k = 0; k < n; ++k) {
        times[k] = support * static_cast<double>(k) / static_cast<double>(n - 1);
        phi[k] = impact_value(params.coef, target, source, times[k], params.basis);
    }
    const auto peak_it = std::max_element(phi.begin(), phi.end());
    const std::size_t peak_idx = static_cast<std::size_t>(peak_it - phi.begin());
    if (!(*peak_it > 0.0)) throw std::invalid_argument("classify_impact: impact function is identically zero");

    TriggerClass out;
    out.source = source;
    out.target = target;
    out.peak_time = times[peak_idx];
    out.peak_value = *peak_it;

    // Delay: the impact stays below delay_frac * peak over an initial span
    // of at least min_delay.
    std::size_t rise_idx = 0;
    while (rise_idx < n && phi[rise_idx] < cfg.delay_frac * out.peak_value) ++rise_idx;
    if (times[rise_idx] >= cfg.min_delay) {
        out.pattern = TriggerPattern::delay;
        out.delay_length = times[rise_idx];
        return out;
    }

    // Stable: decays below stable_frac * peak within stable_window and
    // stays there.
    std::size_t last_high = peak_idx;
    for (std::size_t k = n; k-- > peak_idx;) {
        if (phi[k] >= cfg.stable_frac * out.peak_value) {
            last_high = k;
            break;
        }
    }
    if (last_high + 1 < n && times[last_high + 1] <= cfg.stable_window) {
        out.pattern = TriggerPattern::stable;
        out.decay_time_to_10pct = times[last_high + 1];
        return out;
    }

    // Unstable: report every salient local peak.
    out.pattern = TriggerPattern::unstable;
    for (std::size_t k = 0; k < n; ++k) {
        const bool rising = k == 0 || phi[k] >= phi[k - 1];
        const bool falling = k + 1 == n || phi[k] > phi[k + 1];
        if (rising && falling && phi[k] > cfg.salience_frac * out.peak_value) out.peaks.push_back(times[k]);
    }
    return out;
}

// Patterns for every edge of the causality graph at the given threshold.
inline std::vector<TriggerClass> classify_triggers(const ModelParams& params,
                                                   const TriggerClassifyConfig& cfg,
                                                   double edge_threshold = 1e-2) {
    std::vector<TriggerClass> out;
    for (const GrangerEdge& edge : causality_graph(params, edge_threshold))
        out.push_back(classify_impact(params, edge.target, edge.source, cfg));
    return out;
}

struct InfectivityReport {
    std::size_t c_count = 0;
    double edge_threshold = 0.0;
    std::vector<std::vector<double>> matrix;
    std::vector<GrangerEdge> edges;
    std::vector<TriggerClass> patterns;
};

inline InfectivityReport make_infectivity_report(const ModelParams& params, double edge_threshold,
                                                 const TriggerClassifyConfig& cfg = {}) {
    InfectivityReport report;
    report.c_count = params.c_count;
    report.edge_threshold = edge_threshold;
    report.matrix = infectivity_matrix(params);
    report.edges = causality_graph(params, edge_threshold);
    report.patterns = classify_triggers(params, cfg, edge_threshold);
    return report;
}

} // namespace wbhawkes
