#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbhawkes/errors.hpp"
#include "wbhawkes/eval.hpp"
#include "wbhawkes/learn.hpp"
#include "wbhawkes/model.hpp"
#include "wbhawkes/simulate.hpp"

namespace wbhawkes {

// Model-selection switchboard shared by the fit and sweep commands: the
// eight variants are (Weibull vs frozen-rho base) x (L1 on/off) x
// (group lasso on/off).
struct ModeSpec {
    std::string name;
    bool freeze_rho = false;
    bool use_sparse = false;
    bool use_group = false;
};

inline ModeSpec parse_mode(const std::string& mode) {
    static const ModeSpec known[] = {
        {"wb-sgl", false, true, true},   {"wb-s", false, true, false},
        {"wb-gl", false, false, true},   {"wb", false, false, false},
        {"mle-sgl", true, true, true},   {"mle-s", true, true, false},
        {"mle-gl", true, false, true},   {"mle", true, false, false},
    };
    for (const auto& spec : known)
        if (spec.name == mode) return spec;
    throw std::invalid_argument("unknown mode '" + mode +
                                "' (expected wb-sgl|wb-s|wb-gl|wb|mle-sgl|mle-s|mle-gl|mle)");
}

// Applies a mode to a FitConfig. Explicit alpha flags override the
// defaults (10 for the L1 weight, 100 for the group weight) but a penalty
// disabled by the mode stays at zero.
inline void apply_mode(FitConfig& cfg, const ModeSpec& mode, std::optional<double> alpha_s_flag,
                       std::optional<double> alpha_g_flag) {
    cfg.freeze_rho = mode.freeze_rho;
    cfg.alpha_s = mode.use_sparse ? alpha_s_flag.value_or(10.0) : 0.0;
    cfg.alpha_g = mode.use_group ? alpha_g_flag.value_or(100.0) : 0.0;
}

// All applicable measure criteria for a fitted model. Truth-dependent
// metrics are filled only when ground truth is given; the test
// log-likelihood only when test sequences are given.
inline MetricsReport compute_metrics(const ModelParams& model, const GroundTruth* truth,
                                     const std::vector<EventSequence>& test_data,
                                     double zero_threshold = 1e-2, std::size_t threads = 1) {
    MetricsReport metrics;
    if (!test_data.empty()) metrics.loglike_test = log_likelihood(model, test_data, threads);
    if (truth != nullptr) {
        if (truth->c_count != model.c_count)
            throw DataError("metrics: ground truth declares " + std::to_string(truth->c_count) +
                            " types but the model has " + std::to_string(model.c_count));
        metrics.e_mu = rel_err_vector(model.mu, truth->mu);
        metrics.e_rho = rel_err_vector(model.rho, truth->rho);
        if (!test_data.empty()) {
            double t_begin = test_data.front().t_begin;
            double t_end = test_data.front().t_end;
            for (const auto& seq : test_data) {
                t_begin = std::min(t_begin, seq.t_begin);
                t_end = std::max(t_end, seq.t_end);
            }
            metrics.e_h = rel_err_base(model.mu, model.rho, truth->mu, truth->rho, t_begin, t_end);
        }
        const double horizon = std::max(model.basis.support, truth->max_support());
        metrics.e_phi = abs_err_impact(model, *truth, horizon);
        metrics.granger_accuracy = granger_accuracy(model, *truth, zero_threshold);
    }
    return metrics;
}

// Pairs ranked by infectivity, largest first; ties broken by index so the
// output order is deterministic.
inline std::vector<std::pair<std::size_t, std::size_t>> top_infectivity_pairs(
    const std::vector<std::vector<double>>& matrix, std::size_t k) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t c = 0; c < matrix.size(); ++c)
        for (std::size_t cs = 0; cs < matrix[c].size(); ++cs) pairs.push_back({c, cs});
    std::stable_sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
        return matrix[a.first][a.second] > matrix[b.first][b.second];
    });
    pairs.resize(std::min(k, pairs.size()));
    return pairs;
}

} // namespace wbhawkes
