#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "wbhawkes/granger.hpp"
#include "wbhawkes/rng.hpp"
#include "wbhawkes/simulate.hpp"

using namespace wbhawkes;

namespace {

ModelParams encode_truth(const GroundTruth& truth, const BasisConfig& basis) {
    ModelParams params(truth.c_count, basis);
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    params.rho = truth.rho;
    for (std::size_t c = 0; c < truth.c_count; ++c)
        for (std::size_t cs = 0; cs < truth.c_count; ++cs)
            for (std::size_t m = 0; m < basis.m_count; ++m)
                params.coef.at(c, cs, m) = true_impact_value(truth, c, cs, basis.centers[m]);
    return params;
}

} // namespace

TEST(Infectivity, ZeroModel) {
    ModelParams params(3, BasisConfig::default_synthetic());
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    const auto matrix = infectivity_matrix(params);
    for (const auto& row : matrix)
        for (double v : row) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(causality_graph(params, 1e-2).empty());
    EXPECT_TRUE(causality_graph(params, 0.0).empty());
}

TEST(Infectivity, SingleCoefficientEntryAndOrientation) {
    BasisConfig basis;
    basis.m_count = 1;
    basis.centers = {0.0};
    basis.bandwidth = 1.5;
    basis.support = 40.0;
    ModelParams params(3, basis);
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    params.coef.at(2, 0, 0) = 1.0;  // source type 0 excites target type 2

    const auto matrix = infectivity_matrix(params);
    EXPECT_NEAR(matrix[2][0], 1.87997, 1e-5);
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t cs = 0; cs < 3; ++cs)
            if (!(c == 2 && cs == 0)) EXPECT_EQ(matrix[c][cs], 0.0);

    const auto edges = causality_graph(params, 1e-2);
    ASSERT_EQ(edges.size(), 1u);
    EXPECT_EQ(edges[0].source, 0u);
    EXPECT_EQ(edges[0].target, 2u);
    EXPECT_NEAR(edges[0].weight, 1.87997, 1e-5);
}

TEST(Infectivity, MatrixMatchesQuadrature) {
    auto rng = rng_stream(81, 0);
    ModelParams params(2, BasisConfig::evenly_spaced(5, 6.0));
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    for (double& v : params.coef.data) v = rng.next_uniform(0.0, 0.3);
    const auto matrix = infectivity_matrix(params);
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t cs = 0; cs < 2; ++cs) {
            const double quad = oracles::trapezoid(
                [&](double t) { return impact_value(params.coef, c, cs, t, params.basis); },
                0.0, params.basis.support, 300000);
            EXPECT_NEAR(matrix[c][cs] / quad, 1.0, 1e-6);
        }
}

TEST(CausalityGraph, NineteenEdgesFromEncodedTruth) {
    auto truth = synth_ground_truth(SynthKind::sine, 82);
    const auto params = encode_truth(truth, BasisConfig::default_synthetic());
    EXPECT_EQ(causality_graph(params, 1e-2).size(), 19u);
}

TEST(CausalityGraph, AnyNonzeroGroupAtThresholdZero) {
    ModelParams params(3, BasisConfig::default_synthetic());
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    params.coef.at(0, 1, 0) = 1e-9;
    params.coef.at(2, 2, 3) = 0.5;
    const auto edges = causality_graph(params, 0.0);
    EXPECT_EQ(edges.size(), 2u);
}

TEST(CausalityGraph, MonotoneInThreshold) {
    auto rng = rng_stream(83, 0);
    ModelParams params(4, BasisConfig::default_synthetic());
    std::fill(params.mu.begin(), params.mu.end(), 0.1);
    for (double& v : params.coef.data) v = rng.next_unit() < 0.3 ? rng.next_uniform(0.0, 0.2) : 0.0;

    auto edge_set = [&](double threshold) {
        std::set<std::pair<std::size_t, std::size_t>> s;
        for (const auto& e : causality_graph(params, threshold)) s.insert({e.source, e.target});
        return s;
    };
    const auto loose = edge_set(0.01);
    const auto mid = edge_set(0.1);
    const auto tight = edge_set(0.5);
    EXPECT_TRUE(std::includes(loose.begin(), loose.end(), mid.begin(), mid.end()));
    EXPECT_TRUE(std::includes(mid.begin(), mid.end(), tight.begin(), tight.end()));
}

TEST(ClassifyTriggers, DelayPattern) {
    // A single narrow bump at t = 18 stays near zero for far longer than
    // min_delay, then spikes: a delay trigger with peak at 18.
    auto basis = BasisConfig::evenly_spaced(31, 60.0, 1.0);
    ModelParams params(1, basis);
    params.mu = {0.1};
    params.coef.at(0, 0, 9) = 1.0;  // center 18
    ASSERT_DOUBLE_EQ(basis.centers[9], 18.0);

    const auto patterns = classify_triggers(params, {}, 1e-2);
    ASSERT_EQ(patterns.size(), 1u);
    const auto& p = patterns[0];
    EXPECT_EQ(p.pattern, TriggerPattern::delay);
    EXPECT_NEAR(p.peak_time, 18.0, 0.01);
    ASSERT_TRUE(p.delay_length.has_value());
    // phi crosses 0.1 * peak at 18 - sigma sqrt(2 ln 10).
    EXPECT_NEAR(*p.delay_length, 18.0 - std::sqrt(2.0 * std::log(10.0)), 0.02);
    EXPECT_LT(*p.delay_length, p.peak_time);
}

TEST(ClassifyTriggers, StablePattern) {
    // Monotone decay hitting 8% of peak at t = 30: decays through 10%
    // around t = sigma sqrt(2 ln 10) ~ 28.66, inside the 50-unit window.
    const double sigma = 30.0 / std::sqrt(2.0 * std::log(1.0 / 0.08));
    BasisConfig basis;
    basis.m_count = 1;
    basis.centers = {0.0};
    basis.bandwidth = sigma;
    basis.support = 60.0;
    ModelParams params(1, basis);
    params.mu = {0.1};
    params.coef.at(0, 0, 0) = 0.8;

    const auto patterns = classify_triggers(params, {}, 1e-2);
    ASSERT_EQ(patterns.size(), 1u);
    const auto& p = patterns[0];
    EXPECT_EQ(p.pattern, TriggerPattern::stable);
    EXPECT_NEAR(p.peak_time, 0.0, 0.01);
    ASSERT_TRUE(p.decay_time_to_10pct.has_value());
    EXPECT_NEAR(*p.decay_time_to_10pct, sigma * std::sqrt(2.0 * std::log(10.0)), 0.05);
    EXPECT_LE(*p.decay_time_to_10pct, 50.0);
}

TEST(ClassifyTriggers, UnstablePattern) {
    // Early peak plus a second salient peak at t = 48 that keeps the impact
    // above 10% of its maximum beyond the 50-unit stability window.
    auto basis = BasisConfig::evenly_spaced(31, 60.0, 1.0);
    ModelParams params(1, basis);
    params.mu = {0.1};
    params.coef.at(0, 0, 0) = 1.0;   // center 0
    params.coef.at(0, 0, 24) = 0.9;  // center 48

    const auto patterns = classify_triggers(params, {}, 1e-2);
    ASSERT_EQ(patterns.size(), 1u);
    const auto& p = patterns[0];
    EXPECT_EQ(p.pattern, TriggerPattern::unstable);
    ASSERT_EQ(p.peaks.size(), 2u);
    EXPECT_NEAR(p.peaks[0], 0.0, 0.02);
    EXPECT_NEAR(p.peaks[1], 48.0, 0.02);
}

TEST(ClassifyTriggers, ZeroEdgeExcludedAndReportShape) {
    auto truth = synth_ground_truth(SynthKind::sine, 84);
    const auto params = encode_truth(truth, BasisConfig::default_synthetic());
    const auto report = make_infectivity_report(params, 1e-2);
    EXPECT_EQ(report.c_count, 5u);
    EXPECT_EQ(report.matrix.size(), 5u);
    EXPECT_EQ(report.edges.size(), 19u);
    EXPECT_EQ(report.patterns.size(), 19u);  // zero pairs never reach the classifier

    ModelParams zero(2, BasisConfig::default_synthetic());
    std::fill(zero.mu.begin(), zero.mu.end(), 0.1);
    EXPECT_THROW(classify_impact(zero, 0, 0, {}), std::invalid_argument);
}
