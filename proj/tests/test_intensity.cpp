#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "wbhawkes/intensity.hpp"
#include "wbhawkes/rng.hpp"

using namespace wbhawkes;

namespace {

// Small random model + sequence for oracle comparisons.
ModelParams random_model(SplitMix64& rng, std::size_t c_count, std::size_t m_count, double support) {
    ModelParams params(c_count, BasisConfig::evenly_spaced(m_count, support));
    for (std::size_t c = 0; c < c_count; ++c) {
        params.mu[c] = rng.next_uniform(0.05, 0.4);
        params.rho[c] = rng.next_uniform(0.6, 1.4);
    }
    for (double& v : params.coef.data) v = rng.next_uniform(0.0, 0.25);
    return params;
}

EventSequence random_sequence(SplitMix64& rng, std::size_t c_count, double t_end, std::size_t n_events) {
    EventSequence seq;
    seq.t_begin = 0.0;
    seq.t_end = t_end;
    double t = 0.0;
    for (std::size_t i = 0; i < n_events; ++i) {
        t += rng.next_uniform(0.05, t_end / static_cast<double>(n_events + 1));
        seq.events.push_back({t, rng.next_u64() % c_count});
    }
    return seq;
}

// Full-history intensity without the support-window shortcut.
double intensity_brute(const ModelParams& params, const EventSequence& seq, std::size_t c, double t) {
    double lambda = params.mu[c] * params.rho[c] * std::pow(t, params.rho[c] - 1.0);
    for (const Event& ev : seq.events) {
        if (ev.time >= t) break;
        for (std::size_t m = 0; m < params.basis.m_count; ++m)
            lambda += params.coef.at(c, ev.type, m) * basis_value(m, t - ev.time, params.basis);
    }
    return lambda;
}

} // namespace

TEST(BaseIntensity, ConstantWhenRhoIsOne) {
    for (double t : {0.1, 1.0, 7.5, 300.0}) EXPECT_DOUBLE_EQ(base_intensity(0.37, 1.0, t), 0.37);
}

TEST(BaseIntensity, WeibullScaleShapeProduct) {
    // t = 1 makes t^(rho-1) = 1, so h(1) = mu * rho.
    EXPECT_NEAR(base_intensity(0.004168, 0.676046, 1.0), 0.0028178, 5e-7);
    EXPECT_DOUBLE_EQ(base_intensity(1.0, 2.0, 3.0), 6.0);
}

TEST(BaseIntensity, RejectsNonPositiveTime) {
    EXPECT_THROW(base_intensity(1.0, 0.5, 0.0), std::domain_error);
    EXPECT_THROW(base_intensity(1.0, 0.5, -1.0), std::domain_error);
}

TEST(BaseIntegral, ClosedForm) {
    EXPECT_DOUBLE_EQ(base_integral(0.1, 1.0, 0.0, 50.0), 5.0);
    EXPECT_DOUBLE_EQ(base_integral(1.0, 0.5, 0.0, 100.0), 10.0);
}

TEST(BaseIntegral, Additivity) {
    auto rng = rng_stream(21, 0);
    for (int k = 0; k < 50; ++k) {
        const double mu = rng.next_uniform(0.01, 2.0);
        const double rho = rng.next_uniform(0.3, 2.0);
        double a = rng.next_uniform(0.0, 5.0);
        double b = a + rng.next_uniform(0.0, 5.0);
        double c = b + rng.next_uniform(0.0, 5.0);
        EXPECT_NEAR(base_integral(mu, rho, a, b) + base_integral(mu, rho, b, c),
                    base_integral(mu, rho, a, c), 1e-12);
    }
}

TEST(WeibullDensity, ExponentialSpecialCase) {
    EXPECT_NEAR(weibull_event_density(1.0, 1.0, 1.0), std::exp(-1.0), 1e-15);
    EXPECT_THROW(weibull_event_density(1.0, 1.0, 0.0), std::domain_error);
}

TEST(WeibullDensity, MassApproachesOne) {
    const double mu = 0.8;
    const double mass = oracles::trapezoid(
        [&](double t) { return t <= 0.0 ? 0.0 : weibull_event_density(mu, 1.0, t); },
        1e-9, 10.0 / mu, 200000);
    EXPECT_NEAR(mass, 1.0, 1e-4);
}

TEST(WeibullDensity, MemorylessnessAtRhoOne) {
    // P(T < s + t | T > t) = P(T < s) exactly when rho = 1, via the
    // closed-form survival function.
    auto rng = rng_stream(22, 0);
    for (int k = 0; k < 50; ++k) {
        const double mu = rng.next_uniform(0.05, 2.0);
        const double s = rng.next_uniform(0.01, 5.0);
        const double t = rng.next_uniform(0.01, 5.0);
        const double cond = 1.0 - weibull_survival(mu, 1.0, s + t) / weibull_survival(mu, 1.0, t);
        const double uncond = 1.0 - weibull_survival(mu, 1.0, s);
        EXPECT_NEAR(cond, uncond, 1e-12);
    }
}

TEST(ConditionalIntensity, EmptyHistoryEqualsBase) {
    auto rng = rng_stream(23, 0);
    auto params = random_model(rng, 2, 5, 4.0);
    EventSequence seq;
    seq.t_begin = 0.0;
    seq.t_end = 10.0;
    for (double t : {0.5, 1.0, 3.3})
        EXPECT_DOUBLE_EQ(conditional_intensity(params, seq, 1, t),
                         base_intensity(params.mu[1], params.rho[1], t));
}

TEST(ConditionalIntensity, ZeroCoefficientsEqualBase) {
    auto rng = rng_stream(24, 0);
    auto params = random_model(rng, 2, 5, 4.0);
    for (double& v : params.coef.data) v = 0.0;
    auto seq = random_sequence(rng, 2, 10.0, 8);
    EXPECT_DOUBLE_EQ(conditional_intensity(params, seq, 0, 9.7),
                     base_intensity(params.mu[0], params.rho[0], 9.7));
}

TEST(ConditionalIntensity, TwoEventHandSum) {
    auto cfg = BasisConfig::evenly_spaced(3, 4.0);
    ModelParams params(2, cfg);
    params.mu = {0.2, 0.3};
    params.rho = {1.0, 1.0};
    params.coef.at(0, 0, 1) = 0.5;
    params.coef.at(0, 1, 2) = 0.25;
    EventSequence seq;
    seq.t_begin = 0.0;
    seq.t_end = 10.0;
    seq.events = {{1.0, 0}, {2.0, 1}};

    const double t = 3.0;
    double expect = 0.2;  // base, rho = 1
    expect += 0.5 * basis_value(1, t - 1.0, cfg);
    expect += 0.25 * basis_value(2, t - 2.0, cfg);
    EXPECT_NEAR(conditional_intensity(params, seq, 0, t), expect, 1e-14);
}

TEST(ConditionalIntensity, TruncatedHistoryEqualsFull) {
    auto rng = rng_stream(25, 0);
    auto params = random_model(rng, 3, 5, 2.0);
    auto seq = random_sequence(rng, 3, 30.0, 40);
    for (double t : {5.0, 12.7, 29.9}) {
        for (std::size_t c = 0; c < 3; ++c) {
            EXPECT_DOUBLE_EQ(conditional_intensity(params, seq, c, t),
                             intensity_brute(params, seq, c, t));
        }
    }
}

TEST(ConditionalIntensity, NeverBelowBase) {
    auto rng = rng_stream(26, 0);
    auto params = random_model(rng, 2, 5, 3.0);
    auto seq = random_sequence(rng, 2, 20.0, 15);
    for (double t = 0.5; t < 20.0; t += 0.7) {
        for (std::size_t c = 0; c < 2; ++c) {
            const double base = base_intensity(params.mu[c], params.rho[c], t);
            EXPECT_GE(conditional_intensity(params, seq, c, t), base);
            EXPECT_GT(base, 0.0);
        }
    }
}

TEST(LogLikelihood, SingleEventClosedForm) {
    ModelParams params(1, BasisConfig::evenly_spaced(3, 2.0));
    params.mu = {0.1};
    params.rho = {1.0};
    EventSequence seq;
    seq.t_begin = 0.0;
    seq.t_end = 10.0;
    seq.events = {{1.0, 0}};
    EXPECT_NEAR(log_likelihood(params, {seq}), std::log(0.1) - 1.0, 1e-12);
    EXPECT_NEAR(std::log(0.1) - 1.0, -3.302585, 1e-6);
}

TEST(LogLikelihood, EmptySequencePureCompensator) {
    ModelParams params(1, BasisConfig::evenly_spaced(3, 2.0));
    params.mu = {0.1};
    params.rho = {1.0};
    EventSequence seq;
    seq.t_begin = 0.0;
    seq.t_end = 10.0;
    EXPECT_DOUBLE_EQ(log_likelihood(params, {seq}), -1.0);
}

TEST(LogLikelihood, PoissonReduction) {
    // rho = 1 and zero coefficients: n log(mu) - mu (t_end - t_begin).
    ModelParams params(2, BasisConfig::evenly_spaced(4, 3.0));
    params.mu = {0.2, 0.5};
    params.rho = {1.0, 1.0};
    EventSequence seq;
    seq.t_begin = 1.0;
    seq.t_end = 21.0;
    seq.events = {{2.0, 0}, {3.0, 1}, {7.0, 0}, {15.5, 1}, {20.0, 1}};
    const double expect = 2.0 * std::log(0.2) + 3.0 * std::log(0.5) - (0.2 + 0.5) * 20.0;
    EXPECT_NEAR(log_likelihood(params, {seq}), expect, 1e-12);
}

TEST(LogLikelihood, QuadratureOracleOnThreeEvents) {
    auto rng = rng_stream(27, 0);
    auto params = random_model(rng, 2, 4, 2.5);
    EventSequence seq;
    seq.t_begin = 0.2;
    seq.t_end = 6.0;
    seq.events = {{0.9, 0}, {2.1, 1}, {3.4, 0}};

    double log_term = 0.0;
    for (const Event& ev : seq.events) log_term += std::log(intensity_brute(params, seq, ev.type, ev.time));
    double compensator = 0.0;
    for (std::size_t c = 0; c < params.c_count; ++c)
        compensator += oracles::trapezoid(
            [&](double t) { return intensity_brute(params, seq, c, t); }, seq.t_begin, seq.t_end, 58000);
    const double oracle = log_term - compensator;
    const double closed = log_likelihood(params, {seq});
    EXPECT_NEAR(closed / oracle, 1.0, 1e-4);
}

TEST(LogLikelihood, PureFunctionOfData) {
    auto rng = rng_stream(28, 0);
    auto params = random_model(rng, 2, 5, 3.0);
    std::vector<EventSequence> dataset;
    for (int n = 0; n < 4; ++n) dataset.push_back(random_sequence(rng, 2, 15.0, 10));

    const double once = log_likelihood(params, dataset);
    const double again = log_likelihood(params, dataset);
    EXPECT_EQ(once, again);

    // Per-sequence values are independent of the surrounding dataset order.
    std::vector<double> individual;
    for (const auto& seq : dataset) individual.push_back(log_likelihood(params, {seq}));
    std::swap(dataset[0], dataset[3]);
    EXPECT_EQ(log_likelihood(params, {dataset[3]}), individual[0]);
    EXPECT_EQ(log_likelihood(params, {dataset[0]}), individual[3]);

    // Threaded evaluation is bit-identical to sequential evaluation.
    EXPECT_EQ(log_likelihood(params, dataset, 4), once);
}

TEST(LogLikelihood, TimeRescalingIdentity) {
    // Scaling times by s, basis by s, mu by s^-rho and coefficients by 1/s
    // shifts the log-likelihood by exactly -(number of events) * log(s).
    auto rng = rng_stream(29, 0);
    auto params = random_model(rng, 2, 4, 3.0);
    auto seq = random_sequence(rng, 2, 12.0, 9);
    const double s = 3.7;

    ModelParams scaled = params;
    scaled.basis.support *= s;
    scaled.basis.bandwidth *= s;
    for (double& c : scaled.basis.centers) c *= s;
    for (std::size_t c = 0; c < scaled.c_count; ++c) scaled.mu[c] = params.mu[c] / std::pow(s, params.rho[c]);
    for (double& v : scaled.coef.data) v /= s;

    EventSequence scaled_seq = seq;
    scaled_seq.t_begin *= s;
    scaled_seq.t_end *= s;
    for (Event& ev : scaled_seq.events) ev.time *= s;

    const double base = log_likelihood(params, {seq});
    const double rescaled = log_likelihood(scaled, {scaled_seq});
    EXPECT_NEAR(rescaled, base - static_cast<double>(seq.events.size()) * std::log(s), 1e-9);
}
