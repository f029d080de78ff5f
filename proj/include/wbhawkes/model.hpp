#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wbhawkes/basis.hpp"

namespace wbhawkes {

// Full parameter set of the Weibull-base Hawkes process:
//   lambda_c(t) = mu_c rho_c t^(rho_c - 1) + sum_{t_j < t} phi_{c, c_j}(t - t_j)
// with phi expanded in the Gaussian basis.
struct ModelParams {
    std::size_t c_count = 0;
    std::vector<double> mu;    // scale, one per type, > 0
    std::vector<double> rho;   // shape, one per type, > 0
    ImpactCoefficients coef;
    BasisConfig basis;

    ModelParams() = default;
    ModelParams(std::size_t c_count_, BasisConfig basis_)
        : c_count(c_count_),
          mu(c_count_, 0.0),
          rho(c_count_, 1.0),
          coef(c_count_, basis_.m_count),
          basis(std::move(basis_)) {}

    void validate() const {
        basis.validate();
        if (mu.size() != c_count || rho.size() != c_count)
            throw std::invalid_argument("model: mu/rho size must equal c_count");
        if (coef.c_count != c_count || coef.m_count != basis.m_count)
            throw std::invalid_argument("model: coefficient tensor dimensions mismatch");
        for (double v : mu)
            if (!(v > 0.0)) throw std::invalid_argument("model: mu entries must be positive");
        for (double v : rho)
            if (!(v > 0.0)) throw std::invalid_argument("model: rho entries must be positive");
        coef.validate();
    }
};

} // namespace wbhawkes
