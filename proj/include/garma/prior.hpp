#pragma once

#include "garma/model.hpp"

namespace garma {

/// Independent zero-mean normal priors plus the prior inclusion probability.
struct PriorSpec {
    double sd_alpha = 0.3;
    double sd_phi = 0.2;
    double sd_theta = 0.2;
    double sd_beta = 4.0;
    double inc_prob = 0.5;

    void validate() const;
    /// Prior standard deviation of a coefficient of the given kind.
    [[nodiscard]] double sd_for(CoeffKind kind) const noexcept;
};

/// log N(x; 0, sd^2).
[[nodiscard]] double log_normal_density(double x, double sd) noexcept;

/// Sum of normal log-densities over the included coefficients (alpha is included unless toggled off).
[[nodiscard]] double log_prior(const ParamState& params, const PriorSpec& priors);

}  // namespace garma
