#include "garma/prior.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace garma {

void PriorSpec::validate() const {
    for (double sd : {sd_alpha, sd_phi, sd_theta, sd_beta})
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw std::invalid_argument("prior standard deviations must be positive");
    if (!(inc_prob >= 0.0 && inc_prob <= 1.0))
        throw std::invalid_argument("inclusion probability must lie in [0,1]");
}

double PriorSpec::sd_for(CoeffKind kind) const noexcept {
    switch (kind) {
        case CoeffKind::Alpha: return sd_alpha;
        case CoeffKind::Beta: return sd_beta;
        case CoeffKind::Phi: return sd_phi;
        case CoeffKind::Theta: return sd_theta;
    }
    return sd_alpha;
}

double log_normal_density(double x, double sd) noexcept {
    const double z = x / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_prior(const ParamState& params, const PriorSpec& priors) {
    const ModelShape& shape = params.shape();
    double total = 0.0;
    for (std::size_t i = 0; i < params.dim(); ++i)
        if (params.included(i)) total += log_normal_density(params.value(i), priors.sd_for(shape.kind(i)));
    return total;
}

}  // namespace garma
