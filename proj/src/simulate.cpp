#include "garma/simulate.hpp"

#include "garma/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace garma {

namespace {

std::int64_t draw_count(const Family& family, double mu, Rng& rng) {
    switch (family.kind) {
        case FamilyKind::Poisson: {
            if (mu <= 0.0) return 0;
            return std::poisson_distribution<std::int64_t>(mu)(rng);
        }
        case FamilyKind::Binomial: {
            const double p = std::clamp(mu / static_cast<double>(family.m), 0.0, 1.0);
            return std::binomial_distribution<std::int64_t>(family.m, p)(rng);
        }
        case FamilyKind::NegBinomial: {
            // NB(k, p = k/(mu+k)) as a gamma-Poisson mixture.
            if (mu <= 0.0) return 0;
            const double lambda = std::gamma_distribution<double>(family.k, mu / family.k)(rng);
            if (lambda <= 0.0) return 0;
            return std::poisson_distribution<std::int64_t>(lambda)(rng);
        }
    }
    return 0;
}

}  // namespace

SimCovariate trend_covariate() {
    return {"trend", [](std::size_t t) { return static_cast<double>(t); }};
}

SimCovariate log_trend_covariate() {
    return {"logtrend", [](std::size_t t) { return std::log(static_cast<double>(t)); }};
}

SimCovariate step_covariate(std::size_t last_before) {
    return {"step", [last_before](std::size_t t) { return t > last_before ? 1.0 : 0.0; }};
}

CountSeries simulate_garma(const SimSpec& spec) {
    const ModelShape& shape = spec.params.shape();
    if (spec.params.dim() == 0) throw std::invalid_argument("simulation needs a parameter state");
    if (spec.n < 1) throw std::invalid_argument("simulation length must be at least 1");
    if (!(spec.c > 0.0 && spec.c < 1.0)) throw std::invalid_argument("clipping constant must lie in (0,1)");
    if (spec.covariates.size() != shape.r)
        throw std::invalid_argument("covariate generators do not match the beta coefficients");
    if (spec.family.kind == FamilyKind::Binomial && spec.family.m < 1)
        throw std::invalid_argument("binomial simulation needs m >= 1");
    if (spec.family.kind == FamilyKind::NegBinomial && !(spec.family.k > 0.0))
        throw std::invalid_argument("negative binomial simulation needs k > 0");

    const std::size_t total = spec.warmup + spec.n;
    const std::size_t r = shape.r;
    std::vector<double> x(total * r);
    std::vector<double> xb(total, 0.0);
    for (std::size_t s = 0; s < total; ++s) {
        for (std::size_t j = 0; j < r; ++j) {
            x[s * r + j] = spec.covariates[j].value(s + 1);
            xb[s] += x[s * r + j] * spec.params.beta(j);
        }
    }

    Rng rng(spec.seed);
    std::vector<std::int64_t> y(total);
    std::vector<double> log_ystar(total);
    std::vector<double> resid(total);
    for (std::size_t s = 0; s < total; ++s) {
        double eta = spec.params.alpha() + xb[s];
        for (std::size_t j = 1; j <= shape.p && j <= s; ++j)
            eta += spec.params.phi(j - 1) * (log_ystar[s - j] - xb[s - j]);
        for (std::size_t j = 1; j <= shape.q && j <= s; ++j)
            eta += spec.params.theta(j - 1) * resid[s - j];
        const double mu = inverse_link(spec.family, eta);
        if (!std::isfinite(eta) || !std::isfinite(mu))
            throw SimulationError(s + 1, "conditional mean is not finite at generation step " +
                                             std::to_string(s + 1));
        y[s] = draw_count(spec.family, mu, rng);
        log_ystar[s] = std::log(clip(y[s], spec.c));
        const double log_mu =
            spec.family.kind == FamilyKind::Binomial
                ? std::log(static_cast<double>(spec.family.m)) - std::log1p(std::exp(-eta))
                : eta;
        resid[s] = log_ystar[s] - log_mu;
    }

    CountSeries out;
    out.c = spec.c;
    out.num_covariates = r;
    out.y.assign(y.begin() + static_cast<std::ptrdiff_t>(spec.warmup), y.end());
    out.covariates.assign(x.begin() + static_cast<std::ptrdiff_t>(spec.warmup * r), x.end());
    for (const auto& cov : spec.covariates) out.covariate_names.push_back(cov.name);
    return out;
}

}  // namespace garma
