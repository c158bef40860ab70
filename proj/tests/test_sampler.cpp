#include "garma/prior.hpp"
#include "garma/sampler.hpp"
#include "garma/simulate.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

using namespace garma;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SamplerConfig prior_config(std::size_t iters, std::uint64_t seed) {
    SamplerConfig cfg;
    cfg.p_max = 3;
    cfg.q_max = 3;
    cfg.priors = PriorSpec{0.3, 0.2, 0.2, 4.0, 0.5};
    cfg.rj_scale = 0.2;
    cfg.iters = iters;
    cfg.seed = seed;
    return cfg;
}

CountSeries short_binomial_series() {
    SimSpec spec;
    spec.family = Family::binomial(15);
    spec.params = ParamState(ModelShape{0, 1, 0});
    spec.params.with_alpha(-0.5).with_phi(0, -0.4);
    spec.n = 200;
    spec.seed = 17;
    return simulate_garma(spec);
}

ChainOutput chain_with_patterns(const std::vector<std::string>& patterns) {
    ChainOutput chain;
    chain.names = {"alpha", "phi1"};
    chain.dim = 2;
    chain.toggleable = {1};
    chain.rows = patterns.size();
    for (const auto& p : patterns) {
        chain.draws.push_back(0.0);
        chain.draws.push_back(p == "1" ? 0.5 : 0.0);
        chain.indicators.push_back(p == "1" ? 1 : 0);
    }
    return chain;
}

}  // namespace

TEST_CASE("chain shape contract") {
    const auto chain = run_chain(short_binomial_series(), Family::binomial(15), prior_config(10, 1));
    CHECK(chain.rows == 10);
    CHECK(chain.dim == 7);
    CHECK(chain.draws.size() == 70);
    CHECK(chain.toggleable.size() == 6);
    CHECK(chain.indicators.size() == 60);
    CHECK(chain.names.front() == "alpha");
    for (const auto& c : chain.counters) {
        CHECK(c.rj_accepted <= c.rj_proposed);
        CHECK(c.rw_accepted <= c.rw_proposed);
    }
    CHECK(chain.counters[0].rj_proposed == 0);
    CHECK(chain.counters[0].rw_proposed == 10);
    std::uint64_t toggles = 0;
    for (const auto& c : chain.counters) toggles += c.rj_proposed;
    CHECK(toggles == 60);
}

TEST_CASE("excluded coefficients are recorded as zero") {
    SamplerConfig cfg;
    cfg.iters = 2000;
    cfg.seed = 4;
    const auto chain = run_chain(short_binomial_series(), Family::binomial(15), cfg);
    for (std::size_t i = 0; i < chain.rows; ++i)
        for (std::size_t k = 0; k < chain.toggleable.size(); ++k)
            CHECK((chain.draw(i, chain.toggleable[k]) == 0.0) == !chain.indicator(i, k));
}

TEST_CASE("birth with the prior as proposal is always accepted on empty data") {
    const PriorSpec priors{0.3, 0.2, 0.2, 4.0, 0.5};
    const ModelContext ctx{[](const ParamState&) { return 0.0; }, {}, priors, 0.2, 0.1};
    Rng rng(8);
    for (std::size_t i = 0; i < 200; ++i) {
        ChainState state{ParamState(ModelShape{0, 3, 3}), 0.0};
        const std::size_t coeff = 1 + i % 6;
        CHECK(rj_toggle_step(state, coeff, ctx, rng));
        CHECK(state.params.included(coeff));
        CHECK(rj_toggle_step(state, coeff, ctx, rng));
        CHECK_FALSE(state.params.included(coeff));
    }
}

TEST_CASE("candidates with -inf likelihood are rejected") {
    const ModelContext ctx{[](const ParamState& p) { return p.included(1) || p.alpha() != 0.0 ? kNegInf : 0.0; },
                           {}, PriorSpec{}, 5.0, 0.1};
    Rng rng(9);
    ChainState state{ParamState(ModelShape{0, 1, 0}), 0.0};
    const ParamState before = state.params;
    for (int i = 0; i < 50; ++i) {
        CHECK_FALSE(rj_toggle_step(state, 1, ctx, rng));
        CHECK_FALSE(rw_update_step(state, 0, ctx, rng));
    }
    CHECK(state.params == before);
}

TEST_CASE("random walk on a flat posterior always accepts") {
    const PriorSpec priors;
    const ModelContext ctx{[&](const ParamState& p) { return -log_normal_density(p.alpha(), priors.sd_alpha); },
                           {}, priors, 5.0, 0.5};
    ChainState state{ParamState(ModelShape{0, 1, 0}), 0.0};
    state.loglik = ctx.log_likelihood(state.params);
    Rng rng(10);
    for (int i = 0; i < 200; ++i) CHECK(rw_update_step(state, 0, ctx, rng));
    CHECK_THROWS_AS(rw_update_step(state, 1, ctx, rng), std::logic_error);
}

TEST_CASE("alpha-only chain recovers its prior") {
    SamplerConfig cfg = prior_config(50000, 21);
    cfg.p_max = 0;
    cfg.q_max = 0;
    cfg.rw_scale = 0.5;
    const auto chain = run_chain(CountSeries{}, Family::poisson(), cfg);
    const auto a = chain.column(0);
    const double mean = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    double ss = 0.0;
    for (double v : a) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(a.size() - 1));
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sd - 0.3) < 0.05 * 0.3);
}

TEST_CASE("single toggleable coefficient visits both patterns equally") {
    SamplerConfig cfg = prior_config(50000, 22);
    cfg.p_max = 1;
    cfg.q_max = 0;
    const auto chain = run_chain(CountSeries{}, Family::poisson(), cfg);
    const auto probs = posterior_model_probs(chain);
    REQUIRE(probs.size() == 2);
    CHECK(std::abs(probs.at("0") - 0.5) < 0.02);
    CHECK(std::abs(probs.at("1") - 0.5) < 0.02);
}

TEST_CASE("posterior model probabilities count patterns") {
    const auto probs = posterior_model_probs(chain_with_patterns({"1", "1", "1", "0"}));
    CHECK(probs.at("1") == doctest::Approx(0.75));
    CHECK(probs.at("0") == doctest::Approx(0.25));
    const auto single = posterior_model_probs(chain_with_patterns({"0"}));
    CHECK(single.size() == 1);
    CHECK(single.at("0") == 1.0);
    const auto burned = posterior_model_probs(chain_with_patterns({"0", "1", "1"}), 1);
    CHECK(burned.at("1") == 1.0);
    CHECK_THROWS_AS((void)posterior_model_probs(chain_with_patterns({"0", "1"}), 2), std::invalid_argument);
}

TEST_CASE("decisions are invariant to shifting the log-likelihood") {
    const CountSeries series = short_binomial_series();
    const auto evaluator = std::make_shared<const LikelihoodEvaluator>(series, Family::binomial(15));
    SamplerConfig cfg;
    cfg.iters = 1500;
    cfg.seed = 33;
    const ModelShape shape{0, 3, 3};
    const auto names = shape.names();

    const ModelContext plain{[&](const ParamState& p) { return (*evaluator)(p); }, {}, cfg.priors, cfg.rj_scale,
                             cfg.rw_scale};
    const ModelContext shifted{[&](const ParamState& p) { return (*evaluator)(p) + 1234.5; }, {}, cfg.priors,
                               cfg.rj_scale, cfg.rw_scale};
    const auto a = run_chain(shape, names, plain, cfg);
    const auto b = run_chain(shape, names, shifted, cfg);
    CHECK(a.indicators == b.indicators);
    CHECK(a.draws == b.draws);
    for (std::size_t i = 0; i < a.dim; ++i) {
        CHECK(a.counters[i].rj_accepted == b.counters[i].rj_accepted);
        CHECK(a.counters[i].rw_accepted == b.counters[i].rw_accepted);
    }

    const auto c = run_chain(series, Family::binomial(15), cfg);
    CHECK(c.draws == a.draws);
    CHECK(c.indicators == a.indicators);
}

TEST_CASE("identical inputs give identical chains") {
    SamplerConfig cfg;
    cfg.iters = 1000;
    cfg.seed = 5;
    const auto series = short_binomial_series();
    const auto a = run_chain(series, Family::binomial(15), cfg);
    const auto b = run_chain(series, Family::binomial(15), cfg);
    CHECK(a.draws == b.draws);
    CHECK(a.indicators == b.indicators);
    cfg.seed = 6;
    const auto c = run_chain(series, Family::binomial(15), cfg);
    CHECK(a.draws != c.draws);
}

TEST_CASE("always-included coefficients and configuration checks") {
    const auto names = ModelShape{1, 2, 1}.names({"trend"});
    CHECK(toggleable_indices(names, {"alpha"}) == std::vector<std::size_t>{1, 2, 3, 4});
    CHECK(toggleable_indices(names, {"alpha", "beta_trend"}) == std::vector<std::size_t>{2, 3, 4});
    CHECK(toggleable_indices(names, {}).size() == 5);
    CHECK_THROWS_AS((void)toggleable_indices(names, {"gamma"}), std::invalid_argument);

    SamplerConfig cfg = prior_config(200, 3);
    cfg.always_included = {"alpha", "phi2"};
    const auto chain = run_chain(short_binomial_series(), Family::binomial(15), cfg);
    CHECK(chain.toggleable.size() == 5);
    CHECK(chain.counters[2].rj_proposed == 0);
    CHECK(chain.counters[2].rw_proposed == 200);

    SamplerConfig bad;
    bad.rj_scale = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SamplerConfig{};
    bad.iters = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SamplerConfig{};
    bad.priors.inc_prob = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("alpha can be toggled when not always included") {
    SamplerConfig cfg = prior_config(20000, 8);
    cfg.p_max = 0;
    cfg.q_max = 0;
    cfg.rj_scale = 0.3;
    cfg.always_included = {};
    const auto chain = run_chain(CountSeries{}, Family::poisson(), cfg);
    REQUIRE(chain.toggleable == std::vector<std::size_t>{0});
    const auto probs = posterior_model_probs(chain);
    CHECK(std::abs(probs.at("1") - 0.5) < 0.03);
}
