#include "garma/model.hpp"
#include "garma/prior.hpp"
#include "oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace garma;

namespace {

CountSeries series_of(std::vector<std::int64_t> y, double c = 0.3) {
    CountSeries s;
    s.y = std::move(y);
    s.c = c;
    return s;
}

ParamState random_model(std::mt19937_64& rng, std::size_t r, std::size_t p, std::size_t q) {
    std::uniform_real_distribution<double> coef(-0.45, 0.45);
    std::bernoulli_distribution keep(0.6);
    ParamState par(ModelShape{r, p, q});
    par.with_alpha(std::uniform_real_distribution<double>(-1.0, 1.0)(rng));
    for (std::size_t j = 0; j < r; ++j)
        if (keep(rng)) par.with_beta(j, 0.3 * coef(rng));
    for (std::size_t j = 0; j < p; ++j)
        if (keep(rng)) par.with_phi(j, coef(rng));
    for (std::size_t j = 0; j < q; ++j)
        if (keep(rng)) par.with_theta(j, coef(rng));
    return par;
}

Family random_family(std::mt19937_64& rng) {
    switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
        case 0: return Family::poisson();
        case 1: return Family::binomial(std::uniform_int_distribution<std::int64_t>(1, 40)(rng));
        default: return Family::negbinomial(std::uniform_real_distribution<double>(0.5, 20.0)(rng));
    }
}

CountSeries random_series(std::mt19937_64& rng, const Family& f, std::size_t n, std::size_t r) {
    CountSeries s;
    for (std::size_t t = 0; t < n; ++t) {
        std::int64_t y = std::uniform_int_distribution<std::int64_t>(0, 12)(rng);
        if (f.kind == FamilyKind::Binomial) y = std::min<std::int64_t>(y, f.m);
        s.y.push_back(y);
    }
    s.num_covariates = r;
    for (std::size_t i = 0; i < n * r; ++i) s.covariates.push_back(std::normal_distribution<double>()(rng));
    s.c = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
    return s;
}

}  // namespace

TEST_CASE("clip floors at c") {
    CHECK(clip(0, 0.3) == doctest::Approx(0.3));
    CHECK(clip(5, 0.3) == 5.0);
    CHECK(clip(1, 0.999) == 1.0);
}

TEST_CASE("mu_path hand-unrolled cases") {
    SUBCASE("no dynamics") {
        ParamState par(ModelShape{0, 0, 0});
        par.with_alpha(0.5);
        const auto path = mu_path(par, series_of({1, 4, 0, 2}), Family::poisson());
        for (std::size_t t = 0; t < 4; ++t) {
            CHECK(path.eta[t] == doctest::Approx(0.5));
            CHECK(path.mu[t] == doctest::Approx(1.64872).epsilon(1e-5));
        }
    }
    SUBCASE("AR(1) with unit coefficient") {
        ParamState par(ModelShape{0, 1, 0});
        par.with_alpha(0.0).with_phi(0, 1.0);
        const auto path = mu_path(par, series_of({2, 5}), Family::poisson());
        CHECK(path.eta[0] == 0.0);
        CHECK(path.eta[1] == doctest::Approx(std::log(2.0)));
        CHECK(path.mu[1] == doctest::Approx(2.0));
    }
    SUBCASE("MA(1)") {
        ParamState par(ModelShape{0, 0, 1});
        par.with_alpha(0.0).with_theta(0, 0.5);
        const auto path = mu_path(par, series_of({3, 1}), Family::poisson());
        CHECK(path.eta[0] == 0.0);
        CHECK(path.mu[0] == doctest::Approx(1.0));
        CHECK(path.resid[0] == doctest::Approx(std::log(3.0)));
        CHECK(path.eta[1] == doctest::Approx(0.5 * std::log(3.0)));
        CHECK(path.mu[1] == doctest::Approx(1.73205).epsilon(1e-5));
    }
    SUBCASE("AR term subtracts the covariate effect at the lagged time") {
        CountSeries s = series_of({4, 0, 2});
        s.num_covariates = 1;
        s.covariates = {1.0, 2.0, 3.0};
        ParamState par(ModelShape{1, 1, 0});
        par.with_alpha(0.1).with_beta(0, 0.2).with_phi(0, 0.5);
        const auto path = mu_path(par, s, Family::poisson());
        CHECK(path.eta[0] == doctest::Approx(0.1 + 0.2));
        CHECK(path.eta[1] == doctest::Approx(0.1 + 0.4 + 0.5 * (std::log(4.0) - 0.2)));
        CHECK(path.eta[2] == doctest::Approx(0.1 + 0.6 + 0.5 * (std::log(0.3) - 0.4)));
    }
}

TEST_CASE("log_likelihood worked values") {
    ParamState par(ModelShape{0, 0, 0});
    par.with_alpha(0.0);
    CHECK(log_likelihood(par, series_of({1, 1}), Family::poisson()) == doctest::Approx(-2.0));
    CHECK(log_likelihood(par, series_of({0}), Family::poisson()) == doctest::Approx(-1.0));
    CHECK(log_likelihood(par, series_of({2}), Family::negbinomial(1.0)) ==
          doctest::Approx(std::log(0.125)).epsilon(1e-12));
    CHECK(log_likelihood(par, series_of({}), Family::poisson()) == 0.0);
}

TEST_CASE("log_prior worked values") {
    PriorSpec priors;
    ParamState par(ModelShape{0, 3, 3});
    const double at_zero = std::log(1.0 / (0.3 * std::sqrt(2.0 * M_PI)));
    CHECK(at_zero == doctest::Approx(0.285034).epsilon(1e-6));
    CHECK(log_prior(par, priors) == doctest::Approx(at_zero).epsilon(1e-12));
    par.with_alpha(0.3);
    CHECK(log_prior(par, priors) == doctest::Approx(at_zero - 0.5).epsilon(1e-12));
    par.with_phi(1, 0.1);
    CHECK(log_prior(par, priors) ==
          doctest::Approx(at_zero - 0.5 + std::log(1.0 / (0.2 * std::sqrt(2.0 * M_PI))) - 0.125).epsilon(1e-12));

    PriorSpec unit{1.0, 1.0, 1.0, 1.0, 0.5};
    ParamState all(ModelShape{2, 3, 3});
    for (std::size_t i = 0; i < all.dim(); ++i) all.include(i, 0.0);
    CHECK(log_prior(all, unit) == doctest::Approx(-9 * 0.918939).epsilon(1e-6));
}

TEST_CASE("constant mean without dynamics") {
    std::mt19937_64 rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        const Family f = random_family(rng);
        ParamState par(ModelShape{0, 2, 2});
        const double alpha = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        par.with_alpha(alpha);
        const auto s = random_series(rng, f, 30, 0);
        const auto path = mu_path(par, s, f);
        for (double mu : path.mu) CHECK(mu == doctest::Approx(inverse_link(f, alpha)).epsilon(1e-14));
    }
}

TEST_CASE("recursion matches a naive rebuild") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 300; ++rep) {
        const Family f = random_family(rng);
        const std::size_t r = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
        const std::size_t p = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
        const std::size_t q = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
        const auto s = random_series(rng, f, std::uniform_int_distribution<std::size_t>(1, 50)(rng), r);
        const auto par = random_model(rng, r, p, q);
        const auto path = mu_path(par, s, f);
        const auto ref = oracle::naive_path(par, s, f);
        for (std::size_t t = 0; t < s.size(); ++t) {
            CHECK(std::abs(path.eta[t] - ref.eta[t]) <= 1e-12);
            CHECK(std::abs(path.mu[t] - ref.mu[t]) <= 1e-12 * std::max(1.0, ref.mu[t]));
        }
        const double ll = log_likelihood(par, s, f);
        CHECK(std::abs(ll - oracle::log_likelihood(par, s, f)) <= 1e-10);
        double by_pmf = 0.0;
        for (std::size_t t = 0; t < s.size(); ++t) by_pmf += log_pmf(f, s.y[t], path.mu[t]);
        CHECK(std::abs(ll - by_pmf) <= 1e-10);
    }
}

TEST_CASE("binomial means stay inside (0, m)") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 100; ++rep) {
        const Family f = Family::binomial(std::uniform_int_distribution<std::int64_t>(1, 50)(rng));
        const auto s = random_series(rng, f, 40, 0);
        auto par = random_model(rng, 0, 3, 3);
        par.with_alpha(std::uniform_real_distribution<double>(-20.0, 20.0)(rng));
        const auto path = mu_path(par, s, f);
        for (double mu : path.mu) {
            CHECK(mu > 0.0);
            CHECK(mu < static_cast<double>(f.m));
        }
    }
}

TEST_CASE("negative binomial tends to Poisson for large k") {
    std::mt19937_64 rng(14);
    for (int rep = 0; rep < 20; ++rep) {
        CountSeries s;
        std::poisson_distribution<std::int64_t> draw(5.0);
        for (int t = 0; t < 40; ++t) s.y.push_back(std::min<std::int64_t>(draw(rng), 20));
        auto par = random_model(rng, 0, 2, 2);
        par.with_alpha(std::log(5.0) * 0.6);
        const double pois = log_likelihood(par, s, Family::poisson());
        const double nb = log_likelihood(par, s, Family::negbinomial(1e6));
        CHECK(std::abs(nb - pois) < 1e-3);
    }
}

TEST_CASE("divergence and boundary handling") {
    SUBCASE("non-finite predictor reports its time index") {
        ParamState par(ModelShape{0, 1, 0});
        par.with_alpha(1e308).with_phi(0, 1e308);
        const auto s = series_of({5, 5, 5});
        try {
            (void)mu_path(par, s, Family::poisson());
            FAIL("expected an evaluation error");
        } catch (const EvaluationError& e) {
            CHECK(e.t() == 2);
        }
        CHECK_THROWS_AS((void)log_likelihood(par, s, Family::poisson()), EvaluationError);
        const LikelihoodEvaluator eval(s, Family::poisson());
        CHECK(eval.evaluate(par).failed_at == 2);
        CHECK(eval(par) == -std::numeric_limits<double>::infinity());
    }
    SUBCASE("overflowing mean gives the -inf sentinel") {
        ParamState par(ModelShape{0, 0, 0});
        par.with_alpha(800.0);
        CHECK(log_likelihood(par, series_of({1}), Family::poisson()) ==
              -std::numeric_limits<double>::infinity());
    }
    SUBCASE("shape mismatch") {
        ParamState par(ModelShape{1, 0, 0});
        CHECK_THROWS_AS((void)mu_path(par, series_of({1}), Family::poisson()), std::invalid_argument);
    }
}

TEST_CASE("bounded evaluation agrees with the full value") {
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 100; ++rep) {
        const Family f = random_family(rng);
        const auto s = random_series(rng, f, 50, 1);
        const auto par = random_model(rng, 1, 3, 3);
        const LikelihoodEvaluator eval(s, f);
        const double full = eval(par);
        CHECK(eval.bounded(par, full - 1.0) == full);
        CHECK(eval.bounded(par, -std::numeric_limits<double>::infinity()) == full);
        CHECK(eval.bounded(par, full + 1.0) <= full);
    }
}

TEST_CASE("family and series validation") {
    CHECK_THROWS_AS(Family::binomial(0), std::invalid_argument);
    CHECK_THROWS_AS(Family::negbinomial(0.0), std::invalid_argument);
    CHECK(parse_family_kind("negbinomial") == FamilyKind::NegBinomial);
    CHECK_THROWS_AS(parse_family_kind("gaussian"), std::invalid_argument);
    CHECK_THROWS_AS(series_of({16}).validate_for(Family::binomial(15)), std::invalid_argument);
    CHECK_THROWS_AS(series_of({-1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(series_of({1}, 1.0).validate(), std::invalid_argument);
}

TEST_CASE("parameter layout and names") {
    const ModelShape shape{2, 3, 1};
    CHECK(shape.dim() == 7);
    CHECK(shape.kind(0) == CoeffKind::Alpha);
    CHECK(shape.kind(2) == CoeffKind::Beta);
    CHECK(shape.kind(3) == CoeffKind::Phi);
    CHECK(shape.kind(6) == CoeffKind::Theta);
    const auto names = shape.names({"trend", "logtrend"});
    CHECK(names == std::vector<std::string>{"alpha", "beta_trend", "beta_logtrend", "phi1", "phi2", "phi3", "theta1"});

    ParamState par(shape);
    CHECK(par.included(0));
    CHECK_FALSE(par.included(3));
    CHECK_THROWS_AS(par.set(3, 1.0), std::logic_error);
    par.with_phi(0, 0.2);
    CHECK(par.included(3));
    par.with_phi(0, 0.0);
    CHECK_FALSE(par.included(3));
    CHECK(par.value(3) == 0.0);
}
