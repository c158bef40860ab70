#include "garma/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>

namespace garma {

namespace {

double log_inclusion_odds(double inc_prob) noexcept {
    return std::log(inc_prob) - std::log1p(-inc_prob);
}

double draw_log_uniform(Rng& rng) {
    return std::log(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
}

// Candidate log-likelihood. Accepting requires cand > current + log_u - rest,
// so a bounded evaluator may give up below that floor.
double candidate_loglik(const ModelContext& ctx, const ParamState& cand, double floor) {
    if (ctx.bounded_log_likelihood && std::isfinite(floor)) return ctx.bounded_log_likelihood(cand, floor);
    return ctx.log_likelihood(cand);
}

bool accept(double log_ratio, double cand_loglik, double log_u) {
    if (!std::isfinite(cand_loglik) || std::isnan(log_ratio)) return false;
    return log_u < log_ratio;
}

}  // namespace

void SamplerConfig::validate() const {
    priors.validate();
    if (iters < 1) throw std::invalid_argument("iters must be at least 1");
    if (!(rj_scale > 0.0) || !std::isfinite(rj_scale)) throw std::invalid_argument("rj_scale must be positive");
    if (!(rw_scale > 0.0) || !std::isfinite(rw_scale)) throw std::invalid_argument("rw_scale must be positive");
}

std::vector<double> ChainOutput::column(std::size_t coeff) const {
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) out[i] = draws[i * dim + coeff];
    return out;
}

std::string ChainOutput::pattern(std::size_t row) const {
    std::string out(toggleable.size(), '0');
    for (std::size_t k = 0; k < toggleable.size(); ++k)
        if (indicator(row, k)) out[k] = '1';
    return out;
}

bool ChainOutput::is_toggleable(std::size_t coeff) const noexcept {
    return std::find(toggleable.begin(), toggleable.end(), coeff) != toggleable.end();
}

std::vector<std::size_t> toggleable_indices(const std::vector<std::string>& names,
                                            const std::set<std::string>& always_included) {
    for (const auto& name : always_included)
        if (std::find(names.begin(), names.end(), name) == names.end())
            throw std::invalid_argument("unknown coefficient '" + name + "' in always-included set");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (!always_included.contains(names[i])) out.push_back(i);
    return out;
}

bool rj_toggle_step(ChainState& state, std::size_t coeff, const ModelContext& ctx, Rng& rng) {
    const double prior_sd = ctx.priors.sd_for(state.params.shape().kind(coeff));
    const double log_odds = log_inclusion_odds(ctx.priors.inc_prob);
    ParamState cand = state.params;
    double log_ratio = 0.0;
    double cand_loglik = 0.0;

    double log_u = 0.0;
    if (!state.params.included(coeff)) {
        const double v = std::normal_distribution<double>(0.0, ctx.rj_scale)(rng);
        log_u = draw_log_uniform(rng);
        cand.include(coeff, v);
        const double rest = log_normal_density(v, prior_sd) + log_odds - log_normal_density(v, ctx.rj_scale);
        cand_loglik = candidate_loglik(ctx, cand, state.loglik + log_u - rest);
        log_ratio = (cand_loglik - state.loglik) + rest;
    } else {
        const double v = state.params.value(coeff);
        log_u = draw_log_uniform(rng);
        cand.exclude(coeff);
        const double rest = -log_normal_density(v, prior_sd) - log_odds + log_normal_density(v, ctx.rj_scale);
        cand_loglik = candidate_loglik(ctx, cand, state.loglik + log_u - rest);
        log_ratio = (cand_loglik - state.loglik) + rest;
    }

    if (!accept(log_ratio, cand_loglik, log_u)) return false;
    state.params = std::move(cand);
    state.loglik = cand_loglik;
    return true;
}

bool rw_update_step(ChainState& state, std::size_t coeff, const ModelContext& ctx, Rng& rng) {
    if (!state.params.included(coeff)) throw std::logic_error("random-walk update of an excluded coefficient");
    const double prior_sd = ctx.priors.sd_for(state.params.shape().kind(coeff));
    const double v = state.params.value(coeff);
    const double v_new = v + std::normal_distribution<double>(0.0, ctx.rw_scale)(rng);

    const double log_u = draw_log_uniform(rng);

    ParamState cand = state.params;
    cand.set(coeff, v_new);
    const double rest = log_normal_density(v_new, prior_sd) - log_normal_density(v, prior_sd);
    const double cand_loglik = candidate_loglik(ctx, cand, state.loglik + log_u - rest);
    const double log_ratio = (cand_loglik - state.loglik) + rest;

    if (!accept(log_ratio, cand_loglik, log_u)) return false;
    state.params = std::move(cand);
    state.loglik = cand_loglik;
    return true;
}

ChainOutput run_chain(const ModelShape& shape, const std::vector<std::string>& names,
                      const ModelContext& ctx, const SamplerConfig& config) {
    config.validate();
    if (names.size() != shape.dim()) throw std::invalid_argument("one name per coefficient is required");
    if (shape.p != config.p_max || shape.q != config.q_max)
        throw std::invalid_argument("model shape does not match p_max/q_max");

    ChainOutput out;
    out.names = names;
    out.dim = shape.dim();
    out.toggleable = toggleable_indices(names, config.always_included);
    out.counters.assign(out.dim, MoveCounters{});
    out.meta = config;
    out.rows = config.iters;
    out.draws.reserve(config.iters * out.dim);
    out.indicators.reserve(config.iters * out.toggleable.size());

    ChainState state{ParamState(shape), 0.0};
    for (std::size_t i = 0; i < out.dim; ++i) {
        if (out.is_toggleable(i)) state.params.exclude(i);
        else state.params.include(i, 0.0);
    }
    state.loglik = ctx.log_likelihood(state.params);
    if (!std::isfinite(state.loglik))
        throw std::runtime_error("log-likelihood of the initial all-zero state is not finite");

    Rng rng(config.seed);
    const std::size_t n_toggle = out.toggleable.size();
    std::vector<std::size_t> active;
    active.reserve(out.dim);

    for (std::size_t it = 0; it < config.iters; ++it) {
        if (n_toggle > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, n_toggle - 1);
            for (std::size_t k = 0; k < n_toggle; ++k) {
                const std::size_t coeff = out.toggleable[pick(rng)];
                auto& counter = out.counters[coeff];
                ++counter.rj_proposed;
                if (rj_toggle_step(state, coeff, ctx, rng)) ++counter.rj_accepted;
            }
        }

        active.clear();
        for (std::size_t i = 0; i < out.dim; ++i)
            if (state.params.included(i)) active.push_back(i);
        std::shuffle(active.begin(), active.end(), rng);
        for (std::size_t coeff : active) {
            auto& counter = out.counters[coeff];
            ++counter.rw_proposed;
            if (rw_update_step(state, coeff, ctx, rng)) ++counter.rw_accepted;
        }

        const auto& values = state.params.values();
        out.draws.insert(out.draws.end(), values.begin(), values.end());
        for (std::size_t coeff : out.toggleable)
            out.indicators.push_back(state.params.included(coeff) ? 1 : 0);
    }
    return out;
}

ChainOutput run_chain(const CountSeries& series, const Family& family, const SamplerConfig& config) {
    const ModelShape shape{series.num_covariates, config.p_max, config.q_max};
    auto evaluator = std::make_shared<const LikelihoodEvaluator>(series, family);
    ModelContext ctx{[evaluator](const ParamState& params) { return (*evaluator)(params); },
                     [evaluator](const ParamState& params, double floor) { return evaluator->bounded(params, floor); },
                     config.priors, config.rj_scale, config.rw_scale};
    return run_chain(shape, shape.names(series.covariate_names), ctx, config);
}

std::map<std::string, double> posterior_model_probs(const ChainOutput& chain, std::size_t burn) {
    if (burn >= chain.rows) throw std::invalid_argument("no iterations remain after burn-in");
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = burn; i < chain.rows; ++i) ++counts[chain.pattern(i)];
    const double total = static_cast<double>(chain.rows - burn);
    std::map<std::string, double> out;
    for (const auto& [pattern, count] : counts) out[pattern] = static_cast<double>(count) / total;
    return out;
}

}  // namespace garma
