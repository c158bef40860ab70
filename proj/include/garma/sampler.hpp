#pragma once

#include "garma/model.hpp"
#include "garma/prior.hpp"
#include "garma/random.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace garma {

/// Settings of one reversible-jump chain.
struct SamplerConfig {
    std::size_t p_max = 3;
    std::size_t q_max = 3;
    PriorSpec priors{};
    double rj_scale = 5.0;   // sd of the birth proposal
    double rw_scale = 0.1;   // sd of the within-model random walk
    std::size_t iters = 30000;
    std::uint64_t seed = 1;
    std::set<std::string> always_included{"alpha"};

    void validate() const;
};

/**
 * @brief Everything a move needs besides the state: target, priors, scales.
 *
 * The likelihood returns -infinity for states it cannot evaluate; such
 * proposals are rejected.
 */
struct ModelContext {
    std::function<double(const ParamState&)> log_likelihood;
    /// Optional. May return -infinity as soon as the value is known to be below the floor.
    std::function<double(const ParamState&, double)> bounded_log_likelihood;
    PriorSpec priors;
    double rj_scale = 5.0;
    double rw_scale = 0.1;
};

/// Current parameters with their cached log-likelihood.
struct ChainState {
    ParamState params;
    double loglik = 0.0;
};

/// Accept/propose tallies for one coefficient.
struct MoveCounters {
    std::uint64_t rj_proposed = 0;
    std::uint64_t rj_accepted = 0;
    std::uint64_t rw_proposed = 0;
    std::uint64_t rw_accepted = 0;
};

/**
 * @brief Recorded draws of a chain.
 *
 * draws is row-major iterations x dim; indicators is row-major
 * iterations x toggleable().size(). Excluded coefficients are recorded as 0.
 */
struct ChainOutput {
    std::vector<std::string> names;
    std::vector<std::size_t> toggleable;  // coefficient indices that carry an indicator
    std::size_t dim = 0;
    std::size_t rows = 0;
    std::vector<double> draws;
    std::vector<std::uint8_t> indicators;
    std::vector<MoveCounters> counters;  // one per coefficient
    SamplerConfig meta;
    std::size_t n_burn = 0;  // rows dropped by burn()
    std::size_t thin_lag = 1;

    [[nodiscard]] double draw(std::size_t row, std::size_t coeff) const noexcept {
        return draws[row * dim + coeff];
    }
    [[nodiscard]] bool indicator(std::size_t row, std::size_t slot) const noexcept {
        return indicators[row * toggleable.size() + slot] != 0;
    }
    /// All draws of one coefficient, in row order.
    [[nodiscard]] std::vector<double> column(std::size_t coeff) const;
    /// Inclusion pattern of a row as a string of '0'/'1' over the toggleable coefficients.
    [[nodiscard]] std::string pattern(std::size_t row) const;
    /// Whether coefficient `coeff` carries an indicator.
    [[nodiscard]] bool is_toggleable(std::size_t coeff) const noexcept;
};

/// Coefficient indices not in `always_included`, given the model names.
[[nodiscard]] std::vector<std::size_t> toggleable_indices(const std::vector<std::string>& names,
                                                          const std::set<std::string>& always_included);

/**
 * @brief Birth/death move on one coefficient.
 *
 * An excluded coefficient is proposed at v ~ N(0, rj_scale^2) and accepted
 * with probability min{1, L(cand)/L(cur) * pi0(v) * w / N(v; 0, rj_scale^2)},
 * w = inc_prob/(1-inc_prob). An included coefficient is proposed for removal
 * with the reciprocal ratio. A uniform is always drawn so that the RNG stream
 * does not depend on the ratio.
 *
 * @return whether the move was accepted
 */
bool rj_toggle_step(ChainState& state, std::size_t coeff, const ModelContext& ctx, Rng& rng);

/// Symmetric random-walk Metropolis update of an included coefficient.
bool rw_update_step(ChainState& state, std::size_t coeff, const ModelContext& ctx, Rng& rng);

/**
 * @brief Runs the sampler against an arbitrary likelihood.
 *
 * Starts from the all-zero state with only always-included coefficients in
 * the model. Each iteration makes as many birth/death proposals as there are
 * toggleable coefficients, each on a coefficient drawn uniformly with
 * replacement, then one random-walk update of every included coefficient in
 * shuffled order.
 */
[[nodiscard]] ChainOutput run_chain(const ModelShape& shape, const std::vector<std::string>& names,
                                    const ModelContext& ctx, const SamplerConfig& config);

/// Runs the sampler on a count series.
[[nodiscard]] ChainOutput run_chain(const CountSeries& series, const Family& family,
                                    const SamplerConfig& config);

/**
 * @brief Relative frequency of each inclusion pattern after `burn` rows.
 * @throws std::invalid_argument when no rows remain
 */
[[nodiscard]] std::map<std::string, double> posterior_model_probs(const ChainOutput& chain,
                                                                  std::size_t burn = 0);

}  // namespace garma
