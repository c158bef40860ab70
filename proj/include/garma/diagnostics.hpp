#pragma once

#include "garma/model.hpp"
#include "garma/sampler.hpp"

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace garma {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    [[nodiscard]] double width() const noexcept { return hi - lo; }
};

enum class IntervalKind { Hpd, Quantile };

/// Drops the first n_burn rows. Throws when nothing would remain.
[[nodiscard]] ChainOutput burn(const ChainOutput& chain, std::size_t n_burn);

/// Keeps rows 0, lag, 2*lag, ...
[[nodiscard]] ChainOutput thin(const ChainOutput& chain, std::size_t lag);

/**
 * @brief Shortest window holding ceil(level * n) sorted draws.
 *
 * Ties go to the window with the smallest lower endpoint.
 */
[[nodiscard]] Interval hpd_interval(std::span<const double> sample, double level);

/// Type-7 (linear interpolation) empirical quantile of a sorted sample.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double prob);

/// Equal-tail interval from type-7 quantiles at (1-level)/2 and (1+level)/2.
[[nodiscard]] Interval quantile_interval(std::span<const double> sample, double level);

/**
 * @brief Spectral density at frequency zero from an autoregressive fit.
 *
 * Yule-Walker fit with the order picked by AIC over 0..floor(min(n-1, 10 log10 n)),
 * innovation variance rescaled by n/(n - order - 1), then
 * S(0) = sigma^2 / (1 - sum(ar))^2. Zero-variance samples give 0.
 */
[[nodiscard]] double spectrum_at_zero(std::span<const double> sample);

/// n * Var(sample) / S(0); 0 for a constant sample. Needs at least 10 draws.
[[nodiscard]] double effective_sample_size(std::span<const double> sample);

/**
 * @brief Geweke z-score of the first `frac_first` against the last `frac_last` of the chain.
 *
 * Segment variances are S(0)/n_segment. Returns nullopt when a segment has
 * zero variance. Throws when a segment holds fewer than 10 draws.
 */
[[nodiscard]] std::optional<double> geweke_z(std::span<const double> sample, double frac_first = 0.1,
                                             double frac_last = 0.5);

struct CoefficientSummary {
    std::string name;
    bool toggleable = false;
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    Interval hpd;
    Interval quantile;
    std::optional<double> ess;       // undefined below 10 draws
    std::optional<double> geweke_z;  // undefined for short or constant chains
    double incl_freq = 0.0;

    [[nodiscard]] const Interval& interval(IntervalKind kind) const noexcept {
        return kind == IntervalKind::Hpd ? hpd : quantile;
    }
};

struct PosteriorSummary {
    double level = 0.95;
    std::vector<CoefficientSummary> coefficients;
};

/// Per-coefficient summaries over every row, zeros from excluded iterations included.
[[nodiscard]] PosteriorSummary summarize(const ChainOutput& chain, double level = 0.95);

/**
 * @brief True iff each toggleable coefficient is classified correctly.
 *
 * A nonzero true value needs an interval excluding 0; a zero one needs an
 * interval containing 0.
 */
[[nodiscard]] bool classify_model(const PosteriorSummary& summary, const ParamState& truth,
                                  IntervalKind kind);

}  // namespace garma
