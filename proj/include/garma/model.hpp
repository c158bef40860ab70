#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace garma {

/// Conditional distribution of Y_t given the past.
enum class FamilyKind { Poisson, Binomial, NegBinomial };

/**
 * @brief Conditional family with its fixed hyperparameter.
 *
 * Binomial carries the number of trials m, NegBinomial the size k.
 * Use the named constructors; they validate the hyperparameter.
 */
struct Family {
    FamilyKind kind = FamilyKind::Poisson;
    std::int64_t m = 0;  // Binomial trials, 0 otherwise
    double k = 0.0;      // NegBinomial size, 0 otherwise

    static Family poisson();
    static Family binomial(std::int64_t trials);
    static Family negbinomial(double size);

    [[nodiscard]] std::string name() const;
};

/// Parse "poisson", "binomial" or "negbinomial".
FamilyKind parse_family_kind(const std::string& text);

/**
 * @brief Observed counts, covariates and the clipping constant.
 *
 * Covariates are stored row-major: x(t, j) = covariates[t * r + j] for the
 * zero-based observation t.
 */
struct CountSeries {
    std::vector<std::int64_t> y;
    std::vector<double> covariates;
    std::size_t num_covariates = 0;
    std::vector<std::string> covariate_names;
    double c = 0.3;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    [[nodiscard]] double x(std::size_t t, std::size_t j) const noexcept {
        return covariates[t * num_covariates + j];
    }

    /// Throws std::invalid_argument when an invariant is broken.
    void validate() const;
    /// Additionally checks the data support of the family (y <= m for Binomial).
    void validate_for(const Family& family) const;
};

/// Kind of a coefficient in the linear predictor.
enum class CoeffKind { Alpha, Beta, Phi, Theta };

/**
 * @brief Layout of the coefficient vector (alpha, beta_1..r, phi_1..p, theta_1..q).
 */
struct ModelShape {
    std::size_t r = 0;
    std::size_t p = 0;
    std::size_t q = 0;

    [[nodiscard]] std::size_t dim() const noexcept { return 1 + r + p + q; }
    [[nodiscard]] std::size_t beta_index(std::size_t j) const noexcept { return 1 + j; }
    [[nodiscard]] std::size_t phi_index(std::size_t j) const noexcept { return 1 + r + j; }
    [[nodiscard]] std::size_t theta_index(std::size_t j) const noexcept { return 1 + r + p + j; }
    [[nodiscard]] CoeffKind kind(std::size_t index) const noexcept;

    /// Names: alpha, beta_<covariate> (or beta1..), phi1.., theta1..
    [[nodiscard]] std::vector<std::string> names(
        const std::vector<std::string>& covariate_names = {}) const;

    friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/**
 * @brief One point in the union model space.
 *
 * Invariant: a coefficient that is not included holds exactly 0.
 */
class ParamState {
public:
    ParamState() = default;
    /// All coefficients zero; alpha included, everything else excluded.
    explicit ParamState(ModelShape shape);

    [[nodiscard]] const ModelShape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t dim() const noexcept { return values_.size(); }

    [[nodiscard]] double value(std::size_t i) const noexcept { return values_[i]; }
    [[nodiscard]] bool included(std::size_t i) const noexcept { return included_[i] != 0; }

    [[nodiscard]] double alpha() const noexcept { return values_[0]; }
    [[nodiscard]] double beta(std::size_t j) const noexcept { return values_[shape_.beta_index(j)]; }
    [[nodiscard]] double phi(std::size_t j) const noexcept { return values_[shape_.phi_index(j)]; }
    [[nodiscard]] double theta(std::size_t j) const noexcept { return values_[shape_.theta_index(j)]; }

    /// Includes coefficient i with the given value.
    void include(std::size_t i, double v);
    /// Excludes coefficient i and zeroes it.
    void exclude(std::size_t i) noexcept;
    /// Sets the value of an included coefficient.
    void set(std::size_t i, double v);

    ParamState& with_alpha(double v);
    ParamState& with_beta(std::size_t j, double v);
    ParamState& with_phi(std::size_t j, double v);
    ParamState& with_theta(std::size_t j, double v);

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    friend bool operator==(const ParamState&, const ParamState&) = default;

private:
    ModelShape shape_{};
    std::vector<double> values_;
    std::vector<std::uint8_t> included_;
};

/// Linear predictors, conditional means and working residuals along the series.
struct MuPath {
    std::vector<double> eta;
    std::vector<double> mu;
    std::vector<double> resid;
};

/// Raised when the linear predictor stops being finite.
class EvaluationError : public std::runtime_error {
public:
    EvaluationError(std::size_t t, const std::string& what)
        : std::runtime_error(what), t_(t) {}
    /// One-based time index of the first non-finite predictor.
    [[nodiscard]] std::size_t t() const noexcept { return t_; }

private:
    std::size_t t_;
};

/// Y* = max(y, c).
[[nodiscard]] double clip(std::int64_t y, double c) noexcept;

/// Inverse link of the family: exp for Poisson/NegBinomial, m * logistic for Binomial.
[[nodiscard]] double inverse_link(const Family& family, double eta) noexcept;

/**
 * @brief Runs the GARMA predictor recursion over the series.
 *
 * eta_t = alpha + x_t'beta + sum_j phi_j [log Y*_{t-j} - x_{t-j}'beta] + sum_j theta_j r_{t-j}
 * with every term whose index t-j falls before the sample contributing zero.
 *
 * @throws EvaluationError if some eta_t is not finite.
 */
[[nodiscard]] MuPath mu_path(const ParamState& params, const CountSeries& series,
                             const Family& family);

/**
 * @brief Exact conditional log-likelihood, normalizing constants included.
 *
 * Returns -infinity when some pmf term underflows to zero.
 * @throws EvaluationError if the predictor recursion diverges.
 */
[[nodiscard]] double log_likelihood(const ParamState& params, const CountSeries& series,
                                    const Family& family);

/// log f(y; mu) for a single observation under the family.
[[nodiscard]] double log_pmf(const Family& family, std::int64_t y, double mu);

/**
 * @brief Allocation-light likelihood evaluator bound to one series.
 *
 * Precomputes log Y* and the normalizing constants once so repeated
 * evaluation inside a chain only runs the recursion. Evaluation never
 * throws: divergence is reported through Result::failed_at.
 */
class LikelihoodEvaluator {
public:
    struct Result {
        double value = 0.0;
        std::size_t failed_at = 0;  // one-based t of a non-finite eta, 0 when fine
        [[nodiscard]] bool ok() const noexcept { return failed_at == 0; }
    };

    LikelihoodEvaluator(CountSeries series, Family family);

    [[nodiscard]] Result evaluate(const ParamState& params) const;
    /// evaluate() with divergence mapped to -infinity.
    [[nodiscard]] double operator()(const ParamState& params) const;
    /**
     * Like operator(), but may stop early and return -infinity once the
     * log-likelihood is certain to fall below `floor`. Every observation
     * contributes a log-probability <= 0, so partial sums bound the total.
     */
    [[nodiscard]] double bounded(const ParamState& params, double floor) const;

    [[nodiscard]] const CountSeries& series() const noexcept { return series_; }
    [[nodiscard]] const Family& family() const noexcept { return family_; }

private:
    [[nodiscard]] Result evaluate_until(const ParamState& params, double floor) const;

    CountSeries series_;
    Family family_;
    std::vector<double> log_ystar_;
    std::vector<double> log_norm_;  // per-observation normalizing constant
    double log_m_ = 0.0;
};

}  // namespace garma
