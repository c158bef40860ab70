#include "garma/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace garma {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(1 + e^x)
double softplus(double x) noexcept {
    return std::max(x, 0.0) + std::log(1.0 + std::exp(-std::fabs(x)));
}

double log_binomial_coefficient(std::int64_t m, std::int64_t y) {
    return std::lgamma(static_cast<double>(m) + 1.0) - std::lgamma(static_cast<double>(y) + 1.0) -
           std::lgamma(static_cast<double>(m - y) + 1.0);
}

// Drives the predictor recursion. `step(t, eta)` consumes eta and returns
// log mu_t. Returns the zero-based index of the first non-finite eta, or n
// when the whole path was computed.
template <typename Step>
std::size_t run_recursion(const ParamState& params, const CountSeries& series,
                          const std::vector<double>& log_ystar, Step&& step,
                          const bool* abort = nullptr) {
    const ModelShape& shape = params.shape();
    const std::size_t n = series.size();
    const std::size_t r = shape.r;

    thread_local std::vector<double> xb;
    thread_local std::vector<double> ar_target;
    thread_local std::vector<double> resid;

    // Only nonzero lags take part in the recursion.
    std::size_t ar_lag[64];
    double ar_coef[64];
    std::size_t ma_lag[64];
    double ma_coef[64];
    std::size_t n_ar = 0;
    std::size_t n_ma = 0;
    std::size_t max_lag = 0;
    for (std::size_t j = 0; j < shape.p && n_ar < 64; ++j)
        if (params.phi(j) != 0.0) {
            ar_lag[n_ar] = j + 1;
            ar_coef[n_ar++] = params.phi(j);
            max_lag = std::max(max_lag, j + 1);
        }
    for (std::size_t j = 0; j < shape.q && n_ma < 64; ++j)
        if (params.theta(j) != 0.0) {
            ma_lag[n_ma] = j + 1;
            ma_coef[n_ma++] = params.theta(j);
            max_lag = std::max(max_lag, j + 1);
        }
    if (shape.p > 64 || shape.q > 64) throw std::invalid_argument("orders above 64 are not supported");

    const double* lys = log_ystar.data();
    const double* target = lys;
    if (r > 0) {
        xb.assign(n, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            double s = 0.0;
            for (std::size_t j = 0; j < r; ++j) s += series.x(t, j) * params.beta(j);
            xb[t] = s;
        }
        if (n_ar > 0) {
            ar_target.resize(n);
            for (std::size_t t = 0; t < n; ++t) ar_target[t] = lys[t] - xb[t];
            target = ar_target.data();
        }
    }
    if (n_ma > 0) resid.assign(n, 0.0);
    double* res = resid.data();
    const double alpha = params.alpha();
    const double* xbp = r > 0 ? xb.data() : nullptr;

    auto one = [&](std::size_t t, bool head) -> bool {
        double eta = alpha + (xbp ? xbp[t] : 0.0);
        for (std::size_t i = 0; i < n_ar; ++i)
            if (!head || ar_lag[i] <= t) eta += ar_coef[i] * target[t - ar_lag[i]];
        for (std::size_t i = 0; i < n_ma; ++i)
            if (!head || ma_lag[i] <= t) eta += ma_coef[i] * res[t - ma_lag[i]];
        if (!std::isfinite(eta)) return false;
        const double lmu = step(t, eta);
        if (n_ma > 0) res[t] = lys[t] - lmu;
        return true;
    };
    const std::size_t head_end = std::min(max_lag, n);
    for (std::size_t t = 0; t < head_end; ++t)
        if (!one(t, true) || (abort && *abort)) return t;
    for (std::size_t t = head_end; t < n; ++t)
        if (!one(t, false) || (abort && *abort)) return t;
    return n;
}

void check_shape(const ParamState& params, const CountSeries& series) {
    if (params.dim() == 0) throw std::invalid_argument("parameter state is empty");
    if (params.shape().r != series.num_covariates)
        throw std::invalid_argument("parameter state has " + std::to_string(params.shape().r) +
                                    " covariate coefficients but the series has " +
                                    std::to_string(series.num_covariates) + " covariates");
}

std::vector<double> log_ystar_of(const CountSeries& series) {
    std::vector<double> out(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) out[t] = std::log(clip(series.y[t], series.c));
    return out;
}

}  // namespace

Family Family::poisson() { return Family{FamilyKind::Poisson, 0, 0.0}; }

Family Family::binomial(std::int64_t trials) {
    if (trials < 1) throw std::invalid_argument("binomial family needs m >= 1");
    return Family{FamilyKind::Binomial, trials, 0.0};
}

Family Family::negbinomial(double size) {
    if (!(size > 0.0) || !std::isfinite(size))
        throw std::invalid_argument("negative binomial family needs k > 0");
    return Family{FamilyKind::NegBinomial, 0, size};
}

std::string Family::name() const {
    switch (kind) {
        case FamilyKind::Poisson: return "poisson";
        case FamilyKind::Binomial: return "binomial";
        case FamilyKind::NegBinomial: return "negbinomial";
    }
    return "unknown";
}

FamilyKind parse_family_kind(const std::string& text) {
    if (text == "poisson") return FamilyKind::Poisson;
    if (text == "binomial") return FamilyKind::Binomial;
    if (text == "negbinomial") return FamilyKind::NegBinomial;
    throw std::invalid_argument("unknown family '" + text + "'");
}

void CountSeries::validate() const {
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("clipping constant must lie in (0,1)");
    if (covariates.size() != y.size() * num_covariates)
        throw std::invalid_argument("covariate matrix does not have one row per observation");
    if (!covariate_names.empty() && covariate_names.size() != num_covariates)
        throw std::invalid_argument("covariate names do not match the covariate count");
    for (std::size_t t = 0; t < y.size(); ++t)
        if (y[t] < 0)
            throw std::invalid_argument("negative count at t=" + std::to_string(t + 1));
    for (double v : covariates)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite covariate value");
}

void CountSeries::validate_for(const Family& family) const {
    validate();
    if (family.kind == FamilyKind::Binomial) {
        for (std::size_t t = 0; t < y.size(); ++t)
            if (y[t] > family.m)
                throw std::invalid_argument("count exceeds binomial m at t=" + std::to_string(t + 1));
    }
}

CoeffKind ModelShape::kind(std::size_t index) const noexcept {
    if (index == 0) return CoeffKind::Alpha;
    if (index < 1 + r) return CoeffKind::Beta;
    if (index < 1 + r + p) return CoeffKind::Phi;
    return CoeffKind::Theta;
}

std::vector<std::string> ModelShape::names(const std::vector<std::string>& covariate_names) const {
    std::vector<std::string> out;
    out.reserve(dim());
    out.emplace_back("alpha");
    for (std::size_t j = 0; j < r; ++j)
        out.push_back(covariate_names.size() == r ? "beta_" + covariate_names[j]
                                                  : "beta" + std::to_string(j + 1));
    for (std::size_t j = 0; j < p; ++j) out.push_back("phi" + std::to_string(j + 1));
    for (std::size_t j = 0; j < q; ++j) out.push_back("theta" + std::to_string(j + 1));
    return out;
}

ParamState::ParamState(ModelShape shape)
    : shape_(shape), values_(shape.dim(), 0.0), included_(shape.dim(), 0) {
    included_[0] = 1;
}

void ParamState::include(std::size_t i, double v) {
    values_.at(i) = v;
    included_[i] = 1;
}

void ParamState::exclude(std::size_t i) noexcept {
    values_[i] = 0.0;
    included_[i] = 0;
}

void ParamState::set(std::size_t i, double v) {
    if (!included_.at(i)) throw std::logic_error("cannot set an excluded coefficient");
    values_[i] = v;
}

ParamState& ParamState::with_alpha(double v) {
    include(0, v);
    return *this;
}

ParamState& ParamState::with_beta(std::size_t j, double v) {
    if (j >= shape_.r) throw std::out_of_range("beta index");
    if (v == 0.0) exclude(shape_.beta_index(j));
    else include(shape_.beta_index(j), v);
    return *this;
}

ParamState& ParamState::with_phi(std::size_t j, double v) {
    if (j >= shape_.p) throw std::out_of_range("phi index");
    if (v == 0.0) exclude(shape_.phi_index(j));
    else include(shape_.phi_index(j), v);
    return *this;
}

ParamState& ParamState::with_theta(std::size_t j, double v) {
    if (j >= shape_.q) throw std::out_of_range("theta index");
    if (v == 0.0) exclude(shape_.theta_index(j));
    else include(shape_.theta_index(j), v);
    return *this;
}

double clip(std::int64_t y, double c) noexcept { return std::max(static_cast<double>(y), c); }

double inverse_link(const Family& family, double eta) noexcept {
    if (family.kind == FamilyKind::Binomial)
        return static_cast<double>(family.m) / (1.0 + std::exp(-eta));
    return std::exp(eta);
}

MuPath mu_path(const ParamState& params, const CountSeries& series, const Family& family) {
    check_shape(params, series);
    const auto log_ystar = log_ystar_of(series);
    const double log_m =
        family.kind == FamilyKind::Binomial ? std::log(static_cast<double>(family.m)) : 0.0;

    MuPath path;
    const std::size_t n = series.size();
    path.eta.resize(n);
    path.mu.resize(n);
    path.resid.resize(n);
    const bool binomial = family.kind == FamilyKind::Binomial;
    const std::size_t stop = run_recursion(params, series, log_ystar, [&](std::size_t t, double eta) {
        const double lmu = binomial ? log_m - softplus(-eta) : eta;
        path.eta[t] = eta;
        path.mu[t] = inverse_link(family, eta);
        path.resid[t] = log_ystar[t] - lmu;
        return lmu;
    });
    if (stop != n)
        throw EvaluationError(stop + 1, "linear predictor is not finite at t=" + std::to_string(stop + 1));
    return path;
}

double log_pmf(const Family& family, std::int64_t y, double mu) {
    const double yd = static_cast<double>(y);
    switch (family.kind) {
        case FamilyKind::Poisson: {
            if (mu == 0.0) return y == 0 ? 0.0 : kNegInf;
            return yd * std::log(mu) - mu - std::lgamma(yd + 1.0);
        }
        case FamilyKind::Binomial: {
            const double m = static_cast<double>(family.m);
            if (y < 0 || y > family.m) return kNegInf;
            const double p = mu / m;
            const double a = y == 0 ? 0.0 : yd * std::log(p);
            const double b = y == family.m ? 0.0 : (m - yd) * std::log1p(-p);
            return a + b + log_binomial_coefficient(family.m, y);
        }
        case FamilyKind::NegBinomial: {
            const double k = family.k;
            const double a = -k * std::log1p(mu / k);
            const double b = y == 0 ? 0.0 : -yd * std::log1p(k / mu);
            return a + b + std::lgamma(k + yd) - std::lgamma(yd + 1.0) - std::lgamma(k);
        }
    }
    return kNegInf;
}

double log_likelihood(const ParamState& params, const CountSeries& series, const Family& family) {
    check_shape(params, series);
    const LikelihoodEvaluator evaluator(series, family);
    const auto result = evaluator.evaluate(params);
    if (!result.ok())
        throw EvaluationError(result.failed_at,
                              "linear predictor is not finite at t=" + std::to_string(result.failed_at));
    return result.value;
}

LikelihoodEvaluator::LikelihoodEvaluator(CountSeries series, Family family)
    : series_(std::move(series)), family_(family) {
    series_.validate_for(family_);
    log_ystar_ = log_ystar_of(series_);
    log_norm_.resize(series_.size());
    if (family_.kind == FamilyKind::Binomial) log_m_ = std::log(static_cast<double>(family_.m));
    for (std::size_t t = 0; t < series_.size(); ++t) {
        const auto y = series_.y[t];
        const double yd = static_cast<double>(y);
        switch (family_.kind) {
            case FamilyKind::Poisson: log_norm_[t] = -std::lgamma(yd + 1.0); break;
            case FamilyKind::Binomial: log_norm_[t] = log_binomial_coefficient(family_.m, y); break;
            case FamilyKind::NegBinomial:
                log_norm_[t] = std::lgamma(family_.k + yd) - std::lgamma(yd + 1.0) - std::lgamma(family_.k);
                break;
        }
    }
}

LikelihoodEvaluator::Result LikelihoodEvaluator::evaluate(const ParamState& params) const {
    return evaluate_until(params, kNegInf);
}

LikelihoodEvaluator::Result LikelihoodEvaluator::evaluate_until(const ParamState& params, double floor) const {
    constexpr double kSlack = 1e-6;
    const bool bounded = floor > kNegInf;
    double total = 0.0;
    std::size_t stop = 0;
    bool abort = false;
    auto check = [&]() {
        if (bounded && total < floor - kSlack) abort = true;
    };
    const auto& y = series_.y;
    switch (family_.kind) {
        case FamilyKind::Poisson:
            stop = run_recursion(params, series_, log_ystar_, [&](std::size_t t, double eta) {
                total += static_cast<double>(y[t]) * eta - std::exp(eta) + log_norm_[t];
                check();
                return eta;
            }, &abort);
            break;
        case FamilyKind::Binomial: {
            const double m = static_cast<double>(family_.m);
            // y log(mu/(m-mu)) + m log((m-mu)/m) with mu/(m-mu) = exp(eta).
            const double log_m = log_m_;
            stop = run_recursion(params, series_, log_ystar_, [&](std::size_t t, double eta) {
                const double sp = softplus(eta);
                total += static_cast<double>(y[t]) * eta - m * sp + log_norm_[t];
                check();
                return log_m - (sp - eta);
            }, &abort);
            break;
        }
        case FamilyKind::NegBinomial: {
            const double k = family_.k;
            stop = run_recursion(params, series_, log_ystar_, [&](std::size_t t, double eta) {
                const double mu = std::exp(eta);
                double term = -k * std::log1p(mu / k) + log_norm_[t];
                if (y[t] != 0) term -= static_cast<double>(y[t]) * std::log1p(k / mu);
                total += term;
                check();
                return eta;
            }, &abort);
            break;
        }
    }
    if (abort) return Result{kNegInf, 0};
    if (stop != series_.size()) return Result{kNegInf, stop + 1};
    if (std::isnan(total)) total = kNegInf;
    return Result{total, 0};
}

double LikelihoodEvaluator::operator()(const ParamState& params) const {
    return evaluate(params).value;
}

double LikelihoodEvaluator::bounded(const ParamState& params, double floor) const {
    return evaluate_until(params, floor).value;
}

}  // namespace garma
