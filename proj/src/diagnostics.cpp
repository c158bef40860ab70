#include "garma/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace garma {

namespace {

ChainOutput select_rows(const ChainOutput& chain, const std::vector<std::size_t>& rows) {
    ChainOutput out = chain;
    const std::size_t k = chain.toggleable.size();
    out.rows = rows.size();
    out.draws.clear();
    out.indicators.clear();
    out.draws.reserve(rows.size() * chain.dim);
    out.indicators.reserve(rows.size() * k);
    for (std::size_t row : rows) {
        const auto d = chain.draws.begin() + static_cast<std::ptrdiff_t>(row * chain.dim);
        out.draws.insert(out.draws.end(), d, d + static_cast<std::ptrdiff_t>(chain.dim));
        const auto ind = chain.indicators.begin() + static_cast<std::ptrdiff_t>(row * k);
        out.indicators.insert(out.indicators.end(), ind, ind + static_cast<std::ptrdiff_t>(k));
    }
    return out;
}

double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Sample variance with n-1 denominator.
double variance_of(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

bool is_constant(std::span<const double> x) {
    return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

std::vector<double> sorted_copy(std::span<const double> sample) {
    std::vector<double> s(sample.begin(), sample.end());
    std::sort(s.begin(), s.end());
    return s;
}

void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0,1)");
}

}  // namespace

ChainOutput burn(const ChainOutput& chain, std::size_t n_burn) {
    if (n_burn >= chain.rows)
        throw std::invalid_argument("burn-in of " + std::to_string(n_burn) + " leaves no draws out of " +
                                    std::to_string(chain.rows));
    std::vector<std::size_t> rows(chain.rows - n_burn);
    std::iota(rows.begin(), rows.end(), n_burn);
    ChainOutput out = select_rows(chain, rows);
    out.n_burn = chain.n_burn + n_burn;
    return out;
}

ChainOutput thin(const ChainOutput& chain, std::size_t lag) {
    if (lag < 1) throw std::invalid_argument("thinning lag must be at least 1");
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < chain.rows; i += lag) rows.push_back(i);
    ChainOutput out = select_rows(chain, rows);
    out.thin_lag = chain.thin_lag * lag;
    return out;
}

Interval hpd_interval(std::span<const double> sample, double level) {
    if (sample.empty()) throw std::invalid_argument("HPD interval of an empty sample");
    check_level(level);
    const auto s = sorted_copy(sample);
    const std::size_t n = s.size();
    // Guard against level*n landing a rounding error above an integer.
    auto w = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n) - 1e-9));
    w = std::clamp<std::size_t>(w, 1, n);
    std::size_t best = 0;
    double best_width = s[w - 1] - s[0];
    for (std::size_t i = 1; i + w <= n; ++i) {
        const double width = s[i + w - 1] - s[i];
        if (width < best_width) {
            best_width = width;
            best = i;
        }
    }
    return {s[best], s[best + w - 1]};
}

double quantile_sorted(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Interval quantile_interval(std::span<const double> sample, double level) {
    if (sample.empty()) throw std::invalid_argument("quantile interval of an empty sample");
    check_level(level);
    const auto s = sorted_copy(sample);
    const double tail = (1.0 - level) / 2.0;
    return {quantile_sorted(s, tail), quantile_sorted(s, 1.0 - tail)};
}

double spectrum_at_zero(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 2) throw std::invalid_argument("spectral density needs at least two draws");
    if (is_constant(sample)) return 0.0;

    const double m = mean_of(sample);
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t) x[t] = sample[t] - m;

    const auto nd = static_cast<double>(n);
    const auto order_max =
        static_cast<std::size_t>(std::floor(std::min(nd - 1.0, 10.0 * std::log10(nd))));

    std::vector<double> acov(order_max + 1, 0.0);
    for (std::size_t k = 0; k <= order_max; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += x[t] * x[t + k];
        acov[k] = s / nd;
    }

    // Levinson-Durbin; coefs[k] holds the AR(k) coefficients.
    std::vector<std::vector<double>> coefs(order_max + 1);
    std::vector<double> vars{acov[0]};
    for (std::size_t k = 1; k <= order_max; ++k) {
        const auto& prev = coefs[k - 1];
        double num = acov[k];
        for (std::size_t j = 1; j < k; ++j) num -= prev[j - 1] * acov[k - j];
        const double pacf = num / vars[k - 1];
        std::vector<double> cur(k);
        for (std::size_t j = 1; j < k; ++j) cur[j - 1] = prev[j - 1] - pacf * prev[k - j - 1];
        cur[k - 1] = pacf;
        const double v = vars[k - 1] * (1.0 - pacf * pacf);
        if (!(v > 0.0) || !std::isfinite(v)) break;
        coefs[k] = std::move(cur);
        vars.push_back(v);
    }

    std::size_t order = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < vars.size(); ++k) {
        const double aic = nd * std::log(vars[k]) + 2.0 * static_cast<double>(k);
        if (aic < best_aic) {
            best_aic = aic;
            order = k;
        }
    }

    const double var_pred = vars[order] * nd / (nd - static_cast<double>(order + 1));
    const double ar_sum = std::accumulate(coefs[order].begin(), coefs[order].end(), 0.0);
    return var_pred / ((1.0 - ar_sum) * (1.0 - ar_sum));
}

double effective_sample_size(std::span<const double> sample) {
    if (sample.size() < 10) throw std::invalid_argument("effective sample size needs at least 10 draws");
    const double spec = spectrum_at_zero(sample);
    if (spec == 0.0) return 0.0;
    return static_cast<double>(sample.size()) * variance_of(sample) / spec;
}

std::optional<double> geweke_z(std::span<const double> sample, double frac_first, double frac_last) {
    if (!(frac_first > 0.0 && frac_last > 0.0 && frac_first + frac_last <= 1.0))
        throw std::invalid_argument("Geweke fractions must be positive and sum to at most 1");
    const auto nd = static_cast<double>(sample.size());
    const auto n_a = static_cast<std::size_t>(std::floor(frac_first * nd));
    const auto n_b = static_cast<std::size_t>(std::floor(frac_last * nd));
    if (n_a < 10 || n_b < 10) throw std::invalid_argument("Geweke segments need at least 10 draws each");

    const auto a = sample.first(n_a);
    const auto b = sample.last(n_b);
    const double s_a = spectrum_at_zero(a);
    const double s_b = spectrum_at_zero(b);
    if (s_a == 0.0 || s_b == 0.0) return std::nullopt;
    return (mean_of(a) - mean_of(b)) /
           std::sqrt(s_a / static_cast<double>(n_a) + s_b / static_cast<double>(n_b));
}

PosteriorSummary summarize(const ChainOutput& chain, double level) {
    if (chain.rows == 0) throw std::invalid_argument("cannot summarize an empty chain");
    check_level(level);
    PosteriorSummary out;
    out.level = level;
    for (std::size_t i = 0; i < chain.dim; ++i) {
        CoefficientSummary cs;
        cs.name = chain.names[i];
        const auto col = chain.column(i);
        const auto sorted = sorted_copy(col);
        cs.mean = mean_of(col);
        cs.median = quantile_sorted(sorted, 0.5);
        cs.sd = std::sqrt(variance_of(col));
        cs.hpd = hpd_interval(col, level);
        cs.quantile = quantile_interval(col, level);
        if (col.size() >= 10) cs.ess = effective_sample_size(col);
        if (col.size() >= 100) cs.geweke_z = geweke_z(col);

        const auto slot = std::find(chain.toggleable.begin(), chain.toggleable.end(), i);
        cs.toggleable = slot != chain.toggleable.end();
        if (cs.toggleable) {
            const auto k = static_cast<std::size_t>(slot - chain.toggleable.begin());
            std::size_t hits = 0;
            for (std::size_t row = 0; row < chain.rows; ++row) hits += chain.indicator(row, k) ? 1 : 0;
            cs.incl_freq = static_cast<double>(hits) / static_cast<double>(chain.rows);
        } else {
            cs.incl_freq = 1.0;
        }
        out.coefficients.push_back(std::move(cs));
    }
    return out;
}

bool classify_model(const PosteriorSummary& summary, const ParamState& truth, IntervalKind kind) {
    if (summary.coefficients.size() != truth.dim())
        throw std::invalid_argument("truth does not match the summary dimensions");
    for (std::size_t i = 0; i < truth.dim(); ++i) {
        const auto& cs = summary.coefficients[i];
        if (!cs.toggleable) continue;
        const bool covers_zero = cs.interval(kind).contains(0.0);
        const bool nonzero = truth.value(i) != 0.0;
        if (nonzero == covers_zero) return false;
    }
    return true;
}

}  // namespace garma
