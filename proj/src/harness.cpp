#include "garma/harness.hpp"

#include "garma/random.hpp"
#include "garma/simulate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>

namespace garma {

namespace {

struct CoefficientStats {
    double mean, median, sd, hpd_lo, hpd_hi, q_lo, q_hi;
    std::optional<double> ess;
};

struct CellOutcome {
    bool correct_hpd = false;
    bool correct_quantile = false;
    std::vector<CoefficientStats> coefficients;
};

struct ReplicationOutcome {
    std::vector<CellOutcome> cells;  // same order as the report cells
    std::string error;
};

std::vector<CellKey> grid_cells(const Scenario& s) {
    std::vector<CellKey> cells;
    for (double sigma : s.sigma_grid)
        for (std::size_t b : s.burn_grid)
            for (std::size_t t : s.thin_grid) cells.push_back({sigma, b, t});
    return cells;
}

ReplicationOutcome run_replication(const Scenario& s, std::size_t index) {
    ReplicationOutcome out;
    const std::uint64_t rep_seed = replication_seed(s.seed, index);

    SimSpec sim;
    sim.family = s.family;
    sim.params = s.truth;
    sim.n = s.n;
    sim.warmup = s.warmup;
    sim.seed = derive_seed(rep_seed, 0);
    sim.c = s.c;
    const CountSeries series = simulate_garma(sim);

    for (std::size_t j = 0; j < s.sigma_grid.size(); ++j) {
        SamplerConfig cfg = s.sampler;
        cfg.rj_scale = s.sigma_grid[j];
        cfg.seed = derive_seed(rep_seed, j + 1);
        const ChainOutput chain = run_chain(series, s.family, cfg);
        for (std::size_t b : s.burn_grid) {
            const ChainOutput burned = burn(chain, b);
            for (std::size_t t : s.thin_grid) {
                const ChainOutput kept = thin(burned, t);
                const PosteriorSummary summary = summarize(kept, s.level);
                CellOutcome cell;
                cell.correct_hpd = classify_model(summary, s.truth, IntervalKind::Hpd);
                cell.correct_quantile = classify_model(summary, s.truth, IntervalKind::Quantile);
                for (const auto& cs : summary.coefficients)
                    cell.coefficients.push_back({cs.mean, cs.median, cs.sd, cs.hpd.lo, cs.hpd.hi, cs.quantile.lo,
                                                 cs.quantile.hi, cs.ess});
                out.cells.push_back(std::move(cell));
            }
        }
    }
    return out;
}

std::optional<double> optional_difference(const std::optional<double>& a, const std::optional<double>& b) {
    if (a && b) return *a - *b;
    return std::nullopt;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? io::format_double(*v) : std::string("NA");
}

}  // namespace

void Scenario::validate() const {
    sampler.validate();
    if (truth.dim() == 0) throw std::invalid_argument("scenario has no truth");
    if (truth.shape().p != sampler.p_max || truth.shape().q != sampler.q_max || truth.shape().r != 0)
        throw std::invalid_argument("scenario truth must have shape (p_max, q_max) and no covariates");
    if (n < 1) throw std::invalid_argument("scenario needs n >= 1");
    if (replications < 1) throw std::invalid_argument("scenario needs at least one replication");
    if (sigma_grid.empty() || burn_grid.empty() || thin_grid.empty())
        throw std::invalid_argument("scenario grids must be nonempty");
    for (double sigma : sigma_grid)
        if (!(sigma > 0.0)) throw std::invalid_argument("sigma values must be positive");
    for (std::size_t b : burn_grid)
        if (b >= sampler.iters) throw std::invalid_argument("every burn-in must be smaller than iters");
    for (std::size_t t : thin_grid)
        if (t < 1) throw std::invalid_argument("thinning lags must be at least 1");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
    if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("clipping constant must lie in (0,1)");
}

Scenario parse_scenario(const io::KeyValueFile& kv) {
    static const std::vector<std::string> known{
        "name",     "family",    "m",          "k",         "n",          "warmup",    "c",
        "alpha",    "phi",       "theta",      "p_max",     "q_max",      "iters",     "rw_scale",
        "inc_prob", "sd_alpha",  "sd_phi",     "sd_theta",  "sd_arma",    "always_included",
        "sigma_grid", "burn_grid", "thin_grid", "level",    "replications", "seed"};
    for (const auto& [key, value] : kv.entries())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw io::FormatError("unknown scenario key '" + key + "'");

    Scenario s;
    s.name = kv.get_or("name", s.name);
    const FamilyKind kind = parse_family_kind(kv.get_or("family", "binomial"));
    switch (kind) {
        case FamilyKind::Poisson:
            if (kv.has("m") || kv.has("k")) throw io::FormatError("poisson scenarios take neither m nor k");
            s.family = Family::poisson();
            break;
        case FamilyKind::Binomial:
            if (kv.has("k")) throw io::FormatError("binomial scenarios take m, not k");
            s.family = Family::binomial(io::parse_int(kv.get("m")));
            break;
        case FamilyKind::NegBinomial:
            if (kv.has("m")) throw io::FormatError("negbinomial scenarios take k, not m");
            s.family = Family::negbinomial(io::parse_double(kv.get("k")));
            break;
    }
    s.n = io::parse_uint(kv.get_or("n", "1000"));
    s.warmup = io::parse_uint(kv.get_or("warmup", "100"));
    s.c = io::parse_double(kv.get_or("c", "0.3"));

    auto& cfg = s.sampler;
    cfg.p_max = io::parse_uint(kv.get_or("p_max", "3"));
    cfg.q_max = io::parse_uint(kv.get_or("q_max", "3"));
    cfg.iters = io::parse_uint(kv.get_or("iters", "30000"));
    cfg.rw_scale = io::parse_double(kv.get_or("rw_scale", "0.1"));
    cfg.priors.inc_prob = io::parse_double(kv.get_or("inc_prob", "0.5"));
    cfg.priors.sd_alpha = io::parse_double(kv.get_or("sd_alpha", "0.3"));
    const std::string sd_arma = kv.get_or("sd_arma", "0.2");
    cfg.priors.sd_phi = io::parse_double(kv.get_or("sd_phi", sd_arma));
    cfg.priors.sd_theta = io::parse_double(kv.get_or("sd_theta", sd_arma));
    if (kv.has("always_included")) {
        const auto names = io::split_list(kv.get("always_included"));
        cfg.always_included = std::set<std::string>(names.begin(), names.end());
    }

    const auto phi = io::parse_doubles(kv.get_or("phi", ""));
    const auto theta = io::parse_doubles(kv.get_or("theta", ""));
    if (phi.size() > cfg.p_max) throw io::FormatError("truth has more AR terms than p_max");
    if (theta.size() > cfg.q_max) throw io::FormatError("truth has more MA terms than q_max");
    s.truth = ParamState(ModelShape{0, cfg.p_max, cfg.q_max});
    s.truth.with_alpha(io::parse_double(kv.get_or("alpha", "0")));
    for (std::size_t j = 0; j < phi.size(); ++j) s.truth.with_phi(j, phi[j]);
    for (std::size_t j = 0; j < theta.size(); ++j) s.truth.with_theta(j, theta[j]);

    s.sigma_grid = io::parse_doubles(kv.get_or("sigma_grid", "5"));
    s.burn_grid.clear();
    for (const auto& item : io::split_list(kv.get_or("burn_grid", "0"))) s.burn_grid.push_back(io::parse_uint(item));
    s.thin_grid.clear();
    for (const auto& item : io::split_list(kv.get_or("thin_grid", "1"))) s.thin_grid.push_back(io::parse_uint(item));
    s.level = io::parse_double(kv.get_or("level", "0.95"));
    s.replications = io::parse_uint(kv.get_or("replications", "50"));
    s.seed = io::parse_uint(kv.get_or("seed", "1"));
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(io::KeyValueFile::load(path)); }

io::KeyValueFile scenario_to_keyvalue(const Scenario& s) {
    auto join = [](const auto& values) {
        std::string out;
        for (const auto& v : values) {
            if (!out.empty()) out += ", ";
            if constexpr (std::is_floating_point_v<std::decay_t<decltype(v)>>) out += io::format_double(v);
            else out += std::to_string(v);
        }
        return out;
    };
    io::KeyValueFile kv;
    kv.set("name", s.name);
    kv.set("family", s.family.name());
    if (s.family.kind == FamilyKind::Binomial) kv.set("m", std::to_string(s.family.m));
    if (s.family.kind == FamilyKind::NegBinomial) kv.set("k", io::format_double(s.family.k));
    kv.set("n", std::to_string(s.n));
    kv.set("warmup", std::to_string(s.warmup));
    kv.set("c", io::format_double(s.c));
    kv.set("alpha", io::format_double(s.truth.alpha()));
    std::vector<double> phi, theta;
    for (std::size_t j = 0; j < s.truth.shape().p; ++j) phi.push_back(s.truth.phi(j));
    for (std::size_t j = 0; j < s.truth.shape().q; ++j) theta.push_back(s.truth.theta(j));
    kv.set("phi", join(phi));
    kv.set("theta", join(theta));
    kv.set("p_max", std::to_string(s.sampler.p_max));
    kv.set("q_max", std::to_string(s.sampler.q_max));
    kv.set("iters", std::to_string(s.sampler.iters));
    kv.set("rw_scale", io::format_double(s.sampler.rw_scale));
    kv.set("inc_prob", io::format_double(s.sampler.priors.inc_prob));
    kv.set("sd_alpha", io::format_double(s.sampler.priors.sd_alpha));
    kv.set("sd_phi", io::format_double(s.sampler.priors.sd_phi));
    kv.set("sd_theta", io::format_double(s.sampler.priors.sd_theta));
    std::string always;
    for (const auto& name : s.sampler.always_included) always += (always.empty() ? "" : ", ") + name;
    kv.set("always_included", always);
    kv.set("sigma_grid", join(s.sigma_grid));
    kv.set("burn_grid", join(s.burn_grid));
    kv.set("thin_grid", join(s.thin_grid));
    kv.set("level", io::format_double(s.level));
    kv.set("replications", std::to_string(s.replications));
    kv.set("seed", std::to_string(s.seed));
    return kv;
}

std::uint64_t replication_seed(std::uint64_t master, std::size_t index) noexcept {
    return derive_seed(master, static_cast<std::uint64_t>(index));
}

ScenarioReport run_scenario(const Scenario& s, std::size_t parallelism) {
    s.validate();
    const std::size_t reps = s.replications;
    std::vector<ReplicationOutcome> outcomes(reps);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < reps; i = next++) {
            try {
                outcomes[i] = run_replication(s, i);
            } catch (const std::exception& e) {
                outcomes[i] = ReplicationOutcome{{}, e.what()};
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(parallelism, 1, reps);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    ScenarioReport report;
    report.name = s.name;
    report.requested = reps;
    const auto keys = grid_cells(s);
    const auto names = s.truth.shape().names();
    for (std::size_t i = 0; i < reps; ++i) {
        if (!outcomes[i].error.empty()) {
            ++report.failed;
            report.failures.push_back("replication " + std::to_string(i) + ": " + outcomes[i].error);
        }
    }

    for (std::size_t c = 0; c < keys.size(); ++c) {
        CellReport cell;
        cell.key = keys[c];
        cell.coefficients.resize(names.size());
        std::vector<std::size_t> ess_count(names.size(), 0);
        std::vector<double> ess_sum(names.size(), 0.0);
        std::size_t hpd_ok = 0;
        std::size_t quant_ok = 0;
        for (std::size_t i = 0; i < reps; ++i) {
            if (!outcomes[i].error.empty()) continue;
            const CellOutcome& o = outcomes[i].cells[c];
            ++cell.replications;
            hpd_ok += o.correct_hpd ? 1 : 0;
            quant_ok += o.correct_quantile ? 1 : 0;
            for (std::size_t j = 0; j < names.size(); ++j) {
                auto& agg = cell.coefficients[j];
                const auto& st = o.coefficients[j];
                agg.mean += st.mean;
                agg.median += st.median;
                agg.sd += st.sd;
                agg.hpd_lo += st.hpd_lo;
                agg.hpd_hi += st.hpd_hi;
                agg.q_lo += st.q_lo;
                agg.q_hi += st.q_hi;
                if (st.ess) {
                    ess_sum[j] += *st.ess;
                    ++ess_count[j];
                }
            }
        }
        const double denom = cell.replications > 0 ? static_cast<double>(cell.replications) : 1.0;
        for (std::size_t j = 0; j < names.size(); ++j) {
            auto& agg = cell.coefficients[j];
            agg.name = names[j];
            agg.truth = s.truth.value(j);
            agg.mean /= denom;
            agg.median /= denom;
            agg.sd /= denom;
            agg.hpd_lo /= denom;
            agg.hpd_hi /= denom;
            agg.q_lo /= denom;
            agg.q_hi /= denom;
            if (ess_count[j] > 0) agg.ess = ess_sum[j] / static_cast<double>(ess_count[j]);
        }
        if (cell.replications > 0) {
            cell.pct_correct_hpd = 100.0 * static_cast<double>(hpd_ok) / denom;
            cell.pct_correct_quantile = 100.0 * static_cast<double>(quant_ok) / denom;
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

ScenarioReport compare_reports(const ScenarioReport& a, const ScenarioReport& b) {
    if (a.cells.size() != b.cells.size()) throw std::invalid_argument("reports have different numbers of cells");
    ScenarioReport out;
    out.name = a.name + " - " + b.name;
    out.requested = a.requested;
    out.failed = a.failed;
    for (std::size_t c = 0; c < a.cells.size(); ++c) {
        const auto& ca = a.cells[c];
        const auto& cb = b.cells[c];
        if (!(ca.key == cb.key)) throw std::invalid_argument("cell " + std::to_string(c) + " has different grid keys");
        if (ca.coefficients.size() != cb.coefficients.size())
            throw std::invalid_argument("cell " + std::to_string(c) + " has different coefficients");
        CellReport d;
        d.key = ca.key;
        d.replications = ca.replications;
        d.pct_correct_hpd = ca.pct_correct_hpd - cb.pct_correct_hpd;
        d.pct_correct_quantile = ca.pct_correct_quantile - cb.pct_correct_quantile;
        for (std::size_t j = 0; j < ca.coefficients.size(); ++j) {
            const auto& x = ca.coefficients[j];
            const auto& y = cb.coefficients[j];
            if (x.name != y.name) throw std::invalid_argument("coefficient names differ: " + x.name + " vs " + y.name);
            d.coefficients.push_back({x.name, x.truth, x.mean - y.mean, x.median - y.median, x.sd - y.sd,
                                      optional_difference(x.ess, y.ess), x.hpd_lo - y.hpd_lo, x.hpd_hi - y.hpd_hi,
                                      x.q_lo - y.q_lo, x.q_hi - y.q_hi});
        }
        out.cells.push_back(std::move(d));
    }
    return out;
}

void write_report_csv(std::ostream& out, const ScenarioReport& report) {
    out << "sigma,burn,thin,coef,truth,mean,median,sd,ess,hpd_lo,hpd_hi,q_lo,q_hi,"
           "pct_correct_hpd,pct_correct_quantile,replications,failed\n";
    for (const auto& cell : report.cells) {
        for (const auto& agg : cell.coefficients) {
            out << io::format_double(cell.key.sigma) << ',' << cell.key.burn << ',' << cell.key.thin << ','
                << agg.name << ',' << io::format_double(agg.truth) << ',' << io::format_double(agg.mean) << ','
                << io::format_double(agg.median) << ',' << io::format_double(agg.sd) << ','
                << format_optional(agg.ess) << ',' << io::format_double(agg.hpd_lo) << ','
                << io::format_double(agg.hpd_hi) << ',' << io::format_double(agg.q_lo) << ','
                << io::format_double(agg.q_hi) << ',' << io::format_double(cell.pct_correct_hpd) << ','
                << io::format_double(cell.pct_correct_quantile) << ',' << cell.replications << ','
                << report.failed << '\n';
        }
    }
}

ScenarioReport read_report_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw io::FormatError("report file is empty");
    ScenarioReport report;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = io::split_list(line);
        if (f.size() != 17) throw io::FormatError("report line " + std::to_string(lineno) + ": expected 17 fields");
        const CellKey key{io::parse_double(f[0]), io::parse_uint(f[1]), io::parse_uint(f[2])};
        if (report.cells.empty() || !(report.cells.back().key == key)) {
            CellReport cell;
            cell.key = key;
            cell.pct_correct_hpd = io::parse_double(f[13]);
            cell.pct_correct_quantile = io::parse_double(f[14]);
            cell.replications = io::parse_uint(f[15]);
            report.cells.push_back(std::move(cell));
        }
        report.failed = io::parse_uint(f[16]);
        CoefficientAggregate agg;
        agg.name = f[3];
        agg.truth = io::parse_double(f[4]);
        agg.mean = io::parse_double(f[5]);
        agg.median = io::parse_double(f[6]);
        agg.sd = io::parse_double(f[7]);
        if (f[8] != "NA") agg.ess = io::parse_double(f[8]);
        agg.hpd_lo = io::parse_double(f[9]);
        agg.hpd_hi = io::parse_double(f[10]);
        agg.q_lo = io::parse_double(f[11]);
        agg.q_hi = io::parse_double(f[12]);
        report.cells.back().coefficients.push_back(std::move(agg));
    }
    if (!report.cells.empty()) report.requested = report.cells.front().replications + report.failed;
    return report;
}

void write_report_table(std::ostream& out, const ScenarioReport& report) {
    out << fmt::format("Scenario: {}  (replications: {} requested, {} failed)\n", report.name, report.requested,
                       report.failed);
    for (const auto& cell : report.cells) {
        out << fmt::format("\nsigma = {}  burn-in = {}  thin = {}  (n = {})\n", io::format_double(cell.key.sigma),
                           cell.key.burn, cell.key.thin, cell.replications);
        out << fmt::format("  HPD {:5.1f}%   Quant {:5.1f}%\n", cell.pct_correct_hpd, cell.pct_correct_quantile);
        out << fmt::format("  {:<16} {:>8} {:>8} {:>7} {:>8}   {:<20}\n", "Pars", "Mean", "Med", "SD", "ESS",
                           "HPD");
        for (const auto& agg : cell.coefficients) {
            const std::string label = agg.name + "=" + fmt::format("{:.1f}", agg.truth);
            const std::string ess = agg.ess ? fmt::format("{:.1f}", *agg.ess) : std::string("NA");
            out << fmt::format("  {:<16} {:>8.3f} {:>8.3f} {:>7.3f} {:>8}   [{:.3f}, {:.3f}]\n", label, agg.mean,
                               agg.median, agg.sd, ess, agg.hpd_lo, agg.hpd_hi);
        }
    }
}

}  // namespace garma
