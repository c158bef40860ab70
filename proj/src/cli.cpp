#include "garma/cli.hpp"

#include "garma/diagnostics.hpp"
#include "garma/harness.hpp"
#include "garma/io.hpp"
#include "garma/sampler.hpp"
#include "garma/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace garma::cli {

namespace {

struct FamilyFlags {
    std::string family;
    std::optional<std::int64_t> m;
    std::optional<double> k;

    void add_to(CLI::App& app, bool required) {
        auto* opt = app.add_option("--family", family, "poisson | binomial | negbinomial")
                        ->check(CLI::IsMember({"poisson", "binomial", "negbinomial"}));
        if (required) opt->required();
        else opt->default_val("poisson");
        app.add_option("--m", m, "binomial number of trials");
        app.add_option("--k", k, "negative binomial size");
    }

    [[nodiscard]] Family resolve() const {
        const FamilyKind kind = parse_family_kind(family);
        if (m && kind != FamilyKind::Binomial) throw UsageError("--m is only valid with --family binomial");
        if (k && kind != FamilyKind::NegBinomial) throw UsageError("--k is only valid with --family negbinomial");
        try {
            switch (kind) {
                case FamilyKind::Poisson: return Family::poisson();
                case FamilyKind::Binomial:
                    if (!m) throw UsageError("--family binomial requires --m");
                    return Family::binomial(*m);
                case FamilyKind::NegBinomial:
                    if (!k) throw UsageError("--family negbinomial requires --k");
                    return Family::negbinomial(*k);
            }
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        throw UsageError("unknown family");
    }
};

template <typename Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn&& write) {
    if (path.empty() || path == "-") {
        write(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path);
    write(file);
    if (!file) throw std::runtime_error("failed writing " + path);
}

std::vector<double> parse_list_flag(const std::string& text, const std::string& flag) {
    try {
        return io::parse_doubles(text);
    } catch (const io::FormatError& e) {
        throw UsageError(flag + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateFlags {
    FamilyFlags family;
    std::optional<std::size_t> p;
    std::optional<std::size_t> q;
    double alpha = 0.0;
    std::string phi;
    std::string theta;
    std::string beta;
    bool trend = false;
    bool log_trend = false;
    std::size_t n = 1000;
    std::size_t warmup = 100;
    double c = 0.3;
    std::uint64_t seed = 1;
    std::string out;
};

void add_simulate(CLI::App& app, SimulateFlags& f) {
    f.family.add_to(app, true);
    app.add_option("--p", f.p, "AR order (defaults to the number of --phi values)");
    app.add_option("--q", f.q, "MA order (defaults to the number of --theta values)");
    app.add_option("--alpha", f.alpha, "intercept")->default_val(0.0);
    app.add_option("--phi", f.phi, "comma-separated AR coefficients");
    app.add_option("--theta", f.theta, "comma-separated MA coefficients");
    app.add_flag("--trend", f.trend, "add a linear trend covariate");
    app.add_flag("--logtrend", f.log_trend, "add a log trend covariate");
    app.add_option("--beta", f.beta, "comma-separated covariate coefficients");
    app.add_option("--n", f.n, "number of retained observations")->default_val(1000)->check(CLI::PositiveNumber);
    app.add_option("--warmup", f.warmup, "discarded pre-sample draws")->default_val(100);
    app.add_option("--c", f.c, "clipping constant in (0,1)")->default_val(0.3);
    app.add_option("--seed", f.seed, "random seed")->default_val(1);
    app.add_option("--out", f.out, "output CSV (stdout when omitted)");
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
    const Family family = f.family.resolve();
    const auto phi = parse_list_flag(f.phi, "--phi");
    const auto theta = parse_list_flag(f.theta, "--theta");
    const auto beta = parse_list_flag(f.beta, "--beta");
    const std::size_t p = f.p.value_or(phi.size());
    const std::size_t q = f.q.value_or(theta.size());
    if (phi.size() > p) throw UsageError("--phi has more values than --p");
    if (theta.size() > q) throw UsageError("--theta has more values than --q");
    if (!(f.c > 0.0 && f.c < 1.0)) throw UsageError("--c must lie in (0,1)");

    SimSpec spec;
    if (f.trend) spec.covariates.push_back(trend_covariate());
    if (f.log_trend) spec.covariates.push_back(log_trend_covariate());
    if (beta.size() != spec.covariates.size())
        throw UsageError("--beta needs one value per covariate (" + std::to_string(spec.covariates.size()) + ")");

    spec.family = family;
    spec.params = ParamState(ModelShape{spec.covariates.size(), p, q});
    spec.params.with_alpha(f.alpha);
    for (std::size_t j = 0; j < beta.size(); ++j) spec.params.with_beta(j, beta[j]);
    for (std::size_t j = 0; j < phi.size(); ++j) spec.params.with_phi(j, phi[j]);
    for (std::size_t j = 0; j < theta.size(); ++j) spec.params.with_theta(j, theta[j]);
    spec.n = f.n;
    spec.warmup = f.warmup;
    spec.seed = f.seed;
    spec.c = f.c;

    const CountSeries series = simulate_garma(spec);
    with_output(f.out, out, [&](std::ostream& os) { io::write_data_csv(os, series); });
    return 0;
}

// ---------------------------------------------------------------------------
// fit / summarize

struct FitFlags {
    std::string data;
    FamilyFlags family;
    std::size_t p_max = 3;
    std::size_t q_max = 3;
    std::size_t iters = 30000;
    std::size_t burnin = 5000;
    std::size_t thin = 1;
    double rj_scale = 5.0;
    double rw_scale = 0.1;
    double inc_prob = 0.5;
    double sd_alpha = 0.3;
    double sd_arma = 0.2;
    double sd_beta = 4.0;
    double c = 0.3;
    std::uint64_t seed = 1;
    std::string always_include = "alpha";
    bool trend = false;
    bool log_trend = false;
    double level = 0.95;
    std::string out_chain;
    std::string out_summary;
};

void add_fit(CLI::App& app, FitFlags& f) {
    app.add_option("--data", f.data, "input CSV with a 'y' column")->required()->check(CLI::ExistingFile);
    f.family.add_to(app, false);
    app.add_option("--pmax", f.p_max, "maximum AR order")->default_val(3);
    app.add_option("--qmax", f.q_max, "maximum MA order")->default_val(3);
    app.add_option("--iters", f.iters, "chain length")->default_val(30000);
    app.add_option("--burnin", f.burnin, "discarded initial iterations")->default_val(5000);
    app.add_option("--thin", f.thin, "thinning lag")->default_val(1);
    app.add_option("--rj-scale", f.rj_scale, "sd of the birth proposal")->default_val(5.0);
    app.add_option("--rw-scale", f.rw_scale, "sd of the random-walk proposal")->default_val(0.1);
    app.add_option("--inc-prob", f.inc_prob, "prior inclusion probability")->default_val(0.5);
    app.add_option("--sd-alpha", f.sd_alpha, "prior sd of alpha")->default_val(0.3);
    app.add_option("--sd-arma", f.sd_arma, "prior sd of AR and MA coefficients")->default_val(0.2);
    app.add_option("--sd-beta", f.sd_beta, "prior sd of covariate coefficients")->default_val(4.0);
    app.add_option("--c", f.c, "clipping constant in (0,1)")->default_val(0.3);
    app.add_option("--seed", f.seed, "random seed")->default_val(1);
    app.add_option("--always-include", f.always_include, "comma-separated coefficients never toggled")
        ->default_val("alpha");
    app.add_flag("--trend", f.trend, "add covariate t");
    app.add_flag("--logtrend", f.log_trend, "add covariate log t");
    app.add_option("--level", f.level, "credible level")->default_val(0.95);
    app.add_option("--out-chain", f.out_chain, "chain CSV (a .meta sidecar is written next to it)");
    app.add_option("--out-summary", f.out_summary, "summary CSV");
}

void print_summary_table(std::ostream& out, const PosteriorSummary& summary) {
    out << fmt::format("{:<16} {:>9} {:>9} {:>8} {:>21} {:>8} {:>8} {:>6}\n", "coef", "mean", "median", "sd",
                       "HPD", "ESS", "geweke", "incl");
    for (const auto& cs : summary.coefficients) {
        out << fmt::format("{:<16} {:>9.4f} {:>9.4f} {:>8.4f} [{:>8.4f},{:>9.4f}] {:>8} {:>8} {:>6.3f}\n", cs.name,
                           cs.mean, cs.median, cs.sd, cs.hpd.lo, cs.hpd.hi,
                           cs.ess ? fmt::format("{:.1f}", *cs.ess) : "NA",
                           cs.geweke_z ? fmt::format("{:.3f}", *cs.geweke_z) : "NA", cs.incl_freq);
    }
}

void print_top_models(std::ostream& out, const ChainOutput& chain, std::size_t top) {
    const auto probs = posterior_model_probs(chain, 0);
    std::vector<std::pair<std::string, double>> ranked(probs.begin(), probs.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    out << "\ntop models (" << probs.size() << " visited):\n";
    for (std::size_t i = 0; i < std::min(top, ranked.size()); ++i) {
        std::string members;
        for (std::size_t k = 0; k < chain.toggleable.size(); ++k)
            if (ranked[i].first[k] == '1') members += (members.empty() ? "" : " ") + chain.names[chain.toggleable[k]];
        out << fmt::format("  {:.4f}  {}  {{{}}}\n", ranked[i].second, ranked[i].first, members);
    }
}

void print_geweke(std::ostream& out, const PosteriorSummary& summary) {
    out << "\nGeweke z (first 10% vs last 50%):\n";
    for (const auto& cs : summary.coefficients)
        out << fmt::format("  {:<16} {}\n", cs.name, cs.geweke_z ? fmt::format("{:.3f}", *cs.geweke_z) : "NA");
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
    const Family family = f.family.resolve();
    if (f.burnin >= f.iters) throw UsageError("--burnin must be smaller than --iters");
    if (f.thin < 1) throw UsageError("--thin must be at least 1");
    if (!(f.c > 0.0 && f.c < 1.0)) throw UsageError("--c must lie in (0,1)");
    if (!(f.level > 0.0 && f.level < 1.0)) throw UsageError("--level must lie in (0,1)");

    SamplerConfig cfg;
    cfg.p_max = f.p_max;
    cfg.q_max = f.q_max;
    cfg.iters = f.iters;
    cfg.seed = f.seed;
    cfg.rj_scale = f.rj_scale;
    cfg.rw_scale = f.rw_scale;
    cfg.priors = PriorSpec{f.sd_alpha, f.sd_arma, f.sd_arma, f.sd_beta, f.inc_prob};
    const auto always = io::split_list(f.always_include);
    cfg.always_included = std::set<std::string>(always.begin(), always.end());
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    CountSeries series;
    try {
        series = io::read_data_csv(std::filesystem::path(f.data), io::DataOptions{f.trend, f.log_trend, f.c});
        series.validate_for(family);
    } catch (const io::FormatError& e) {
        throw UsageError(f.data + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(f.data + ": " + e.what());
    }
    {
        const auto names = ModelShape{series.num_covariates, cfg.p_max, cfg.q_max}.names(series.covariate_names);
        try {
            (void)toggleable_indices(names, cfg.always_included);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }

    const ChainOutput chain = run_chain(series, family, cfg);
    if (!f.out_chain.empty()) {
        with_output(f.out_chain, out, [&](std::ostream& os) { io::write_chain_csv(os, chain); });
        io::KeyValueFile meta = io::chain_metadata(chain, family, series.c, series.size());
        meta.set("burnin", std::to_string(f.burnin));
        meta.set("thin", std::to_string(f.thin));
        meta.set("level", io::format_double(f.level));
        meta.set("data", f.data);
        meta.save(f.out_chain + ".meta");
    }

    const ChainOutput kept = thin(burn(chain, f.burnin), f.thin);
    const PosteriorSummary summary = summarize(kept, f.level);
    if (!f.out_summary.empty())
        with_output(f.out_summary, out, [&](std::ostream& os) { io::write_summary_csv(os, summary); });

    print_summary_table(out, summary);
    print_top_models(out, kept, 5);
    print_geweke(out, summary);
    return 0;
}

struct SummarizeFlags {
    std::string chain;
    std::size_t burnin = 0;
    std::size_t thin = 1;
    double level = 0.95;
    std::string out;
};

void add_summarize(CLI::App& app, SummarizeFlags& f) {
    app.add_option("--chain", f.chain, "chain CSV written by fit")->required()->check(CLI::ExistingFile);
    app.add_option("--burnin", f.burnin, "discarded initial iterations")->default_val(0);
    app.add_option("--thin", f.thin, "thinning lag")->default_val(1);
    app.add_option("--level", f.level, "credible level")->default_val(0.95);
    app.add_option("--out", f.out, "summary CSV (stdout when omitted)");
}

int cmd_summarize(const SummarizeFlags& f, std::ostream& out) {
    if (f.thin < 1) throw UsageError("--thin must be at least 1");
    if (!(f.level > 0.0 && f.level < 1.0)) throw UsageError("--level must lie in (0,1)");
    std::ifstream in(f.chain);
    if (!in) throw UsageError("cannot open " + f.chain);
    ChainOutput chain;
    try {
        chain = io::read_chain_csv(in);
    } catch (const io::FormatError& e) {
        throw UsageError(f.chain + ": " + e.what());
    }
    if (f.burnin >= chain.rows) throw UsageError("--burnin must be smaller than the chain length");
    const PosteriorSummary summary = summarize(thin(burn(chain, f.burnin), f.thin), f.level);
    with_output(f.out, out, [&](std::ostream& os) { io::write_summary_csv(os, summary); });
    return 0;
}

// ---------------------------------------------------------------------------
// mc / compare

struct McFlags {
    std::string scenario;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::size_t parallel = 1;
    std::string out;
};

void add_mc(CLI::App& app, McFlags& f) {
    app.add_option("--scenario", f.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    app.add_option("--reps", f.reps, "number of replications (overrides the scenario)");
    app.add_option("--seed", f.seed, "master seed (overrides the scenario)");
    app.add_option("--parallel", f.parallel, "worker threads")->default_val(1)->check(CLI::PositiveNumber);
    app.add_option("--out", f.out, "output directory")->required();
}

int cmd_mc(const McFlags& f, std::ostream& out, std::ostream& err) {
    io::KeyValueFile kv;
    try {
        kv = io::KeyValueFile::load(f.scenario);
    } catch (const io::FormatError& e) {
        throw UsageError(e.what());
    } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
    }
    if (f.reps) kv.set("replications", std::to_string(*f.reps));
    if (f.seed) kv.set("seed", std::to_string(*f.seed));
    Scenario scenario;
    try {
        scenario = parse_scenario(kv);
    } catch (const io::FormatError& e) {
        throw UsageError(f.scenario + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw UsageError(f.scenario + ": " + e.what());
    }

    const std::filesystem::path dir(f.out);
    std::filesystem::create_directories(dir);
    const ScenarioReport report = run_scenario(scenario, f.parallel);
    for (const auto& failure : report.failures) err << "warning: " << failure << '\n';

    scenario_to_keyvalue(scenario).save(dir / "scenario.txt");
    with_output((dir / "report.csv").string(), out, [&](std::ostream& os) { write_report_csv(os, report); });
    with_output((dir / "report.txt").string(), out, [&](std::ostream& os) { write_report_table(os, report); });
    write_report_table(out, report);
    return 0;
}

struct CompareFlags {
    std::string a;
    std::string b;
    std::string out;
};

void add_compare(CLI::App& app, CompareFlags& f) {
    app.add_option("a", f.a, "first report.csv")->required()->check(CLI::ExistingFile);
    app.add_option("b", f.b, "second report.csv")->required()->check(CLI::ExistingFile);
    app.add_option("--out", f.out, "delta CSV (stdout when omitted)");
}

int cmd_compare(const CompareFlags& f, std::ostream& out) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open " + path);
        try {
            return read_report_csv(in);
        } catch (const io::FormatError& e) {
            throw UsageError(path + ": " + e.what());
        }
    };
    const ScenarioReport a = load(f.a);
    const ScenarioReport b = load(f.b);
    ScenarioReport delta;
    try {
        delta = compare_reports(a, b);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    with_output(f.out, out, [&](std::ostream& os) { write_report_csv(os, delta); });
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian order selection for GARMA count time series via reversible-jump MCMC", "garma-rj"};
    app.set_version_flag("--version", std::string("garma-rj ") + kVersion);
    app.require_subcommand(1);

    SimulateFlags sim;
    FitFlags fit;
    SummarizeFlags sum;
    McFlags mc;
    CompareFlags cmp;
    auto* sim_cmd = app.add_subcommand("simulate", "simulate a GARMA count series to CSV");
    add_simulate(*sim_cmd, sim);
    auto* fit_cmd = app.add_subcommand("fit", "run the reversible-jump sampler on a CSV series");
    add_fit(*fit_cmd, fit);
    auto* sum_cmd = app.add_subcommand("summarize", "summarize a chain CSV");
    add_summarize(*sum_cmd, sum);
    auto* mc_cmd = app.add_subcommand("mc", "run a Monte Carlo scenario");
    add_mc(*mc_cmd, mc);
    auto* cmp_cmd = app.add_subcommand("compare", "difference of two Monte Carlo reports");
    add_compare(*cmp_cmd, cmp);

    std::vector<std::string> storage = args;
    if (storage.empty() || storage.front().rfind("-", 0) == 0 || storage.front() != "garma-rj")
        storage.insert(storage.begin(), "garma-rj");
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*sim_cmd) return cmd_simulate(sim, out);
        if (*fit_cmd) return cmd_fit(fit, out);
        if (*sum_cmd) return cmd_summarize(sum, out);
        if (*mc_cmd) return cmd_mc(mc, out, err);
        if (*cmp_cmd) return cmd_compare(cmp, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace garma::cli
