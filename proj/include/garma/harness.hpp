#pragma once

#include "garma/diagnostics.hpp"
#include "garma/io.hpp"
#include "garma/model.hpp"
#include "garma/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace garma {

/**
 * @brief One Monte Carlo experiment: a data-generating truth and a grid of
 * (rj_scale, burn-in, thinning) settings to evaluate on every replication.
 *
 * Scenario file keys (`key = value`, lists comma separated):
 *
 *   name, family (poisson|binomial|negbinomial), m, k, n, warmup, c,
 *   alpha, phi, theta            -- truth; phi/theta may be shorter than p_max/q_max
 *   p_max, q_max, iters, rw_scale, inc_prob,
 *   sd_alpha, sd_phi, sd_theta   -- or sd_arma for both
 *   always_included              -- default alpha
 *   sigma_grid, burn_grid, thin_grid, level, replications, seed
 */
struct Scenario {
    std::string name = "scenario";
    Family family = Family::binomial(15);
    ParamState truth;
    std::size_t n = 1000;
    std::size_t warmup = 100;
    double c = 0.3;
    std::size_t replications = 50;
    SamplerConfig sampler{};  // rj_scale is taken from sigma_grid
    std::vector<double> sigma_grid{5.0};
    std::vector<std::size_t> burn_grid{0};
    std::vector<std::size_t> thin_grid{1};
    double level = 0.95;
    std::uint64_t seed = 1;

    void validate() const;
};

[[nodiscard]] Scenario parse_scenario(const io::KeyValueFile& kv);
[[nodiscard]] Scenario load_scenario(const std::filesystem::path& path);
[[nodiscard]] io::KeyValueFile scenario_to_keyvalue(const Scenario& s);

/// Seed of replication `index`: derive_seed(master, index).
[[nodiscard]] std::uint64_t replication_seed(std::uint64_t master, std::size_t index) noexcept;

struct CellKey {
    double sigma = 0.0;
    std::size_t burn = 0;
    std::size_t thin = 1;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

/// Replication averages for one coefficient in one grid cell.
struct CoefficientAggregate {
    std::string name;
    double truth = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double sd = 0.0;
    std::optional<double> ess;  // average over replications where it is defined
    double hpd_lo = 0.0;
    double hpd_hi = 0.0;
    double q_lo = 0.0;
    double q_hi = 0.0;
};

struct CellReport {
    CellKey key;
    std::size_t replications = 0;  // replications that entered the averages
    double pct_correct_hpd = 0.0;
    double pct_correct_quantile = 0.0;
    std::vector<CoefficientAggregate> coefficients;
};

struct ScenarioReport {
    std::string name;
    std::size_t requested = 0;
    std::size_t failed = 0;
    std::vector<std::string> failures;  // "replication i: message"
    std::vector<CellReport> cells;      // sigma-major, then burn, then thin
};

/**
 * @brief Runs every replication of a scenario on up to `parallelism` threads.
 *
 * Replication i simulates with derive_seed(rep_seed, 0) and runs the chain
 * for sigma_grid[j] with derive_seed(rep_seed, j + 1), where
 * rep_seed = replication_seed(s.seed, i). The report does not depend on
 * `parallelism`. Replications that throw are excluded and counted.
 */
[[nodiscard]] ScenarioReport run_scenario(const Scenario& s, std::size_t parallelism = 1);

/// Cell-by-cell differences a - b of every aggregate. Throws on shape mismatch.
[[nodiscard]] ScenarioReport compare_reports(const ScenarioReport& a, const ScenarioReport& b);

/// One row per cell x coefficient.
void write_report_csv(std::ostream& out, const ScenarioReport& report);
[[nodiscard]] ScenarioReport read_report_csv(std::istream& in);

/// Human-readable table: one block per cell, one line per coefficient.
void write_report_table(std::ostream& out, const ScenarioReport& report);

}  // namespace garma
