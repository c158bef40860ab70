#pragma once

#include "garma/diagnostics.hpp"
#include "garma/model.hpp"
#include "garma/sampler.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace garma::io {

/// Malformed input file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief Ordered `key = value` text.
 *
 * One pair per line; blank lines and lines starting with '#' are ignored;
 * keys are unique. Values run to the end of the line, trimmed.
 */
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in, const std::string& origin = "<input>");
    static KeyValueFile load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    [[nodiscard]] bool has(const std::string& key) const;
    [[nodiscard]] const std::string& get(const std::string& key) const;
    [[nodiscard]] std::string get_or(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept {
        return entries_;
    }

    void write(std::ostream& out) const;
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Splits on commas, trimming whitespace; an empty string gives no items.
[[nodiscard]] std::vector<std::string> split_list(const std::string& text);
[[nodiscard]] std::vector<double> parse_doubles(const std::string& text);
[[nodiscard]] double parse_double(const std::string& text);
[[nodiscard]] std::int64_t parse_int(const std::string& text);
[[nodiscard]] std::uint64_t parse_uint(const std::string& text);

/// Shortest round-trip decimal form of a double.
[[nodiscard]] std::string format_double(double v);

struct DataOptions {
    bool add_trend = false;      // append t = 1..n
    bool add_log_trend = false;  // append log t
    double c = 0.3;
};

/**
 * @brief Reads a count series from CSV.
 *
 * The header must contain `y`. A column named `t` is taken as the time index
 * and ignored; every other column is a covariate. Missing or malformed values
 * are rejected.
 */
[[nodiscard]] CountSeries read_data_csv(std::istream& in, const DataOptions& options = {});
[[nodiscard]] CountSeries read_data_csv(const std::filesystem::path& path, const DataOptions& options = {});

/// Writes `t,y[,x1..xr]`, one row per observation.
void write_data_csv(std::ostream& out, const CountSeries& series);

/// Writes `iter,<coef names>,ind_<toggleable names>`, one row per iteration.
void write_chain_csv(std::ostream& out, const ChainOutput& chain);
/// Reads a chain written by write_chain_csv (counters and config are not stored there).
[[nodiscard]] ChainOutput read_chain_csv(std::istream& in);

/// Sidecar recording the sampler configuration, model and data description.
[[nodiscard]] KeyValueFile chain_metadata(const ChainOutput& chain, const Family& family, double c,
                                          std::size_t n_obs);

/// `name,mean,median,sd,hpd_lo,hpd_hi,q_lo,q_hi,ess,geweke_z,incl_freq`; undefined values are `NA`.
void write_summary_csv(std::ostream& out, const PosteriorSummary& summary);

}  // namespace garma::io
