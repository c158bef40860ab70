#include "garma/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace garma::io {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool next_nonblank_line(std::istream& in, std::string& line) {
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) return true;
    }
    return false;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("NA");
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& origin) {
    KeyValueFile kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw FormatError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        if (key.empty()) throw FormatError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.has(key)) throw FormatError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv.entries_.emplace_back(key, trim(text.substr(eq + 1)));
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return parse(in, path.string());
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

bool KeyValueFile::has(const std::string& key) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& KeyValueFile::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw FormatError("missing key '" + key + "'");
}

std::string KeyValueFile::get_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? get(key) : fallback;
}

void KeyValueFile::write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

void KeyValueFile::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write(out);
}

std::vector<std::string> split_list(const std::string& text) {
    if (trim(text).empty()) return {};
    return split_row(text);
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw FormatError("not a number: '" + text + "'");
    return v;
}

std::int64_t parse_int(const std::string& text) {
    const std::string t = trim(text);
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw FormatError("not an integer: '" + text + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw FormatError("not a non-negative integer: '" + text + "'");
    return v;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split_list(text)) out.push_back(parse_double(item));
    return out;
}

std::string format_double(double v) { return fmt::format("{}", v); }

CountSeries read_data_csv(std::istream& in, const DataOptions& options) {
    std::string line;
    if (!next_nonblank_line(in, line)) throw FormatError("data file is empty");
    const auto header = split_row(line);
    const auto y_col = std::find(header.begin(), header.end(), "y");
    if (y_col == header.end()) throw FormatError("data file has no 'y' column");
    const auto y_index = static_cast<std::size_t>(y_col - header.begin());

    std::vector<std::size_t> cov_cols;
    CountSeries series;
    series.c = options.c;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j == y_index || header[j] == "t") continue;
        if (header[j].empty()) throw FormatError("empty column name in header");
        cov_cols.push_back(j);
        series.covariate_names.push_back(header[j]);
    }

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (next_nonblank_line(in, line)) {
        ++lineno;
        const auto cells = split_row(line);
        const std::string where = "line " + std::to_string(lineno);
        if (cells.size() != header.size())
            throw FormatError(where + ": expected " + std::to_string(header.size()) + " fields");
        for (const auto& cell : cells)
            if (cell.empty() || cell == "NA" || cell == "NaN") throw FormatError(where + ": missing value");
        std::int64_t y = 0;
        try {
            y = parse_int(cells[y_index]);
        } catch (const FormatError&) {
            throw FormatError(where + ": count '" + cells[y_index] + "' is not an integer");
        }
        if (y < 0) throw FormatError(where + ": negative count");
        series.y.push_back(y);
        std::vector<double> row;
        for (std::size_t j : cov_cols) {
            try {
                row.push_back(parse_double(cells[j]));
            } catch (const FormatError&) {
                throw FormatError(where + ": covariate '" + header[j] + "' is not a number");
            }
        }
        rows.push_back(std::move(row));
    }

    if (options.add_trend) series.covariate_names.emplace_back("trend");
    if (options.add_log_trend) series.covariate_names.emplace_back("logtrend");
    series.num_covariates = series.covariate_names.size();
    for (std::size_t t = 0; t < rows.size(); ++t) {
        auto& row = rows[t];
        if (options.add_trend) row.push_back(static_cast<double>(t + 1));
        if (options.add_log_trend) row.push_back(std::log(static_cast<double>(t + 1)));
        series.covariates.insert(series.covariates.end(), row.begin(), row.end());
    }
    series.validate();
    return series;
}

CountSeries read_data_csv(const std::filesystem::path& path, const DataOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_data_csv(in, options);
}

void write_data_csv(std::ostream& out, const CountSeries& series) {
    out << "t,y";
    for (std::size_t j = 0; j < series.num_covariates; ++j) out << ",x" << (j + 1);
    out << '\n';
    for (std::size_t t = 0; t < series.size(); ++t) {
        out << (t + 1) << ',' << series.y[t];
        for (std::size_t j = 0; j < series.num_covariates; ++j) out << ',' << format_double(series.x(t, j));
        out << '\n';
    }
}

void write_chain_csv(std::ostream& out, const ChainOutput& chain) {
    out << "iter";
    for (const auto& name : chain.names) out << ',' << name;
    for (std::size_t coeff : chain.toggleable) out << ",ind_" << chain.names[coeff];
    out << '\n';
    std::string row;
    for (std::size_t i = 0; i < chain.rows; ++i) {
        row = std::to_string(i + 1);
        for (std::size_t j = 0; j < chain.dim; ++j) {
            row += ',';
            row += format_double(chain.draw(i, j));
        }
        for (std::size_t k = 0; k < chain.toggleable.size(); ++k) row += chain.indicator(i, k) ? ",1" : ",0";
        row += '\n';
        out << row;
    }
}

ChainOutput read_chain_csv(std::istream& in) {
    std::string line;
    if (!next_nonblank_line(in, line)) throw FormatError("chain file is empty");
    const auto header = split_row(line);
    if (header.empty() || header[0] != "iter") throw FormatError("chain file must start with an 'iter' column");

    ChainOutput chain;
    std::size_t j = 1;
    for (; j < header.size() && header[j].rfind("ind_", 0) != 0; ++j) chain.names.push_back(header[j]);
    chain.dim = chain.names.size();
    for (; j < header.size(); ++j) {
        if (header[j].rfind("ind_", 0) != 0) throw FormatError("coefficient column after indicator columns");
        const auto name = header[j].substr(4);
        const auto it = std::find(chain.names.begin(), chain.names.end(), name);
        if (it == chain.names.end()) throw FormatError("indicator for unknown coefficient '" + name + "'");
        chain.toggleable.push_back(static_cast<std::size_t>(it - chain.names.begin()));
    }
    chain.counters.assign(chain.dim, MoveCounters{});

    std::size_t lineno = 1;
    while (next_nonblank_line(in, line)) {
        ++lineno;
        const auto cells = split_row(line);
        if (cells.size() != header.size())
            throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                              " fields");
        for (std::size_t c = 1; c <= chain.dim; ++c) chain.draws.push_back(parse_double(cells[c]));
        for (std::size_t c = chain.dim + 1; c < cells.size(); ++c) {
            const auto v = parse_int(cells[c]);
            if (v != 0 && v != 1) throw FormatError("line " + std::to_string(lineno) + ": indicator must be 0 or 1");
            chain.indicators.push_back(static_cast<std::uint8_t>(v));
        }
        ++chain.rows;
    }
    chain.meta.iters = chain.rows;
    return chain;
}

KeyValueFile chain_metadata(const ChainOutput& chain, const Family& family, double c, std::size_t n_obs) {
    const auto& cfg = chain.meta;
    KeyValueFile kv;
    kv.set("format", "garma-chain 1");
    kv.set("family", family.name());
    if (family.kind == FamilyKind::Binomial) kv.set("m", std::to_string(family.m));
    if (family.kind == FamilyKind::NegBinomial) kv.set("k", format_double(family.k));
    kv.set("c", format_double(c));
    kv.set("n_obs", std::to_string(n_obs));
    kv.set("p_max", std::to_string(cfg.p_max));
    kv.set("q_max", std::to_string(cfg.q_max));
    kv.set("iters", std::to_string(cfg.iters));
    kv.set("seed", std::to_string(cfg.seed));
    kv.set("rj_scale", format_double(cfg.rj_scale));
    kv.set("rw_scale", format_double(cfg.rw_scale));
    kv.set("sd_alpha", format_double(cfg.priors.sd_alpha));
    kv.set("sd_phi", format_double(cfg.priors.sd_phi));
    kv.set("sd_theta", format_double(cfg.priors.sd_theta));
    kv.set("sd_beta", format_double(cfg.priors.sd_beta));
    kv.set("inc_prob", format_double(cfg.priors.inc_prob));
    std::string always;
    for (const auto& name : cfg.always_included) always += (always.empty() ? "" : ",") + name;
    kv.set("always_included", always);
    std::string names;
    for (const auto& name : chain.names) names += (names.empty() ? "" : ",") + name;
    kv.set("coefficients", names);
    std::string accept;
    for (std::size_t i = 0; i < chain.dim; ++i) {
        const auto& ct = chain.counters[i];
        accept += (accept.empty() ? "" : ",") + fmt::format("{}:{}/{}:{}/{}", chain.names[i], ct.rj_accepted,
                                                             ct.rj_proposed, ct.rw_accepted, ct.rw_proposed);
    }
    kv.set("acceptance", accept);
    return kv;
}

void write_summary_csv(std::ostream& out, const PosteriorSummary& summary) {
    out << "name,mean,median,sd,hpd_lo,hpd_hi,q_lo,q_hi,ess,geweke_z,incl_freq\n";
    for (const auto& cs : summary.coefficients) {
        out << cs.name << ',' << format_double(cs.mean) << ',' << format_double(cs.median) << ','
            << format_double(cs.sd) << ',' << format_double(cs.hpd.lo) << ',' << format_double(cs.hpd.hi) << ','
            << format_double(cs.quantile.lo) << ',' << format_double(cs.quantile.hi) << ','
            << format_optional(cs.ess) << ',' << format_optional(cs.geweke_z) << ','
            << format_double(cs.incl_freq) << '\n';
    }
}

}  // namespace garma::io
