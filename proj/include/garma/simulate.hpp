#pragma once

#include "garma/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace garma {

/// A deterministic covariate evaluated at the one-based generation index.
struct SimCovariate {
    std::string name;
    std::function<double(std::size_t)> value;
};

SimCovariate trend_covariate();
SimCovariate log_trend_covariate();
/// 0 up to and including index `last_before`, 1 afterwards.
SimCovariate step_covariate(std::size_t last_before);

struct SimSpec {
    Family family;
    ParamState params;
    std::size_t n = 1000;
    std::size_t warmup = 100;
    std::uint64_t seed = 1;
    double c = 0.3;
    std::vector<SimCovariate> covariates;  // must match params.shape().r
};

/// Raised when the conditional mean stops being finite during generation.
class SimulationError : public std::runtime_error {
public:
    SimulationError(std::size_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/**
 * @brief Draws a GARMA(p,q) count series.
 *
 * Runs the predictor recursion forward over warmup + n steps, drawing
 * y_t from the family at each step, and keeps the last n draws. Covariates
 * are evaluated at the generation index, so retained rows carry the values
 * at indices warmup+1 .. warmup+n.
 */
[[nodiscard]] CountSeries simulate_garma(const SimSpec& spec);

}  // namespace garma
