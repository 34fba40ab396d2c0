#pragma once

#include "pompkit/haiti_models.hpp"
#include "pompkit/model.hpp"

#include <string>
#include <vector>

namespace pompkit {

struct ForecastOptions {
    std::size_t n_sims = 100;
    std::uint64_t seed = 1;
    std::size_t horizon_weeks = 520;
    std::size_t window_weeks = 52;
    double week = kWeek;                ///< length of one forecast week in model time units
    double euler_step = kDefaultEulerStep;
    int workers = 0;
};

struct ForecastResult {
    std::string scenario = "V0";
    std::string source = "filter";     ///< "filter" or "initial"
    std::size_t sims = 0;
    std::size_t units = 0;
    std::size_t weeks = 0;
    std::vector<double> times;          ///< end of each forecast week
    std::vector<double> infections;     ///< sims x units x weeks, new true infections
    std::vector<double> cases;          ///< sims x units x weeks, simulated reports
    std::vector<std::uint8_t> eliminated;
    double probability = 0.0;

    double infection(std::size_t s, std::size_t u, std::size_t w) const
    {
        return infections[(s * units + u) * weeks + w];
    }
    /// National weekly new infections of simulation s.
    std::vector<double> national(std::size_t s) const;
};

/// True when some run of at least `window` consecutive entries is exactly zero.
bool has_zero_run(std::span<const double> series, std::size_t window);

/// Fraction of simulations with a zero run of national infections; also
/// fills result.eliminated and result.probability.
double elimination_probability(ForecastResult& result, std::size_t window = 52);

/// Builds the forecast model's starting state from a state of another layout:
/// components are matched by name and components absent from the source start at 0.
std::vector<double> map_state(const StateLayout& from, std::span<const double> x, const StateLayout& to);

/// Simulations from t_start. Each starts from a uniformly drawn row of
/// `filter_sample` (laid out per `sample_layout`) and a uniformly drawn entry of
/// `params` (pass likelihood-weighted draws for parameter uncertainty).
ForecastResult forecast_from_filter(const PompModel& model, const std::vector<ParameterSet>& params,
                                    const StateLayout& sample_layout, std::span<const double> filter_sample,
                                    double t_start, const ForecastOptions& options,
                                    const std::string& scenario = "V0");

/// Same, but every simulation starts from the model's own initial-state draw at t_start.
ForecastResult forecast_from_initial(const PompModel& model, const std::vector<ParameterSet>& params,
                                     double t_start, const ForecastOptions& options,
                                     const std::string& scenario = "V0");

struct Projection {
    std::vector<double> times;
    std::size_t units = 0;
    std::size_t weeks = 0;
    std::vector<double> infections;  ///< units x weeks
    std::vector<double> mean;        ///< reported-case mean (rho * C)
    std::vector<double> lower;       ///< 2.5% measurement quantile
    std::vector<double> upper;       ///< 97.5% measurement quantile
};

/// Deterministic skeleton run over `grid` with the log-normal reporting band.
Projection trajectory_projection(const Model2& model, const ParameterSet& params, const TimeGrid& grid);

} // namespace pompkit
