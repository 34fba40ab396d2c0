#pragma once

#include "pompkit/model.hpp"

#include <functional>

namespace pompkit {

struct NelderMeadOptions {
    double initial_step = 0.1;     ///< simplex edge on the search scale
    double size_tolerance = 1e-10; ///< stop when the simplex characteristic size drops below this
    std::size_t max_iterations = 20000;
    std::size_t max_restarts = 10; ///< fresh simplices around the incumbent until no improvement
    double restart_tolerance = 1e-9;
};

struct OptimResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
};

/// Maximizes f with restarted Nelder-Mead (GSL nmsimplex2). Non-finite values
/// are treated as a very poor objective.
OptimResult maximize(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                     const NelderMeadOptions& options = {});

/// Log-likelihood of a deterministic model: one skeleton run, summed measurement densities.
double skeleton_loglik(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                       const TimeGrid& grid);

struct TrajectoryMatchResult {
    ParameterSet estimate;
    double loglik = 0.0;
    double start_loglik = 0.0;
    std::size_t evaluations = 0;
};

/// Maximizes skeleton_loglik over `free` parameters on the estimation scale.
TrajectoryMatchResult trajectory_match(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid,
                                       const ParameterSet& start, const std::vector<std::string>& free,
                                       const NelderMeadOptions& options = {});

} // namespace pompkit
