#pragma once

#include "pompkit/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pompkit {

struct ProfilePoint {
    double value = 0.0;
    double loglik = 0.0;
};

struct McapOptions {
    double level = 0.95;
    double span = 0.75;
    std::size_t grid_points = 1000;
    /// Replaces the Monte Carlo variance estimated from the quadratic fit.
    std::optional<double> mc_variance;
};

struct ProfileCurve {
    std::vector<ProfilePoint> points;
    std::vector<double> grid;       ///< smoothing abscissae
    std::vector<double> smoothed;   ///< smoothed log-likelihood on `grid`
    double mle = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool lower_open = false;        ///< CI runs into the lowest profiled value
    bool upper_open = false;
    double span = 0.75;
    double cutoff = 0.0;            ///< drop below the smoothed maximum defining the CI
    double quadratic_a = 0.0;       ///< curvature of the local quadratic fit
    double se_mc = 0.0;             ///< Monte Carlo standard error of the MLE
    double se_stat = 0.0;
};

/// Local quadratic regression (tricube weights over the nearest span * n points) evaluated at x0.
double loess_quadratic(const std::vector<ProfilePoint>& points, double span, double x0);

/// Monte Carlo adjusted profile confidence interval.
ProfileCurve mcap_ci(const std::vector<ProfilePoint>& points, const McapOptions& options = {});

struct ProfileJob {
    std::string parameter;
    double value = 0.0;
    std::size_t point = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> free;
};

/// n evenly spaced values on [lo, hi]; throws ValidationError when lo > hi or n == 0.
std::vector<double> profile_grid(double lo, double hi, std::size_t n);

/// One job per (grid value, replicate) with the profiled parameter removed from the free set.
std::vector<ProfileJob> profile_design(const ParameterSchema& schema, const std::string& parameter,
                                       const std::vector<double>& grid, const std::vector<std::string>& free,
                                       std::size_t replicates = 3, std::uint64_t seed = 1);

} // namespace pompkit
