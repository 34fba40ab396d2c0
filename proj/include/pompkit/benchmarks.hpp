#pragma once

#include "pompkit/core.hpp"

#include <string>
#include <vector>

namespace pompkit {

/// Negative binomial with autoregressive mean alpha + b * y[n-1] and size phi.
struct BenchmarkParams {
    double alpha = 1.0;
    double b = 0.0;
    double phi = 1.0;
    double loglik = 0.0;
};

struct BenchmarkFit {
    std::vector<std::string> units;        ///< one record per entry; "pooled" when fitted jointly
    std::vector<BenchmarkParams> params;
    double loglik = 0.0;
    std::size_t k = 0;                     ///< fitted parameter count
    double aic = 0.0;
    std::vector<std::string> warnings;
};

inline constexpr double kBenchmarkAlphaFloor = 1e-6;

/// Conditional log-likelihood; the first observation and any term with a
/// missing y[n] or y[n-1] contribute nothing.
double benchmark_loglik(std::span<const double> y, double alpha, double b, double phi);

/// Maximum likelihood fit of one series. With `fix_b_zero` the b = 0 restriction is fitted.
BenchmarkParams fit_benchmark_series(std::span<const double> y, bool fix_b_zero = false,
                                     std::vector<std::string>* warnings = nullptr);

/// Independent fits per unit (per_unit) or one parameter set shared by all units.
BenchmarkFit fit_benchmark(const ObservationSeries& data, bool per_unit = true);

/// 2k - 2 loglik.
double aic(double loglik, std::size_t k);

} // namespace pompkit
