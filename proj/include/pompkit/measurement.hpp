#pragma once

#include "pompkit/rng.hpp"

namespace pompkit {

/// Negative binomial log pmf with mean m and size psi (variance m + m^2/psi).
/// Mean 0 puts all mass at y = 0.
double nb_log_pmf(double y, double mean, double size);

/// Gamma-Poisson draw with the same parameterization.
double nb_sample(double mean, double size, Rng& rng);

/// Gaussian log density of log(y + 1) with mean log(mean + 1) and sd `sd`.
double log1p_normal_log_density(double y, double mean, double sd);

/// exp(N(log(mean + 1), sd)) - 1, rounded to the nearest nonnegative integer.
double log1p_normal_sample(double mean, double sd, Rng& rng);

/// Quantile of exp(N(log(mean + 1), sd)) - 1.
double log1p_normal_quantile(double mean, double sd, double p);

} // namespace pompkit
