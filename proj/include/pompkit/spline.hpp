#pragma once

#include <span>
#include <vector>

namespace pompkit {

/// Uniform-knot periodic cubic B-spline basis with `n` functions on a period.
/// Knots sit at k * period / n; basis j is centred two knot spans after knot j.
std::vector<double> periodic_bspline_basis(double t, int n, double period = 1.0);

/// Transmission with spline seasonality and a log-linear trend over [t0, tN]:
///   beta(t) = beta_bar * exp(sum_j b_j s_j(t) + zeta * tbar),
///   tbar = (t - (tN + t0)/2) / ((tN - t0)/2).
double seasonal_beta(double t, std::span<const double> coef, double zeta, double t0, double tN, double beta_bar);

} // namespace pompkit
