#include "pompkit/spline.hpp"

#include "pompkit/core.hpp"

#include <cmath>

namespace pompkit {

namespace {

// cardinal cubic B-spline supported on [0, 4)
double cardinal_cubic(double u)
{
    if (u < 0.0 || u >= 4.0) {
        return 0.0;
    }
    if (u < 1.0) {
        return u * u * u / 6.0;
    }
    if (u < 2.0) {
        const double v = u - 1.0;
        return (1.0 + 3.0 * v + 3.0 * v * v - 3.0 * v * v * v) / 6.0;
    }
    if (u < 3.0) {
        const double v = 3.0 - u;
        return (1.0 + 3.0 * v + 3.0 * v * v - 3.0 * v * v * v) / 6.0;
    }
    const double v = 4.0 - u;
    return v * v * v / 6.0;
}

} // namespace

std::vector<double> periodic_bspline_basis(double t, int n, double period)
{
    if (n < 4) {
        throw ValidationError("periodic cubic B-spline basis needs at least 4 functions");
    }
    if (!(period > 0.0)) {
        throw ValidationError("spline period must be positive");
    }
    double x = std::fmod(t / period, 1.0);
    if (x < 0.0) {
        x += 1.0;
    }
    const double u = x * n;
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        double shift = u - j;
        if (shift < 0.0) {
            shift += n;
        }
        out[static_cast<std::size_t>(j)] = cardinal_cubic(shift);
    }
    return out;
}

double seasonal_beta(double t, std::span<const double> coef, double zeta, double t0, double tN, double beta_bar)
{
    const auto basis = periodic_bspline_basis(t, static_cast<int>(coef.size()));
    double e = 0.0;
    for (std::size_t j = 0; j < coef.size(); ++j) {
        e += coef[j] * basis[j];
    }
    const double half = 0.5 * (tN - t0);
    const double tbar = half > 0.0 ? (t - 0.5 * (tN + t0)) / half : 0.0;
    return beta_bar * std::exp(e + zeta * tbar);
}

} // namespace pompkit
