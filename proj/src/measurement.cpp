#include "pompkit/measurement.hpp"

#include "pompkit/core.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace pompkit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double nb_log_pmf(double y, double mean, double size)
{
    if (!(y >= 0.0)) {
        throw ValidationError("negative binomial: observation must be nonnegative, got " + std::to_string(y));
    }
    if (!(size > 0.0) || !(mean >= 0.0)) {
        return kNegInf;
    }
    if (mean == 0.0) {
        return y == 0.0 ? 0.0 : kNegInf;
    }
    if (std::isinf(size)) {
        return y * std::log(mean) - mean - std::lgamma(y + 1.0);
    }
    return std::lgamma(y + size) - std::lgamma(size) - std::lgamma(y + 1.0) + size * std::log(size / (size + mean)) +
           y * std::log(mean / (size + mean));
}

double nb_sample(double mean, double size, Rng& rng)
{
    if (!(mean > 0.0)) {
        return 0.0;
    }
    double lambda = mean;
    if (std::isfinite(size)) {
        std::gamma_distribution<double> g(size, mean / size);
        lambda = g(rng);
    }
    if (!(lambda > 0.0)) {
        return 0.0;
    }
    std::poisson_distribution<long long> p(lambda);
    return static_cast<double>(p(rng));
}

double log1p_normal_log_density(double y, double mean, double sd)
{
    if (!(y >= 0.0)) {
        throw ValidationError("log-normal measurement: observation must be nonnegative");
    }
    if (!(sd > 0.0) || !(mean >= 0.0)) {
        return kNegInf;
    }
    const double z = (std::log1p(y) - std::log1p(mean)) / sd;
    return -std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
}

double log1p_normal_sample(double mean, double sd, Rng& rng)
{
    std::normal_distribution<double> n(std::log1p(std::max(mean, 0.0)), sd);
    const double v = std::expm1(n(rng));
    return std::max(0.0, std::round(v));
}

double log1p_normal_quantile(double mean, double sd, double p)
{
    if (sd <= 0.0) {
        return mean;
    }
    boost::math::normal_distribution<double> n(std::log1p(mean), sd);
    return std::expm1(boost::math::quantile(n, p));
}

} // namespace pompkit
