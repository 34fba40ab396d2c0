#include "pompkit/mcap.hpp"

#include "pompkit/rng.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace pompkit {

namespace {

double tricube(double d, double h)
{
    if (!(d < h)) {
        return 0.0;
    }
    const double r = d / h;
    const double c = 1.0 - r * r * r;
    return c * c * c;
}

struct QuadFit {
    Eigen::Vector3d coef;        ///< on (1, x, x^2)
    Eigen::Matrix3d vcov;
    std::size_t positive = 0;
};

/// Weighted least squares of y on (1, x - center, (x - center)^2).
QuadFit weighted_quadratic(const std::vector<ProfilePoint>& pts, const std::vector<double>& w, double center)
{
    Eigen::Matrix3d xtx = Eigen::Matrix3d::Zero();
    Eigen::Vector3d xty = Eigen::Vector3d::Zero();
    QuadFit fit;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] <= 0.0) {
            continue;
        }
        ++fit.positive;
        const double d = pts[i].value - center;
        const Eigen::Vector3d row(1.0, d, d * d);
        xtx += w[i] * row * row.transpose();
        xty += w[i] * pts[i].loglik * row;
    }
    const auto solver = xtx.completeOrthogonalDecomposition();
    fit.coef = solver.solve(xty);
    double rss = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (w[i] <= 0.0) {
            continue;
        }
        const double d = pts[i].value - center;
        const double r = pts[i].loglik - (fit.coef[0] + fit.coef[1] * d + fit.coef[2] * d * d);
        rss += w[i] * r * r;
    }
    const double sigma2 = fit.positive > 3 ? rss / static_cast<double>(fit.positive - 3) : 0.0;
    fit.vcov = sigma2 * solver.pseudoInverse();
    return fit;
}

/// Tricube weights around x0 using the q nearest points. With strict inclusion
/// only points strictly nearer than the q-th distance count and the farthest of
/// them gets weight 0. q grows until the quadratic fit is identified.
std::vector<double> neighbour_weights(const std::vector<ProfilePoint>& pts, double x0, std::size_t q,
                                      bool strict_inclusion)
{
    const std::size_t n = pts.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        dist[i] = std::abs(pts[i].value - x0);
    }
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> w(n, 0.0);
    const std::size_t min_positive = strict_inclusion ? 4 : 3;
    for (q = std::clamp<std::size_t>(q, 1, n);; ++q) {
        std::fill(w.begin(), w.end(), 0.0);
        if (q >= n) {
            const double h = sorted.back() > 0.0 ? sorted.back() * (1.0 + 1e-6) : 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                w[i] = tricube(dist[i], h);
            }
            return w;
        }
        const double limit = sorted[q - 1];
        double h = limit;
        if (strict_inclusion) {
            h = 0.0;
            for (double d : dist) {
                if (d < limit) {
                    h = std::max(h, d);
                }
            }
        }
        std::size_t positive = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!strict_inclusion || dist[i] < limit) {
                w[i] = tricube(dist[i], h);
            }
            positive += w[i] > 0.0;
        }
        if (positive >= min_positive) {
            return w;
        }
    }
}

} // namespace

double loess_quadratic(const std::vector<ProfilePoint>& points, double span, double x0)
{
    if (points.size() < 3) {
        throw ValidationError("local quadratic smoothing needs at least 3 points");
    }
    const auto q = static_cast<std::size_t>(std::floor(static_cast<double>(points.size()) * span));
    const auto w = neighbour_weights(points, x0, q, false);
    return weighted_quadratic(points, w, x0).coef[0];
}

ProfileCurve mcap_ci(const std::vector<ProfilePoint>& raw, const McapOptions& options)
{
    if (!(options.level > 0.0 && options.level < 1.0)) {
        throw ValidationError("confidence level must lie in (0, 1)");
    }
    if (!(options.span > 0.0 && options.span <= 1.0)) {
        throw ValidationError("smoothing span must lie in (0, 1]");
    }
    if (options.grid_points < 2) {
        throw ValidationError("need at least 2 smoothing grid points");
    }
    if (options.mc_variance && !(*options.mc_variance >= 0.0)) {
        throw ValidationError("Monte Carlo variance must be nonnegative");
    }
    ProfileCurve c;
    std::set<double> distinct;
    for (const auto& p : raw) {
        if (std::isfinite(p.value) && std::isfinite(p.loglik)) {
            c.points.push_back(p);
            distinct.insert(p.value);
        }
    }
    if (distinct.size() < 5) {
        throw DataError("profile needs at least 5 distinct parameter values with finite log-likelihoods, got " +
                        std::to_string(distinct.size()));
    }
    c.span = options.span;
    const double lo = *distinct.begin();
    const double hi = *distinct.rbegin();
    const std::size_t G = options.grid_points;
    c.grid.resize(G);
    c.smoothed.resize(G);
    std::size_t best = 0;
    for (std::size_t g = 0; g < G; ++g) {
        c.grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(G - 1);
        c.smoothed[g] = loess_quadratic(c.points, options.span, c.grid[g]);
        if (c.smoothed[g] > c.smoothed[best]) {
            best = g;
        }
    }
    c.mle = c.grid[best];

    // weighted quadratic around the smoothed maximum gives curvature and Monte Carlo error
    const auto q = static_cast<std::size_t>(std::trunc(options.span * static_cast<double>(c.points.size())));
    const auto w = neighbour_weights(c.points, c.mle, q, true);
    const QuadFit fit = weighted_quadratic(c.points, w, c.mle);
    // loglik = c0 + b*d - a*d^2 with d = x - mle; the error of b/(2a) does not depend on the shift
    const double a = -fit.coef[2];
    const double b = fit.coef[1];
    const double var_b = fit.vcov(1, 1);
    const double var_a = fit.vcov(2, 2);
    const double cov_ab = -fit.vcov(1, 2);
    double se_mc2 = 0.0;
    if (options.mc_variance) {
        se_mc2 = *options.mc_variance;
    }
    else if (a > 0.0) {
        se_mc2 = (var_b - 4.0 * b / a * cov_ab + b * b / (a * a) * var_a) / (4.0 * a * a);
        se_mc2 = std::max(se_mc2, 0.0);
    }
    c.quadratic_a = a;
    c.se_mc = std::sqrt(se_mc2);
    c.se_stat = a > 0.0 ? std::sqrt(1.0 / (2.0 * a)) : std::numeric_limits<double>::infinity();
    const double chi = boost::math::quantile(boost::math::chi_squared(1.0), options.level);
    c.cutoff = chi * (std::max(a, 0.0) * se_mc2 + 0.5);

    const double top = c.smoothed[best];
    std::size_t first = G;
    std::size_t last = 0;
    for (std::size_t g = 0; g < G; ++g) {
        if (top - c.smoothed[g] < c.cutoff) {
            first = std::min(first, g);
            last = g;
        }
    }
    c.lower = c.grid[first];
    c.upper = c.grid[last];
    c.lower_open = first == 0;
    c.upper_open = last == G - 1;
    return c;
}

std::vector<double> profile_grid(double lo, double hi, std::size_t n)
{
    if (n == 0 || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw ValidationError("profile grid is empty: need lo <= hi and at least one point");
    }
    if (n == 1) {
        return {lo};
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return g;
}

std::vector<ProfileJob> profile_design(const ParameterSchema& schema, const std::string& parameter,
                                       const std::vector<double>& grid, const std::vector<std::string>& free,
                                       std::size_t replicates, std::uint64_t seed)
{
    if (!schema.contains(parameter)) {
        throw ValidationError("cannot profile unknown parameter '" + parameter + "'");
    }
    if (grid.empty()) {
        throw ValidationError("profile grid is empty");
    }
    if (replicates == 0) {
        throw ValidationError("profile needs at least one replicate per point");
    }
    std::vector<std::string> searched;
    for (const auto& f : free) {
        schema.index_of(f);
        if (f != parameter) {
            searched.push_back(f);
        }
    }
    std::vector<ProfileJob> jobs;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t r = 0; r < replicates; ++r) {
            jobs.push_back({parameter, grid[i], i, r, Rng::derive(seed, Stream::user, {i, r}), searched});
        }
    }
    return jobs;
}

} // namespace pompkit
