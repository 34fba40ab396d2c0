#pragma once

#include "pompkit/model.hpp"
#include "pompkit/toy_models.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <vector>

namespace testkit {

using namespace pompkit;

struct Moments {
    double mean = 0.0;
    double var = 0.0;   ///< unbiased
    double se = 0.0;    ///< standard error of the mean
};

inline Moments moments(const std::vector<double>& v)
{
    Moments m;
    const double n = static_cast<double>(v.size());
    m.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) {
        ss += (x - m.mean) * (x - m.mean);
    }
    m.var = v.size() > 1 ? ss / (n - 1.0) : 0.0;
    m.se = std::sqrt(m.var / n);
    return m;
}

class Stopwatch {
public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Weekly toy grid: observations at 1..n, Euler step `dt`.
inline TimeGrid toy_grid(std::size_t n, double dt = 1.0 / 7.0)
{
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i) {
        times[i] = static_cast<double>(i + 1);
    }
    return TimeGrid{0.0, times, dt};
}

inline ObservationSeries simulate_data(const PompModel& model, const ParameterSet& p, const TimeGrid& grid,
                                       std::uint64_t seed)
{
    return simulate(model, p, grid, 1, seed, 1).front().observations;
}

/// Exact log-likelihood of a two-state HMM by the forward recursion.
inline double hmm_forward_loglik(const HmmSpec& s, const ObservationSeries& y)
{
    std::array<double, 2> alpha = s.initial;
    double ll = 0.0;
    for (std::size_t n = 0; n < y.length(); ++n) {
        std::array<double, 2> pred{};
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j) {
                pred[j] += alpha[i] * s.transition[i][j];
            }
        }
        const auto o = static_cast<std::size_t>(y(0, n));
        double c = 0.0;
        for (std::size_t j = 0; j < 2; ++j) {
            pred[j] *= s.emission[j][o];
            c += pred[j];
        }
        ll += std::log(c);
        alpha = {pred[0] / c, pred[1] / c};
    }
    return ll;
}

/// Exact log-likelihood of the scalar linear-Gaussian model by the Kalman filter.
inline double kalman_loglik(const LinearGaussianSpec& s, const ObservationSeries& y)
{
    double m = s.m0;
    double v = s.v0;
    double ll = 0.0;
    for (std::size_t n = 0; n < y.length(); ++n) {
        const double mp = s.a * m;
        const double vp = s.a * s.a * v + s.q;
        const double sv = vp + s.r;
        const double e = y(0, n) - mp;
        ll += -0.5 * std::log(2.0 * M_PI * sv) - 0.5 * e * e / sv;
        const double k = vp / sv;
        m = mp + k * e;
        v = (1.0 - k) * vp;
    }
    return ll;
}

} // namespace testkit
