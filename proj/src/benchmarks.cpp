#include "pompkit/benchmarks.hpp"

#include "pompkit/measurement.hpp"
#include "pompkit/optimize.hpp"

#include <cmath>
#include <limits>

namespace pompkit {

double benchmark_loglik(std::span<const double> y, double alpha, double b, double phi)
{
    double ll = 0.0;
    for (std::size_t n = 1; n < y.size(); ++n) {
        if (is_missing(y[n]) || is_missing(y[n - 1])) {
            continue;
        }
        ll += nb_log_pmf(y[n], alpha + b * y[n - 1], phi);
    }
    return ll;
}

namespace {

struct SeriesSet {
    std::vector<std::span<const double>> series;

    double loglik(double alpha, double b, double phi) const
    {
        double ll = 0.0;
        for (const auto& s : series) {
            ll += benchmark_loglik(s, alpha, b, phi);
        }
        return ll;
    }
};

double mean_observed(const SeriesSet& set, std::size_t* count)
{
    double sum = 0.0;
    std::size_t c = 0;
    for (const auto& s : set.series) {
        for (double v : s) {
            if (!is_missing(v)) {
                sum += v;
                ++c;
            }
        }
    }
    *count = c;
    return c ? sum / static_cast<double>(c) : 0.0;
}

BenchmarkParams fit_set(const SeriesSet& set, bool fix_b_zero, std::vector<std::string>* warnings,
                        const std::string& label)
{
    std::size_t terms = 0;
    for (const auto& s : set.series) {
        if (s.size() < 3) {
            throw DataError("benchmark fit for " + label + " needs at least 3 observations");
        }
        for (std::size_t n = 1; n < s.size(); ++n) {
            terms += !is_missing(s[n]) && !is_missing(s[n - 1]);
        }
    }
    if (terms == 0) {
        throw DataError("benchmark fit for " + label + " has no consecutive observed pairs");
    }
    std::size_t count = 0;
    const double mean = mean_observed(set, &count);
    BenchmarkParams out;
    if (mean == 0.0) {
        if (warnings) {
            warnings->push_back(label + ": all observations are zero; alpha pinned at " +
                                std::to_string(kBenchmarkAlphaFloor));
        }
        out.alpha = kBenchmarkAlphaFloor;
        out.b = 0.0;
        out.phi = 1.0;
        out.loglik = set.loglik(out.alpha, out.b, out.phi);
        return out;
    }

    // search scale: log alpha, log phi, and log b unless b is fixed at zero
    const std::function<double(std::span<const double>)> restricted = [&](std::span<const double> x) {
        return set.loglik(std::exp(x[0]), 0.0, std::exp(x[1]));
    };
    const auto r = maximize(restricted, {std::log(mean), 0.0});
    out.alpha = std::max(std::exp(r.x[0]), kBenchmarkAlphaFloor);
    out.b = 0.0;
    out.phi = std::exp(r.x[1]);
    out.loglik = set.loglik(out.alpha, out.b, out.phi);
    if (fix_b_zero) {
        return out;
    }

    const std::function<double(std::span<const double>)> full = [&](std::span<const double> x) {
        return set.loglik(std::exp(x[0]), std::exp(x[1]), std::exp(x[2]));
    };
    for (double b0 : {0.5, 0.05}) {
        const auto f = maximize(full, {std::log(std::max(mean * (1.0 - b0), kBenchmarkAlphaFloor)), std::log(b0),
                                       std::log(out.phi)});
        const double a = std::max(std::exp(f.x[0]), kBenchmarkAlphaFloor);
        const double ll = set.loglik(a, std::exp(f.x[1]), std::exp(f.x[2]));
        // the b = 0 boundary is part of the parameter space
        if (ll > out.loglik) {
            out = {a, std::exp(f.x[1]), std::exp(f.x[2]), ll};
        }
    }
    return out;
}

} // namespace

BenchmarkParams fit_benchmark_series(std::span<const double> y, bool fix_b_zero, std::vector<std::string>* warnings)
{
    SeriesSet set{{y}};
    return fit_set(set, fix_b_zero, warnings, "series");
}

BenchmarkFit fit_benchmark(const ObservationSeries& data, bool per_unit)
{
    BenchmarkFit fit;
    if (data.units() == 0) {
        throw DataError("benchmark fit needs at least one unit");
    }
    if (per_unit) {
        for (std::size_t u = 0; u < data.units(); ++u) {
            SeriesSet set{{data.row(u)}};
            fit.units.push_back(data.unit_names()[u]);
            fit.params.push_back(fit_set(set, false, &fit.warnings, data.unit_names()[u]));
        }
    }
    else {
        SeriesSet set;
        for (std::size_t u = 0; u < data.units(); ++u) {
            set.series.push_back(data.row(u));
        }
        fit.units.push_back("pooled");
        fit.params.push_back(fit_set(set, false, &fit.warnings, "pooled series"));
    }
    fit.loglik = 0.0;
    for (const auto& p : fit.params) {
        fit.loglik += p.loglik;
    }
    fit.k = 3 * fit.params.size();
    fit.aic = aic(fit.loglik, fit.k);
    return fit;
}

double aic(double loglik, std::size_t k)
{
    return 2.0 * static_cast<double>(k) - 2.0 * loglik;
}

} // namespace pompkit
