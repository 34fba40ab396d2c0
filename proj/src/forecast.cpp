#include "pompkit/forecast.hpp"

#include "pompkit/measurement.hpp"
#include "pompkit/parallel.hpp"

#include <cmath>
#include <functional>

namespace pompkit {

std::vector<double> ForecastResult::national(std::size_t s) const
{
    std::vector<double> out(weeks, 0.0);
    for (std::size_t u = 0; u < units; ++u) {
        for (std::size_t w = 0; w < weeks; ++w) {
            out[w] += infection(s, u, w);
        }
    }
    return out;
}

bool has_zero_run(std::span<const double> series, std::size_t window)
{
    if (window == 0) {
        throw ValidationError("elimination window must be at least one week");
    }
    std::size_t run = 0;
    for (double v : series) {
        run = v == 0.0 ? run + 1 : 0;
        if (run >= window) {
            return true;
        }
    }
    return false;
}

double elimination_probability(ForecastResult& result, std::size_t window)
{
    if (result.weeks < window) {
        throw ValidationError("forecast horizon of " + std::to_string(result.weeks) +
                              " weeks is shorter than the elimination window of " + std::to_string(window));
    }
    if (result.sims == 0) {
        throw ValidationError("no simulations to assess");
    }
    result.eliminated.assign(result.sims, 0);
    std::size_t count = 0;
    for (std::size_t s = 0; s < result.sims; ++s) {
        const auto nat = result.national(s);
        result.eliminated[s] = has_zero_run(nat, window) ? 1 : 0;
        count += result.eliminated[s];
    }
    result.probability = static_cast<double>(count) / static_cast<double>(result.sims);
    return result.probability;
}

std::vector<double> map_state(const StateLayout& from, std::span<const double> x, const StateLayout& to)
{
    if (x.size() != from.size()) {
        throw ValidationError("state has " + std::to_string(x.size()) + " components but its layout has " +
                              std::to_string(from.size()));
    }
    std::vector<double> out(to.size(), 0.0);
    for (std::size_t i = 0; i < from.size(); ++i) {
        const auto j = to.find(from.names[i]);
        if (!j) {
            throw ValidationError("state component '" + from.names[i] + "' has no counterpart in the forecast model");
        }
        out[*j] = x[i];
    }
    return out;
}

namespace {

using StartFn = std::function<std::vector<double>(std::size_t s, const ParamView& theta, Rng& pick)>;

ForecastResult run_forecast(const PompModel& model, const std::vector<ParameterSet>& params, double t_start,
                            const ForecastOptions& o, const std::string& scenario, const std::string& source,
                            const StartFn& start)
{
    if (o.n_sims == 0) {
        throw ValidationError("forecast needs at least one simulation");
    }
    if (o.horizon_weeks == 0) {
        throw ValidationError("forecast horizon must be positive");
    }
    if (o.window_weeks == 0 || o.window_weeks > o.horizon_weeks) {
        throw ValidationError("forecast horizon of " + std::to_string(o.horizon_weeks) +
                              " weeks does not fit an elimination window of " + std::to_string(o.window_weeks));
    }
    if (params.empty()) {
        throw ValidationError("forecast needs at least one parameter set");
    }
    for (const auto& p : params) {
        model.validate(p);
    }
    const double t_end = t_start + static_cast<double>(o.horizon_weeks) * o.week;
    model.check_covariates(t_start, t_end);

    ForecastResult r;
    r.scenario = scenario;
    r.source = source;
    r.sims = o.n_sims;
    r.units = model.units();
    r.weeks = o.horizon_weeks;
    for (std::size_t w = 0; w < r.weeks; ++w) {
        r.times.push_back(t_start + static_cast<double>(w + 1) * o.week);
    }
    r.infections.assign(r.sims * r.units * r.weeks, 0.0);
    r.cases.assign(r.sims * r.units * r.weeks, 0.0);
    const auto& layout = model.layout();

    parallel_for(r.sims, Execution::openmp, o.workers, [&](std::size_t s) {
        Rng pick(o.seed, Stream::select, {s});
        const auto& p = params[static_cast<std::size_t>(pick.uniform() * static_cast<double>(params.size()))];
        const ParamView theta(p.values());
        std::vector<double> x = start(s, theta, pick);
        double t = t_start;
        for (std::size_t w = 0; w < r.weeks; ++w) {
            reset_accumulators(layout, x);
            Rng proc(o.seed, Stream::process, {s, w});
            advance(model, x, t, r.times[w], o.euler_step, theta, proc);
            t = r.times[w];
            Rng meas(o.seed, Stream::measure, {s, w});
            for (std::size_t u = 0; u < r.units; ++u) {
                const std::size_t at = (s * r.units + u) * r.weeks + w;
                r.infections[at] = model.new_infections(x, u);
                r.cases[at] = model.rmeasure(x, u, theta.unit(u), t, meas);
            }
        }
    });
    elimination_probability(r, o.window_weeks);
    return r;
}

} // namespace

ForecastResult forecast_from_filter(const PompModel& model, const std::vector<ParameterSet>& params,
                                    const StateLayout& sample_layout, std::span<const double> filter_sample,
                                    double t_start, const ForecastOptions& options, const std::string& scenario)
{
    const std::size_t d = sample_layout.size();
    if (d == 0 || filter_sample.empty() || filter_sample.size() % d != 0) {
        throw ValidationError("filter sample is empty or does not match its state layout");
    }
    const std::size_t k = filter_sample.size() / d;
    // map every particle once up front
    std::vector<std::vector<double>> mapped(k);
    for (std::size_t i = 0; i < k; ++i) {
        mapped[i] = map_state(sample_layout, filter_sample.subspan(i * d, d), model.layout());
    }
    return run_forecast(model, params, t_start, options, scenario, "filter",
                        [&](std::size_t, const ParamView&, Rng& pick) {
                            return mapped[static_cast<std::size_t>(pick.uniform() * static_cast<double>(k))];
                        });
}

ForecastResult forecast_from_initial(const PompModel& model, const std::vector<ParameterSet>& params,
                                     double t_start, const ForecastOptions& options, const std::string& scenario)
{
    return run_forecast(model, params, t_start, options, scenario, "initial",
                        [&](std::size_t s, const ParamView& theta, Rng&) {
                            std::vector<double> x(model.layout().size(), 0.0);
                            Rng init(options.seed, Stream::init, {s});
                            model.initialize(x, theta, init);
                            return x;
                        });
}

Projection trajectory_projection(const Model2& model, const ParameterSet& params, const TimeGrid& grid)
{
    grid.validate();
    model.validate(params);
    model.check_covariates(grid.t0, grid.end());
    const double psi = params.get("psi");
    const auto& layout = model.layout();
    Projection pr;
    pr.times = grid.obs_times;
    pr.units = model.units();
    pr.weeks = grid.size();
    const std::size_t n = pr.units * pr.weeks;
    pr.infections.resize(n);
    pr.mean.resize(n);
    pr.lower.resize(n);
    pr.upper.resize(n);

    std::vector<double> x(layout.size(), 0.0);
    const ParamView theta(params.values());
    Rng rng(0);
    model.initialize(x, theta, rng);
    double t = grid.t0;
    for (std::size_t w = 0; w < pr.weeks; ++w) {
        reset_accumulators(layout, x);
        advance(model, x, t, grid.obs_times[w], grid.euler_step, theta, rng);
        t = grid.obs_times[w];
        for (std::size_t u = 0; u < pr.units; ++u) {
            const std::size_t at = u * pr.weeks + w;
            const double m = model.measurement_mean(x, u, theta.unit(u), t);
            pr.infections[at] = model.new_infections(x, u);
            pr.mean[at] = m;
            pr.lower[at] = log1p_normal_quantile(m, psi, 0.025);
            pr.upper[at] = log1p_normal_quantile(m, psi, 0.975);
        }
    }
    return pr;
}

} // namespace pompkit
