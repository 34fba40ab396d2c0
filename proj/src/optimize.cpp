#include "pompkit/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <limits>
#include <memory>

namespace pompkit {

namespace {

constexpr double kPenalty = 1e100;

struct Objective {
    const std::function<double(std::span<const double>)>* f;
    std::size_t evaluations = 0;
};

double gsl_objective(const gsl_vector* v, void* params)
{
    auto* obj = static_cast<Objective*>(params);
    ++obj->evaluations;
    const double val = (*obj->f)(std::span<const double>(v->data, v->size));
    return std::isfinite(val) ? -val : kPenalty;
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

/// One simplex run from x; returns the minimum of the negated objective.
double simplex_run(Objective& obj, std::vector<double>& x, const NelderMeadOptions& o)
{
    const std::size_t n = x.size();
    std::unique_ptr<gsl_vector, VectorDeleter> start(gsl_vector_alloc(n));
    std::unique_ptr<gsl_vector, VectorDeleter> step(gsl_vector_alloc(n));
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(start.get(), i, x[i]);
    }
    gsl_vector_set_all(step.get(), o.initial_step);

    gsl_multimin_function fn{&gsl_objective, n, &obj};
    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
    gsl_multimin_fminimizer_set(m.get(), &fn, start.get(), step.get());

    for (std::size_t it = 0; it < o.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) {
            break;
        }
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()), o.size_tolerance) == GSL_SUCCESS) {
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(m.get());
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = gsl_vector_get(best, i);
    }
    return gsl_multimin_fminimizer_minimum(m.get());
}

} // namespace

OptimResult maximize(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                     const NelderMeadOptions& options)
{
    gsl_set_error_handler_off();
    Objective obj{&f};
    OptimResult res;
    if (x0.empty()) {
        res.x = x0;
        res.value = f(res.x);
        res.evaluations = 1;
        return res;
    }
    double best = simplex_run(obj, x0, options);
    std::size_t r = 0;
    for (; r < options.max_restarts; ++r) {
        std::vector<double> x = x0;
        const double v = simplex_run(obj, x, options);
        const bool improved = v < best - options.restart_tolerance * (1.0 + std::abs(best));
        if (v <= best) {
            best = v;
            x0 = x;
        }
        if (!improved) {
            break;
        }
    }
    res.x = std::move(x0);
    res.value = best >= kPenalty ? -std::numeric_limits<double>::infinity() : -best;
    res.evaluations = obj.evaluations;
    res.restarts = r;
    return res;
}

double skeleton_loglik(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                       const TimeGrid& grid)
{
    if (!model.deterministic()) {
        throw ValidationError("skeleton log-likelihood needs a deterministic model; " + model.name() + " is stochastic");
    }
    grid.validate();
    model.validate(params);
    if (data.units() != model.units() || data.length() != grid.size()) {
        throw DataError("observations do not match the model units and time grid");
    }
    model.check_covariates(grid.t0, grid.end());
    const auto& layout = model.layout();
    std::vector<double> x(layout.size(), 0.0);
    const ParamView theta(params.values());
    Rng rng(0);
    model.initialize(x, theta, rng);
    double t = grid.t0;
    double ll = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
        reset_accumulators(layout, x);
        advance(model, x, t, grid.obs_times[n], grid.euler_step, theta, rng);
        t = grid.obs_times[n];
        for (std::size_t u = 0; u < model.units(); ++u) {
            const double y = data(u, n);
            if (!is_missing(y)) {
                ll += model.dmeasure(x, u, y, theta.unit(u), t);
            }
        }
    }
    return std::isnan(ll) ? -std::numeric_limits<double>::infinity() : ll;
}

TrajectoryMatchResult trajectory_match(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid,
                                       const ParameterSet& start, const std::vector<std::string>& free,
                                       const NelderMeadOptions& options)
{
    const auto& schema = start.schema();
    std::vector<std::size_t> idx;
    for (const auto& name : free) {
        idx.push_back(schema.index_of(name));
        start.check_estimable(name);
    }
    TrajectoryMatchResult res;
    res.estimate = start;
    res.start_loglik = skeleton_loglik(model, start, data, grid);
    if (!std::isfinite(res.start_loglik)) {
        std::string names;
        for (const auto& nm : free) {
            names += (names.empty() ? "" : ", ") + nm + "=" + std::to_string(start.get(nm));
        }
        throw NumericalError("log-likelihood is not finite at the starting parameters (free: " +
                             (names.empty() ? std::string("none") : names) + ")");
    }
    res.loglik = res.start_loglik;
    if (idx.empty()) {
        return res;
    }

    const auto est = start.estimation_values();
    std::vector<double> x0;
    for (auto i : idx) {
        x0.push_back(est[i]);
    }
    auto unpack = [&](std::span<const double> x) {
        ParameterSet p = start;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            p[idx[k]] = to_natural(schema[idx[k]].transform, x[k]);
        }
        return p;
    };
    const std::function<double(std::span<const double>)> f = [&](std::span<const double> x) {
        try {
            return skeleton_loglik(model, unpack(x), data, grid);
        }
        catch (const ValidationError&) {
            return -std::numeric_limits<double>::infinity();
        }
        catch (const NumericalError&) {
            return -std::numeric_limits<double>::infinity();
        }
    };
    const OptimResult opt = maximize(f, x0, options);
    res.evaluations = opt.evaluations;
    if (opt.value >= res.start_loglik) {
        res.estimate = unpack(opt.x);
        res.loglik = opt.value;
    }
    return res;
}

} // namespace pompkit
