#include "pompkit/iterated_filter.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace pompkit {

void If2Settings::validate(const ParameterSchema& schema) const
{
    if (particles == 0) {
        throw ValidationError("iterated filtering needs at least one particle");
    }
    if (iterations == 0) {
        throw ValidationError("iterated filtering needs at least one iteration");
    }
    if (!(cooling_fraction > 0.0 && cooling_fraction <= 1.0)) {
        throw ValidationError("cooling fraction must lie in (0, 1]");
    }
    for (const auto& [name, sd] : rw_sd) {
        if (!schema.contains(name)) {
            throw ValidationError("random-walk sd given for unknown parameter '" + name + "'");
        }
        if (!(sd >= 0.0) || !std::isfinite(sd)) {
            throw ValidationError("random-walk sd for '" + name + "' must be finite and nonnegative");
        }
    }
}

ParameterSet If2Result::swarm_member(std::size_t j) const
{
    const std::size_t p = estimate.size();
    return ParameterSet(estimate.schema_ptr(), std::vector<double>(swarm.begin() + static_cast<std::ptrdiff_t>(j * p),
                                                                   swarm.begin() + static_cast<std::ptrdiff_t>((j + 1) * p)));
}

double cooling_factor(double cooling_fraction, std::size_t m, std::size_t n, std::size_t N)
{
    const double e = (static_cast<double>(m) * static_cast<double>(N) + static_cast<double>(n)) /
                     (50.0 * static_cast<double>(N));
    return std::pow(cooling_fraction, e);
}

namespace {

double evaluate(const PompModel& model, const ParameterSet& p, const ObservationSeries& data, const TimeGrid& grid,
                const If2Settings& s, const Blocks& blocks, std::uint64_t seed)
{
    FilterOptions fo;
    fo.particles = s.eval_particles ? s.eval_particles : s.particles;
    fo.seed = seed;
    fo.sample_size = 1;
    fo.blocks = blocks;
    fo.execution = s.execution;
    fo.workers = s.workers;
    try {
        return particle_filter(model, p, data, grid, fo).loglik;
    }
    catch (const ValidationError&) {
        // the center wandered outside a model constraint (e.g. a negative noise sd)
        return -std::numeric_limits<double>::infinity();
    }
}

If2Result iterate(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid,
                  const ParameterSet& start, const If2Settings& s, const Blocks& blocks, std::uint64_t seed)
{
    const auto& schema = start.schema();
    s.validate(schema);
    model.validate(start);
    validate_blocks(blocks, model.units());

    const std::size_t J = s.particles;
    const std::size_t B = blocks.size();
    const std::size_t P = start.size();
    const std::size_t N = grid.size();

    std::vector<double> sd(P, 0.0);
    for (const auto& [name, v] : s.rw_sd) {
        sd[schema.index_of(name)] = v;
        if (v > 0.0) {
            start.check_estimable(name);
        }
    }
    std::vector<std::size_t> block_of(model.units());
    for (std::size_t b = 0; b < B; ++b) {
        for (auto u : blocks[b]) {
            block_of[u] = b;
        }
    }

    If2Result res;
    res.estimate = start;
    res.trace.push_back(evaluate(model, start, data, grid, s, blocks, Rng::derive(seed, Stream::evaluate, {0})));

    detail::ParamSwarm swarm;
    swarm.width = P;
    swarm.blocks = B;
    {
        const auto est = start.estimation_values();
        swarm.estimation.resize(J * B * P);
        swarm.natural.resize(J * B * P);
        for (std::size_t r = 0; r < J * B; ++r) {
            std::copy(est.begin(), est.end(), swarm.estimation.begin() + static_cast<std::ptrdiff_t>(r * P));
            std::copy(start.values().begin(), start.values().end(),
                      swarm.natural.begin() + static_cast<std::ptrdiff_t>(r * P));
        }
    }

    FilterOptions fo;
    fo.particles = J;
    fo.sample_size = 1;
    fo.blocks = blocks;
    fo.execution = s.execution;
    fo.workers = s.workers;

    for (std::size_t m = 0; m < s.iterations; ++m) {
        const std::uint64_t pass_seed = Rng::derive(seed, Stream::user, {m});
        fo.seed = pass_seed;
        const detail::Perturbation perturb = [&](std::size_t n, detail::ParamSwarm& sw) {
            const double factor = cooling_factor(s.cooling_fraction, m, n, N);
            parallel_for(J, s.execution, s.workers, [&](std::size_t j) {
                for (std::size_t b = 0; b < B; ++b) {
                    Rng rng(pass_seed, Stream::perturb, {n, j, b});
                    double* est = sw.estimation.data() + (j * B + b) * P;
                    double* nat = sw.natural.data() + (j * B + b) * P;
                    for (std::size_t p = 0; p < P; ++p) {
                        if (sd[p] > 0.0) {
                            est[p] += sd[p] * factor * rng.normal();
                            nat[p] = to_natural(schema[p].transform, est[p]);
                        }
                    }
                }
            });
        };

        const PfResult pass = detail::run_filter(model, start, data, grid, fo, &swarm, perturb);
        if (pass.failure_index) {
            res.aborted = true;
            res.failure_index = pass.failure_index;
            break;
        }

        // reconcile block copies
        if (B > 1) {
            for (std::size_t j = 0; j < J; ++j) {
                double* rows = swarm.estimation.data() + j * B * P;
                for (std::size_t p = 0; p < P; ++p) {
                    if (sd[p] == 0.0) {
                        continue;
                    }
                    double v;
                    if (schema[p].unit == kShared) {
                        v = 0.0;
                        for (std::size_t b = 0; b < B; ++b) {
                            v += rows[b * P + p];
                        }
                        v /= static_cast<double>(B);
                    }
                    else {
                        v = rows[block_of[static_cast<std::size_t>(schema[p].unit)] * P + p];
                    }
                    const double nat = to_natural(schema[p].transform, v);
                    for (std::size_t b = 0; b < B; ++b) {
                        rows[b * P + p] = v;
                        swarm.natural[(j * B + b) * P + p] = nat;
                    }
                }
            }
        }

        ParameterSet center = start;
        for (std::size_t p = 0; p < P; ++p) {
            if (sd[p] == 0.0) {
                continue;
            }
            double mean = 0.0;
            for (std::size_t j = 0; j < J; ++j) {
                mean += swarm.estimation[j * B * P + p];
            }
            mean /= static_cast<double>(J);
            center[p] = to_natural(schema[p].transform, mean);
        }
        res.estimate = center;
        res.completed = m + 1;
        res.trace.push_back(
            evaluate(model, center, data, grid, s, blocks, Rng::derive(seed, Stream::evaluate, {m + 1})));
    }

    res.swarm.resize(J * P);
    for (std::size_t j = 0; j < J; ++j) {
        const double* row = swarm.natural.data() + j * B * P;
        std::copy(row, row + P, res.swarm.begin() + static_cast<std::ptrdiff_t>(j * P));
    }
    return res;
}

} // namespace

If2Result if2(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid, const ParameterSet& start,
              const If2Settings& settings, std::uint64_t seed)
{
    return iterate(model, data, grid, start, settings, single_block(model.units()), seed);
}

If2Result ibpf(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid,
               const ParameterSet& start, const IbpfSettings& settings, std::uint64_t seed)
{
    const Blocks blocks = settings.blocks.empty() ? unit_blocks(model.units()) : settings.blocks;
    return iterate(model, data, grid, start, settings, blocks, seed);
}

std::vector<ParameterSet> sample_params_by_likelihood(const std::vector<ParameterSet>& candidates,
                                                      std::span<const double> logliks, std::size_t K,
                                                      std::uint64_t seed)
{
    if (candidates.empty() || candidates.size() != logliks.size()) {
        throw ValidationError("need one log-likelihood per candidate parameter set");
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logliks) {
        if (std::isfinite(l)) {
            mx = std::max(mx, l);
        }
        else if (!(l == -std::numeric_limits<double>::infinity())) {
            throw ValidationError("candidate log-likelihoods must be finite or -inf");
        }
    }
    if (!std::isfinite(mx)) {
        throw NumericalError("every candidate has log-likelihood -inf");
    }
    std::vector<double> w(logliks.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = std::exp(logliks[i] - mx);
    }
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    Rng rng(seed, Stream::select, {0});
    std::vector<ParameterSet> out;
    out.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        out.push_back(candidates[pick(rng)]);
    }
    return out;
}

} // namespace pompkit
