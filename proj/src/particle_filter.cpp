#include "pompkit/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pompkit {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
} // namespace

Blocks unit_blocks(std::size_t units)
{
    Blocks b(units);
    for (std::size_t u = 0; u < units; ++u) {
        b[u] = {u};
    }
    return b;
}

Blocks single_block(std::size_t units)
{
    Blocks b(1);
    b[0].resize(units);
    std::iota(b[0].begin(), b[0].end(), std::size_t{0});
    return b;
}

void validate_blocks(const Blocks& blocks, std::size_t units)
{
    if (blocks.empty()) {
        throw ValidationError("at least one block is required");
    }
    std::vector<int> seen(units, 0);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) {
            throw ValidationError("block " + std::to_string(b) + " is empty");
        }
        for (auto u : blocks[b]) {
            if (u >= units) {
                throw ValidationError("block " + std::to_string(b) + " names unit " + std::to_string(u) +
                                      " but there are only " + std::to_string(units));
            }
            if (seen[u]++) {
                throw ValidationError("unit " + std::to_string(u) + " appears in more than one block");
            }
        }
    }
    for (std::size_t u = 0; u < units; ++u) {
        if (!seen[u]) {
            throw ValidationError("unit " + std::to_string(u) + " is not in any block");
        }
    }
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t count, double u)
{
    const std::size_t n = weights.size();
    if (n == 0) {
        throw ValidationError("systematic_resample: no weights");
    }
    double total = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) {
            throw NumericalError("systematic_resample: weights must be finite and nonnegative");
        }
        total += weights[i];
        if (weights[i] > 0.0) {
            last_positive = i;
        }
    }
    if (!(total > 0.0)) {
        throw NumericalError("systematic_resample: all weights are zero");
    }
    std::vector<std::size_t> out(count);
    const double step = total / static_cast<double>(count);
    double cum = weights[0];
    std::size_t i = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double pos = (static_cast<double>(k) + u) * step;
        while (cum < pos && i + 1 < n) {
            ++i;
            cum += weights[i];
        }
        // rounding in the cumulative sum can leave pos just past the end
        out[k] = weights[i] > 0.0 ? i : last_positive;
    }
    return out;
}

double effective_sample_size(std::span<const double> weights)
{
    double s = 0.0;
    double s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

PfResult particle_filter(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                         const TimeGrid& grid, const FilterOptions& options)
{
    return detail::run_filter(model, params, data, grid, options, nullptr, {});
}

namespace detail {

PfResult run_filter(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                    const TimeGrid& grid, const FilterOptions& options, ParamSwarm* swarm, const Perturbation& perturb)
{
    const std::size_t J = options.particles;
    if (J == 0) {
        throw ValidationError("particle filter needs at least one particle");
    }
    grid.validate();
    model.validate(params);
    const std::size_t U = model.units();
    const std::size_t N = grid.size();
    if (data.units() != U) {
        throw DataError("observations have " + std::to_string(data.units()) + " units but the model has " +
                        std::to_string(U));
    }
    if (data.length() != N) {
        throw DataError("observations have " + std::to_string(data.length()) + " times but the grid has " +
                        std::to_string(N));
    }
    for (std::size_t n = 0; n < N; ++n) {
        if (std::abs(data.times()[n] - grid.obs_times[n]) > 1e-9) {
            throw DataError("observation time " + std::to_string(n) + " does not match the time grid");
        }
    }
    model.check_covariates(grid.t0, grid.end());

    const Blocks blocks = options.blocks.empty() ? single_block(U) : options.blocks;
    validate_blocks(blocks, U);
    const std::size_t B = blocks.size();
    const auto& layout = model.layout();
    const std::size_t D = layout.size();

    std::vector<std::size_t> block_of(U);
    for (std::size_t b = 0; b < B; ++b) {
        for (auto u : blocks[b]) {
            block_of[u] = b;
        }
    }
    std::vector<std::vector<std::size_t>> block_comps(B);
    for (std::size_t i = 0; i < D; ++i) {
        const int u = layout.unit[i];
        if (u == kGlobal) {
            if (B > 1) {
                throw ValidationError("state component '" + layout.names[i] +
                                      "' belongs to no unit and cannot be split across blocks");
            }
            block_comps[0].push_back(i);
        }
        else {
            block_comps[block_of[static_cast<std::size_t>(u)]].push_back(i);
        }
    }

    const std::size_t P = params.size();
    std::vector<std::size_t> unit_offset(U);
    if (swarm) {
        if (swarm->width != P || swarm->blocks != B || swarm->natural.size() != J * B * P ||
            swarm->estimation.size() != J * B * P) {
            throw ValidationError("parameter swarm does not match particles, blocks and schema");
        }
        for (std::size_t u = 0; u < U; ++u) {
            unit_offset[u] = block_of[u] * P;
        }
    }
    auto view = [&](std::size_t j) {
        if (swarm) {
            return ParamView(swarm->natural.data() + j * B * P, P, unit_offset.data());
        }
        return ParamView(params.values());
    };

    const std::size_t K = options.sample_size ? options.sample_size : J;

    PfResult res;
    res.blocks = B;
    res.state_dim = D;
    res.cond_logliks.assign(N, 0.0);
    res.ess.assign(N, static_cast<double>(J));
    res.block_cond_logliks.assign(B * N, 0.0);
    res.block_ess.assign(B * N, static_cast<double>(J));

    std::vector<double> x(J * D, 0.0);
    std::vector<double> xn(J * D, 0.0);
    std::vector<double> lw(B * J, 0.0);
    std::vector<double> w(J);
    std::vector<std::vector<std::size_t>> anc(B);
    std::vector<double> swarm_scratch;

    double t = grid.t0;
    for (std::size_t n = 0; n < N; ++n) {
        if (perturb) {
            perturb(n, *swarm);
        }
        const double t_next = grid.obs_times[n];
        parallel_for(J, options.execution, options.workers, [&](std::size_t j) {
            std::span<double> xj(x.data() + j * D, D);
            const ParamView theta = view(j);
            if (n == 0) {
                Rng init(options.seed, Stream::init, {j});
                model.initialize(xj, theta, init);
            }
            reset_accumulators(layout, xj);
            Rng proc(options.seed, Stream::process, {n, j});
            advance(model, xj, t, t_next, grid.euler_step, theta, proc);
            for (std::size_t b = 0; b < B; ++b) {
                double s = 0.0;
                for (auto u : blocks[b]) {
                    const double y = data(u, n);
                    if (is_missing(y)) {
                        continue;
                    }
                    s += model.dmeasure(xj, u, y, theta.unit(u), t_next);
                }
                lw[b * J + j] = std::isnan(s) ? kNegInf : s;
            }
        });
        t = t_next;

        const bool last = n + 1 == N;
        for (std::size_t b = 0; b < B; ++b) {
            bool observed = false;
            for (auto u : blocks[b]) {
                observed = observed || !is_missing(data(u, n));
            }
            if (!observed) {
                std::fill(w.begin(), w.end(), 1.0);
            }
            else {
                const auto row = std::span<const double>(lw).subspan(b * J, J);
                const double mx = *std::max_element(row.begin(), row.end());
                if (mx == kNegInf || std::isnan(mx)) {
                    res.failure_index = n;
                    res.block_cond_logliks[b * N + n] = kNegInf;
                    res.cond_logliks[n] = kNegInf;
                    res.loglik = kNegInf;
                    res.filter_sample.clear();
                    return res;
                }
                double sum = 0.0;
                for (std::size_t j = 0; j < J; ++j) {
                    w[j] = std::exp(row[j] - mx);
                    sum += w[j];
                }
                res.block_cond_logliks[b * N + n] = mx + std::log(sum / static_cast<double>(J));
                res.block_ess[b * N + n] = effective_sample_size(w);
            }
            if (last) {
                Rng pick(options.seed, Stream::select, {b});
                const auto chosen = systematic_resample(w, K, pick.uniform());
                if (b == 0) {
                    res.filter_sample.assign(K * D, 0.0);
                }
                for (std::size_t k = 0; k < K; ++k) {
                    for (auto i : block_comps[b]) {
                        res.filter_sample[k * D + i] = x[chosen[k] * D + i];
                    }
                }
            }
            if (observed) {
                Rng rs(options.seed, Stream::resample, {n, b});
                anc[b] = systematic_resample(w, J, rs.uniform());
            }
            else {
                anc[b].resize(J);
                std::iota(anc[b].begin(), anc[b].end(), std::size_t{0});
            }
        }

        parallel_for(J, options.execution, options.workers, [&](std::size_t j) {
            for (std::size_t b = 0; b < B; ++b) {
                const std::size_t a = anc[b][j];
                for (auto i : block_comps[b]) {
                    xn[j * D + i] = x[a * D + i];
                }
            }
        });
        x.swap(xn);

        if (swarm) {
            for (auto* vec : {&swarm->natural, &swarm->estimation}) {
                swarm_scratch.resize(vec->size());
                for (std::size_t j = 0; j < J; ++j) {
                    for (std::size_t b = 0; b < B; ++b) {
                        const double* src = vec->data() + (anc[b][j] * B + b) * P;
                        std::copy(src, src + P, swarm_scratch.begin() + static_cast<std::ptrdiff_t>((j * B + b) * P));
                    }
                }
                vec->swap(swarm_scratch);
            }
        }

        double total = 0.0;
        double min_ess = static_cast<double>(J);
        for (std::size_t b = 0; b < B; ++b) {
            total += res.block_cond_logliks[b * N + n];
            min_ess = std::min(min_ess, res.block_ess[b * N + n]);
        }
        res.cond_logliks[n] = total;
        res.ess[n] = min_ess;
    }
    res.loglik = std::accumulate(res.cond_logliks.begin(), res.cond_logliks.end(), 0.0);
    return res;
}

} // namespace detail

} // namespace pompkit
