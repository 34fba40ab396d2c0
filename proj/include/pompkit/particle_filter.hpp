#pragma once

#include "pompkit/model.hpp"
#include "pompkit/parallel.hpp"

#include <functional>
#include <optional>

namespace pompkit {

using Blocks = std::vector<std::vector<std::size_t>>;

/// One block per unit.
Blocks unit_blocks(std::size_t units);
/// A single block holding every unit.
Blocks single_block(std::size_t units);
/// Throws ValidationError unless `blocks` partitions 0..units-1.
void validate_blocks(const Blocks& blocks, std::size_t units);

struct FilterOptions {
    std::size_t particles = 1000;
    std::uint64_t seed = 1;
    std::size_t sample_size = 0;   ///< filter-sample draws; 0 means `particles`
    Blocks blocks;                 ///< empty: ordinary (single-block) filter
    Execution execution = Execution::openmp;
    int workers = 0;               ///< 0: OpenMP default
};

struct PfResult {
    double loglik = 0.0;
    std::vector<double> cond_logliks;        ///< per observation time
    std::vector<double> ess;                 ///< per time; minimum over blocks
    std::size_t blocks = 1;
    std::vector<double> block_cond_logliks;  ///< blocks x N
    std::vector<double> block_ess;           ///< blocks x N
    std::size_t state_dim = 0;
    std::vector<double> filter_sample;       ///< K x D draws from the final filtering distribution
    std::optional<std::size_t> failure_index;

    std::size_t sample_count() const { return state_dim ? filter_sample.size() / state_dim : 0; }
    std::span<const double> sample(std::size_t k) const
    {
        return std::span<const double>(filter_sample).subspan(k * state_dim, state_dim);
    }
};

/// Bootstrap particle filter with systematic resampling (independently per
/// block when blocks are given).
PfResult particle_filter(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                         const TimeGrid& grid, const FilterOptions& options);

/// Systematic resampling: `count` ancestor indices from unnormalized weights
/// using a single uniform u in (0, 1).
std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t count, double u);

/// (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

namespace detail {

/// Per-particle, per-block parameter copies for iterated filtering. Rows are
/// laid out particle-major: row (j, b) starts at (j * blocks + b) * width.
struct ParamSwarm {
    std::size_t width = 0;
    std::size_t blocks = 1;
    std::vector<double> estimation;
    std::vector<double> natural;
};

/// Called before propagation at each observation index n to perturb the swarm.
using Perturbation = std::function<void(std::size_t n, ParamSwarm& swarm)>;

PfResult run_filter(const PompModel& model, const ParameterSet& params, const ObservationSeries& data,
                    const TimeGrid& grid, const FilterOptions& options, ParamSwarm* swarm,
                    const Perturbation& perturb);

} // namespace detail

} // namespace pompkit
