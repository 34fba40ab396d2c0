#pragma once

#include "pompkit/particle_filter.hpp"

#include <map>

namespace pompkit {

struct If2Settings {
    std::size_t particles = 1000;
    std::size_t iterations = 50;
    double cooling_fraction = 0.5;          ///< sd multiplier after 50 iterations
    std::map<std::string, double> rw_sd;    ///< estimation scale; absent means fixed
    std::size_t eval_particles = 0;         ///< particles for the trace evaluations; 0 means `particles`
    Execution execution = Execution::openmp;
    int workers = 0;

    void validate(const ParameterSchema& schema) const;
};

struct IbpfSettings : If2Settings {
    Blocks blocks;  ///< empty: one block per unit
};

struct If2Result {
    ParameterSet estimate;
    std::vector<double> trace;   ///< trace[0] at the start, trace[m] after iteration m
    std::vector<double> swarm;   ///< J x P natural-scale parameters after the last iteration
    std::size_t completed = 0;   ///< iterations finished before any abort
    bool aborted = false;
    std::optional<std::size_t> failure_index;

    std::size_t swarm_size() const { return estimate.size() ? swarm.size() / estimate.size() : 0; }
    ParameterSet swarm_member(std::size_t j) const;
};

/// Random-walk sd multiplier at iteration m (0-based) and time index n of N.
double cooling_factor(double cooling_fraction, std::size_t m, std::size_t n, std::size_t N);

If2Result if2(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid, const ParameterSet& start,
              const If2Settings& settings, std::uint64_t seed);

/// Block version: unit-specific parameters evolve inside their own block, shared
/// parameters are averaged over blocks (estimation scale) after each iteration.
If2Result ibpf(const PompModel& model, const ObservationSeries& data, const TimeGrid& grid,
               const ParameterSet& start, const IbpfSettings& settings, std::uint64_t seed);

/// K draws from candidates with probability proportional to exp(loglik).
std::vector<ParameterSet> sample_params_by_likelihood(const std::vector<ParameterSet>& candidates,
                                                      std::span<const double> logliks, std::size_t K,
                                                      std::uint64_t seed);

} // namespace pompkit
