#pragma once

#include "pompkit/core.hpp"
#include "pompkit/euler.hpp"
#include "pompkit/rng.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace pompkit {

inline constexpr int kGlobal = -1;

/// Flat latent-state layout. Every component carries a unique name such as
/// "S0[Centre]" so states can be mapped between models with different
/// vaccination cohorts.
struct StateLayout {
    std::vector<std::string> names;
    std::vector<int> unit;          ///< owning unit, or kGlobal
    std::vector<bool> accumulator;  ///< reset at the start of every observation interval
    std::vector<bool> person;       ///< counts toward the unit population

    std::size_t size() const { return names.size(); }
    std::size_t add(std::string name, int unit_index, bool is_accumulator = false, bool is_person = false);
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;

    /// Person total of one unit.
    double unit_population(std::span<const double> x, int unit_index) const;
};

/// Natural-scale parameter rows addressed per unit. In ordinary filtering every
/// unit reads the same row; the block filter gives each block its own row.
struct ParamView {
    const double* base = nullptr;
    std::size_t width = 0;
    const std::size_t* unit_offset = nullptr;  ///< per-unit offsets into base, or null

    ParamView() = default;
    explicit ParamView(std::span<const double> row) : base(row.data()), width(row.size()) {}
    ParamView(const double* b, std::size_t w, const std::size_t* offsets) : base(b), width(w), unit_offset(offsets) {}

    std::span<const double> unit(std::size_t u) const
    {
        return {base + (unit_offset ? unit_offset[u] : 0), width};
    }
    std::span<const double> shared() const { return unit(0); }
};

class PompModel {
public:
    virtual ~PompModel() = default;

    virtual std::string name() const = 0;
    virtual const StateLayout& layout() const = 0;
    virtual std::size_t units() const = 0;
    virtual const std::vector<std::string>& unit_names() const = 0;
    virtual std::shared_ptr<const ParameterSchema> schema() const = 0;
    virtual ParameterSet default_parameters() const;
    virtual bool deterministic() const { return false; }

    /// Checks domain constraints beyond the transform domains.
    virtual void validate(const ParameterSet& p) const;

    /// Throws DataError unless covariates cover [from, to].
    virtual void check_covariates(double /*from*/, double /*to*/) const {}

    virtual void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const = 0;

    /// Advances x over [t, t + dt]. Deterministic models ignore rng.
    virtual void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const = 0;

    /// log f(y | x) for one unit; y is never missing here.
    virtual double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                            double t) const = 0;
    virtual double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                            Rng& rng) const = 0;
    virtual double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                                    double t) const = 0;

    /// New true infections in the current observation interval.
    virtual double new_infections(std::span<const double> x, std::size_t unit) const = 0;

    /// Number of negative values clamped to zero so far (ODE undershoots,
    /// inconsistent initial values). Surfaced as a warning count.
    std::size_t clamp_events() const { return clamp_events_.load(); }
    void reset_clamp_events() const { clamp_events_.store(0); }

protected:
    void note_clamps(std::size_t n) const
    {
        if (n > 0) {
            clamp_events_.fetch_add(n);
        }
    }

private:
    mutable std::atomic<std::size_t> clamp_events_{0};
};

/// Zeroes accumulator components.
void reset_accumulators(const StateLayout& layout, std::span<double> x);

/// Advances x from `from` to `to` in equal substeps no longer than dt.
void advance(const PompModel& model, std::span<double> x, double from, double to, double dt, const ParamView& theta,
             Rng& rng);

struct Simulation {
    std::vector<double> states;  ///< (N+1) x D, row 0 is the initial state
    ObservationSeries observations;
    std::vector<double> infections;  ///< U x N new true infections per interval
};

/// Independent realizations. Each replicate uses streams keyed by (seed, replicate, time index),
/// so output does not depend on `workers`.
std::vector<Simulation> simulate(const PompModel& model, const ParameterSet& params, const TimeGrid& grid,
                                 std::size_t n_sims, std::uint64_t seed, int workers = 1);

} // namespace pompkit
