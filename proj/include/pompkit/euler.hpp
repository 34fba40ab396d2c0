#pragma once

#include "pompkit/core.hpp"
#include "pompkit/rng.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pompkit {

inline constexpr std::size_t kSink = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kNoTally = std::numeric_limits<std::size_t>::max();

/// Per-capita flow from compartment `from` to `to` (kSink leaves the system).
/// `tally` names up to two accumulator compartments that count the flow.
struct Flow {
    std::size_t from = 0;
    std::size_t to = kSink;
    double rate = 0.0;
    double noise_var = 0.0;
    std::array<std::size_t, 2> tally{kNoTally, kNoTally};
};

/// Absolute-rate inflow from outside the system.
struct Inflow {
    std::size_t to = 0;
    double rate = 0.0;
    std::array<std::size_t, 2> tally{kNoTally, kNoTally};
};

/// Transition rates out of each compartment at one instant. Flows sharing a
/// source must be added contiguously; they compete for that compartment's
/// occupants in the order added.
class RateMatrix {
public:
    void clear()
    {
        flows_.clear();
        inflows_.clear();
    }

    void add(std::size_t from, std::size_t to, double rate, double noise_var = 0.0,
             std::array<std::size_t, 2> tally = {kNoTally, kNoTally})
    {
        flows_.push_back(Flow{from, to, rate, noise_var, tally});
    }

    void add_inflow(std::size_t to, double rate, std::array<std::size_t, 2> tally = {kNoTally, kNoTally})
    {
        inflows_.push_back(Inflow{to, rate, tally});
    }

    const std::vector<Flow>& flows() const { return flows_; }
    const std::vector<Inflow>& inflows() const { return inflows_; }
    std::vector<Flow>& flows() { return flows_; }

    /// Throws ValidationError on negative/non-finite rates or split source groups.
    void validate() const;

    /// Rate of the first flow from -> to, or 0 if absent (summed if repeated).
    double rate(std::size_t from, std::size_t to) const;

private:
    std::vector<Flow> flows_;
    std::vector<Inflow> inflows_;
};

/// Gamma noise increment with mean dt and variance sigma2*dt; exactly dt when sigma2 == 0.
double gamma_increment(double dt, double sigma2, Rng& rng);

/// Competing-hazard allocation of n individuals over destinations with the
/// given per-capita rates. Writes per-destination counts into `out` and returns
/// the number that stay.
std::int64_t euler_multinomial(std::int64_t n, std::span<const double> rates, double dt, Rng& rng,
                               std::span<std::int64_t> out);

/// Exit probabilities p_j = (1 - exp(-sum(rates)*dt)) * rate_j / sum(rates).
std::vector<double> euler_exit_probabilities(std::span<const double> rates, double dt);

std::int64_t poisson_inflow(double rate, double dt, Rng& rng);

/// Realised flows of one stochastic step, in RateMatrix order.
struct StepFlows {
    std::vector<double> flows;
    std::vector<double> inflows;
};

/// One Euler step of the over-dispersed Markov counting system. All flows are
/// drawn from X(t) before any is applied. State entries hold integer counts.
void stochastic_step(std::span<double> x, const RateMatrix& rates, double dt, Rng& rng, StepFlows* record = nullptr);

/// Every death is a birth into `birth_target`, so the total is conserved.
/// `death_rates[i]` is the per-capita death rate of compartment i.
StepFlows balanced_demography_step(std::span<double> x, std::span<const double> death_rates, std::size_t birth_target,
                                   double dt, Rng& rng);

/// dX/dt implied by a RateMatrix at state x.
void flow_derivative(std::span<const double> x, const RateMatrix& rates, std::span<double> dxdt);

struct ClampReport {
    std::size_t count = 0;
    double magnitude = 0.0;
};

using RateField = std::function<void(double t, std::span<const double> x, RateMatrix& out)>;

/// Classical RK4 advance of dN_ij/dt = mu_ij X_i. Negative undershoots are
/// clamped to zero and reported. `names` (optional) labels compartments in
/// error messages.
ClampReport ode_step(std::span<double> x, const RateField& field, double t, double dt,
                     std::span<const std::string> names = {});

} // namespace pompkit
