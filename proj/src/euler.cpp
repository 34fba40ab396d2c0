#include "pompkit/euler.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace pompkit {

void RateMatrix::validate() const
{
    std::vector<std::size_t> seen;
    std::size_t current = kSink;
    for (const auto& f : flows_) {
        if (!std::isfinite(f.rate) || f.rate < 0.0) {
            std::ostringstream os;
            os << "invalid rate " << f.rate << " on flow " << f.from << " -> " << f.to;
            throw ValidationError(os.str());
        }
        if (!std::isfinite(f.noise_var) || f.noise_var < 0.0) {
            throw ValidationError("invalid noise variance on flow " + std::to_string(f.from));
        }
        if (f.from != current) {
            if (std::find(seen.begin(), seen.end(), f.from) != seen.end()) {
                throw ValidationError("flows from compartment " + std::to_string(f.from) + " are not contiguous");
            }
            seen.push_back(f.from);
            current = f.from;
        }
    }
    for (const auto& in : inflows_) {
        if (!std::isfinite(in.rate) || in.rate < 0.0) {
            throw ValidationError("invalid inflow rate into compartment " + std::to_string(in.to));
        }
    }
}

double RateMatrix::rate(std::size_t from, std::size_t to) const
{
    double r = 0.0;
    for (const auto& f : flows_) {
        if (f.from == from && f.to == to) {
            r += f.rate;
        }
    }
    return r;
}

double gamma_increment(double dt, double sigma2, Rng& rng)
{
    if (!(dt > 0.0)) {
        throw ValidationError("gamma increment needs a positive time step");
    }
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
        throw ValidationError("gamma noise variance must be finite and nonnegative");
    }
    if (sigma2 == 0.0) {
        return dt;
    }
    std::gamma_distribution<double> g(dt / sigma2, sigma2);
    return g(rng);
}

std::vector<double> euler_exit_probabilities(std::span<const double> rates, double dt)
{
    double total = 0.0;
    for (double r : rates) {
        total += r;
    }
    std::vector<double> p(rates.size(), 0.0);
    if (total <= 0.0) {
        return p;
    }
    const double exit = -std::expm1(-total * dt);
    for (std::size_t j = 0; j < rates.size(); ++j) {
        p[j] = exit * rates[j] / total;
    }
    return p;
}

std::int64_t euler_multinomial(std::int64_t n, std::span<const double> rates, double dt, Rng& rng,
                               std::span<std::int64_t> out)
{
    double total = 0.0;
    for (double r : rates) {
        if (!(r >= 0.0) || !std::isfinite(r)) {
            throw ValidationError("euler_multinomial: rates must be finite and nonnegative");
        }
        total += r;
    }
    std::fill(out.begin(), out.end(), 0);
    if (n <= 0 || total <= 0.0) {
        return std::max<std::int64_t>(n, 0);
    }
    // sequential conditional binomials over destinations
    double p_remaining_mass = 1.0;
    const double exit = -std::expm1(-total * dt);
    std::int64_t remaining = n;
    for (std::size_t j = 0; j < rates.size() && remaining > 0; ++j) {
        const double pj = exit * rates[j] / total;
        if (pj <= 0.0) {
            continue;
        }
        double q = pj / p_remaining_mass;
        q = std::clamp(q, 0.0, 1.0);
        std::int64_t k = 0;
        if (q >= 1.0) {
            k = remaining;
        }
        else {
            std::binomial_distribution<std::int64_t> b(remaining, q);
            k = b(rng);
        }
        out[j] = k;
        remaining -= k;
        p_remaining_mass -= pj;
        if (p_remaining_mass <= 0.0) {
            p_remaining_mass = 0.0;
        }
    }
    return remaining;
}

std::int64_t poisson_inflow(double rate, double dt, Rng& rng)
{
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw ValidationError("poisson_inflow: rate must be finite and nonnegative");
    }
    const double mean = rate * dt;
    if (mean <= 0.0) {
        return 0;
    }
    std::poisson_distribution<std::int64_t> p(mean);
    return p(rng);
}

void stochastic_step(std::span<double> x, const RateMatrix& rates, double dt, Rng& rng, StepFlows* record)
{
    thread_local std::vector<double> mu;
    thread_local std::vector<std::int64_t> counts;
    thread_local std::vector<double> delta;

    const auto& flows = rates.flows();
    delta.assign(x.size(), 0.0);
    if (record) {
        record->flows.assign(flows.size(), 0.0);
        record->inflows.assign(rates.inflows().size(), 0.0);
    }

    std::size_t i = 0;
    while (i < flows.size()) {
        const std::size_t src = flows[i].from;
        std::size_t j = i;
        while (j < flows.size() && flows[j].from == src) {
            ++j;
        }
        mu.resize(j - i);
        counts.resize(j - i);
        for (std::size_t k = i; k < j; ++k) {
            const auto& f = flows[k];
            if (!(f.rate >= 0.0) || !std::isfinite(f.rate)) {
                std::ostringstream os;
                os << "invalid rate " << f.rate << " on flow " << f.from << " -> " << f.to;
                throw ValidationError(os.str());
            }
            double m = f.rate;
            if (f.noise_var > 0.0 && m > 0.0) {
                m *= gamma_increment(dt, f.noise_var, rng) / dt;
            }
            mu[k - i] = m;
        }
        const auto n = static_cast<std::int64_t>(std::llround(x[src]));
        euler_multinomial(n, mu, dt, rng, counts);
        for (std::size_t k = i; k < j; ++k) {
            const auto c = static_cast<double>(counts[k - i]);
            if (c == 0.0) {
                continue;
            }
            const auto& f = flows[k];
            delta[src] -= c;
            if (f.to != kSink) {
                delta[f.to] += c;
            }
            for (auto t : f.tally) {
                if (t != kNoTally) {
                    delta[t] += c;
                }
            }
            if (record) {
                record->flows[k] = c;
            }
        }
        i = j;
    }
    const auto& inflows = rates.inflows();
    for (std::size_t k = 0; k < inflows.size(); ++k) {
        const auto c = static_cast<double>(poisson_inflow(inflows[k].rate, dt, rng));
        delta[inflows[k].to] += c;
        for (auto t : inflows[k].tally) {
            if (t != kNoTally) {
                delta[t] += c;
            }
        }
        if (record) {
            record->inflows[k] = c;
        }
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        x[k] += delta[k];
    }
}

StepFlows balanced_demography_step(std::span<double> x, std::span<const double> death_rates, std::size_t birth_target,
                                   double dt, Rng& rng)
{
    if (death_rates.size() != x.size()) {
        throw ValidationError("balanced_demography_step: one death rate per compartment required");
    }
    RateMatrix rm;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i != birth_target) {
            rm.add(i, birth_target, death_rates[i]);
        }
    }
    rm.validate();
    StepFlows rec;
    stochastic_step(x, rm, dt, rng, &rec);
    return rec;
}

void flow_derivative(std::span<const double> x, const RateMatrix& rates, std::span<double> dxdt)
{
    std::fill(dxdt.begin(), dxdt.end(), 0.0);
    for (const auto& f : rates.flows()) {
        const double v = f.rate * x[f.from];
        dxdt[f.from] -= v;
        if (f.to != kSink) {
            dxdt[f.to] += v;
        }
        for (auto t : f.tally) {
            if (t != kNoTally) {
                dxdt[t] += v;
            }
        }
    }
    for (const auto& in : rates.inflows()) {
        dxdt[in.to] += in.rate;
        for (auto t : in.tally) {
            if (t != kNoTally) {
                dxdt[t] += in.rate;
            }
        }
    }
}

ClampReport ode_step(std::span<double> x, const RateField& field, double t, double dt, std::span<const std::string> names)
{
    thread_local RateMatrix rm;
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);

    auto eval = [&](double tt, std::span<const double> state, std::span<double> out) {
        rm.clear();
        field(tt, state, rm);
        flow_derivative(state, rm, out);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(out[i])) {
                const std::string label = i < names.size() ? names[i] : std::to_string(i);
                throw NumericalError("non-finite derivative for compartment '" + label + "' at t=" + std::to_string(tt));
            }
        }
    };

    eval(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * dt * k1[i];
    }
    eval(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * dt * k2[i];
    }
    eval(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + dt * k3[i];
    }
    eval(t + dt, tmp, k4);

    ClampReport report;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (x[i] < 0.0) {
            ++report.count;
            report.magnitude += -x[i];
            x[i] = 0.0;
        }
    }
    return report;
}

} // namespace pompkit
