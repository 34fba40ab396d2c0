#include "pompkit/haiti_models.hpp"
#include "pompkit/measurement.hpp"

#include <cmath>
#include <numbers>

namespace pompkit {

namespace {
constexpr double kChildEfficacy = 0.4688;
constexpr double kOneDose = 0.429;
constexpr double kTwoDose = 0.519;
} // namespace

double Model2::efficacy(std::size_t z)
{
    static constexpr double table[5] = {0.0, kOneDose * kChildEfficacy, kTwoDose * kChildEfficacy, kOneDose, kTwoDose};
    return table[z];
}

std::vector<std::string> Model2::default_free_parameters()
{
    return {"beta", "beta_W", "phi", "mu_RS", "mu_W", "psi"};
}

Model2::Model2(Model2Config config) : config_(std::move(config))
{
    const auto& geo = config_.geography;
    geo.validate();
    const std::size_t n = geo.size();
    if (config_.first_cases.size() != n) {
        throw ValidationError("model2: need first-week cases for every department");
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (!(config_.first_cases[u] >= 0.0)) {
            throw DataError("model2: first-week cases for " + geo.names[u] + " must be a nonnegative number");
        }
    }

    static const char* comps[] = {"S", "E", "I", "A", "R", "RA"};
    for (std::size_t u = 0; u < n; ++u) {
        const int ui = static_cast<int>(u);
        const std::string tag = "[" + geo.names[u] + "]";
        for (std::size_t z = 0; z < 5; ++z) {
            for (const char* c : comps) {
                layout_.add(std::string(c) + std::to_string(z) + tag, ui, false, true);
            }
        }
        layout_.add("W" + tag, ui);
        layout_.add("C" + tag, ui, true);
        layout_.add("Inf" + tag, ui, true);
    }

    gravity_kernel_ = geo.gravity(1.0);

    unit_campaigns_.assign(n, {});
    for (std::size_t i = 0; i < config_.campaigns.size(); ++i) {
        unit_campaigns_[geo.index_of(config_.campaigns[i].department)].push_back(i);
    }

    const double day = kDaysPerYear;
    const double week = kWeeksPerYear;
    std::vector<ParameterInfo> p{
        {"beta", Transform::log, kShared, 5.97e-15, "yr^-1"},
        {"beta_W", Transform::log, kShared, 1.1, "yr^-1"},
        {"phi", Transform::identity, kShared, 0.97, "rad"},
        {"mu_RS", Transform::log, kShared, 1.0 / 1.4e11, "yr^-1"},
        {"mu_W", Transform::log, kShared, 179.0, "wk^-1", week},
        {"psi", Transform::log, kShared, 1.319},
        {"W_sat", Transform::log, kShared, 1e5, "cells/ml"},
        {"a", Transform::logit, kShared, 0.4},
        {"mu_EI", Transform::log, kShared, 1.0 / 1.3, "day^-1", day},
        {"mu_IR", Transform::log, kShared, 1.0 / 7.0, "day^-1", day},
        {"omega_1", Transform::log, kShared, 1.0, "yr^-1"},
        {"omega_2", Transform::log, kShared, 1.0 / 5.0, "yr^-1"},
        {"f", Transform::logit, kShared, 0.2},
        {"epsilon", Transform::logit, kShared, 0.001},
        {"epsilon_W", Transform::logit, kShared, 1e-7},
        {"delta_W", Transform::log, kShared, 1.0 / 3.0, "wk^-1", week},
        {"rho", Transform::logit, kShared, 0.2},
        {"v_rate", Transform::log, kShared, 1e-12, "km^2 yr^-1"},
        {"w_r", Transform::identity, kShared, 1.0},
    };
    schema_ = std::make_shared<ParameterSchema>(std::move(p));
    const auto& s = *schema_;
    beta_ = s.index_of("beta");
    beta_w_ = s.index_of("beta_W");
    phi_ = s.index_of("phi");
    mu_rs_ = s.index_of("mu_RS");
    mu_w_ = s.index_of("mu_W");
    psi_ = s.index_of("psi");
    w_sat_ = s.index_of("W_sat");
    a_ = s.index_of("a");
    mu_ei_ = s.index_of("mu_EI");
    mu_ir_ = s.index_of("mu_IR");
    omega1_ = s.index_of("omega_1");
    omega2_ = s.index_of("omega_2");
    f_ = s.index_of("f");
    eps_ = s.index_of("epsilon");
    eps_w_ = s.index_of("epsilon_W");
    delta_w_ = s.index_of("delta_W");
    rho_ = s.index_of("rho");
    v_rate_ = s.index_of("v_rate");
    w_r_ = s.index_of("w_r");
}

void Model2::validate(const ParameterSet& p) const
{
    PompModel::validate(p);
    if (p.get("w_r") < 0.0) {
        throw ValidationError("model2: w_r must be nonnegative");
    }
}

double Model2::force_of_infection(std::span<const double> x, std::size_t u, double t, const ParamView& theta) const
{
    const auto th = theta.unit(u);
    const auto& s = *schema_;
    const double w = x[water_index(u)];
    const double seasonal = 0.5 * (1.0 + th[a_] * std::cos(2.0 * std::numbers::pi * t + th[phi_]));
    double infectious = 0.0;
    for (std::size_t z = 0; z < 5; ++z) {
        infectious += x[index(u, z, 2)] + th[eps_] * x[index(u, z, 3)];
    }
    const double water = w > 0.0 ? per_year(s, th, beta_w_) * w / (th[w_sat_] + w) : 0.0;
    return seasonal * water + per_year(s, th, beta_) * infectious;
}

void Model2::fill_rates(std::span<const double> x, double t, const ParamView& theta, RateMatrix& rm) const
{
    rm.clear();
    const auto& s = *schema_;
    const auto& geo = config_.geography;
    const std::size_t n = geo.size();
    constexpr double kUnderFive = 0.11;

    for (std::size_t u = 0; u < n; ++u) {
        const auto th = theta.unit(u);
        const double lambda = force_of_infection(x, u, t, theta);
        const double mu_ei = per_year(s, th, mu_ei_);
        const double mu_ir = per_year(s, th, mu_ir_);
        const double mu_rs = per_year(s, th, mu_rs_);
        const double f = th[f_];
        const double v_rate = per_year(s, th, v_rate_);

        // vaccination out of S_u0, per capita
        std::array<double, 5> eta{};
        const double s0 = x[index(u, 0, 0)];
        if (s0 > 0.0) {
            for (auto ci : unit_campaigns_[u]) {
                const auto& c = config_.campaigns[ci];
                const double r1 = campaign_weekly_rate(c, c.doses_1, t) * kWeeksPerYear / s0;
                const double r2 = campaign_weekly_rate(c, c.doses_2, t) * kWeeksPerYear / s0;
                eta[1] += kUnderFive * r1;
                eta[3] += (1.0 - kUnderFive) * r1;
                eta[2] += kUnderFive * r2;
                eta[4] += (1.0 - kUnderFive) * r2;
            }
        }

        auto transport = [&](std::size_t z, std::size_t comp) {
            if (v_rate <= 0.0) {
                return;
            }
            for (std::size_t v = 0; v < n; ++v) {
                if (v != u) {
                    rm.add(index(u, z, comp), index(v, z, comp), v_rate * gravity_kernel_[u * n + v]);
                }
            }
        };

        for (std::size_t z = 0; z < 5; ++z) {
            // S
            rm.add(index(u, z, 0), index(u, z, 1), (1.0 - efficacy(z)) * lambda, 0.0,
                   {infections_index(u), kNoTally});
            transport(z, 0);
            if (z == 0) {
                for (std::size_t k = 1; k < 5; ++k) {
                    if (eta[k] > 0.0) {
                        rm.add(index(u, 0, 0), index(u, k, 0), eta[k]);
                    }
                }
            }
            else {
                const double omega = (z == 1 || z == 3) ? per_year(s, th, omega1_) : per_year(s, th, omega2_);
                rm.add(index(u, z, 0), index(u, 0, 0), omega);
            }
            // E
            rm.add(index(u, z, 1), index(u, z, 2), f * mu_ei, 0.0, {cases_index(u), kNoTally});
            rm.add(index(u, z, 1), index(u, z, 3), (1.0 - f) * mu_ei);
            transport(z, 1);
            // I, A
            rm.add(index(u, z, 2), index(u, z, 4), mu_ir);
            transport(z, 2);
            rm.add(index(u, z, 3), index(u, z, 5), mu_ir);
            transport(z, 3);
            // R, RA
            rm.add(index(u, z, 4), index(u, z, 0), mu_rs);
            transport(z, 4);
            rm.add(index(u, z, 5), index(u, z, 0), mu_rs);
            transport(z, 5);
        }

        double shed = 0.0;
        for (std::size_t z = 0; z < 5; ++z) {
            shed += x[index(u, z, 2)] + th[eps_w_] * x[index(u, z, 3)];
        }
        rm.add_inflow(water_index(u), per_year(s, th, mu_w_) * shed);
        rm.add(water_index(u), kSink, per_year(s, th, delta_w_));
        const double w_r = th[w_r_];
        if (w_r > 0.0) {
            for (std::size_t v = 0; v < n; ++v) {
                const double r = geo.river_flow(u, v);
                if (v != u && r > 0.0) {
                    rm.add(water_index(u), water_index(v), w_r * r);
                }
            }
        }
    }
}

void Model2::initialize(std::span<double> x, const ParamView& theta, Rng&) const
{
    std::fill(x.begin(), x.end(), 0.0);
    const auto& geo = config_.geography;
    for (std::size_t u = 0; u < geo.size(); ++u) {
        const double rho = theta.unit(u)[rho_];
        const double inf = config_.first_cases[u] / rho;
        if (inf > geo.population[u]) {
            throw ValidationError("model2: initial infected count exceeds the population of " + geo.names[u]);
        }
        x[index(u, 0, 2)] = inf;
        x[index(u, 0, 0)] = geo.population[u] - inf;
    }
}

void Model2::step(std::span<double> x, double t, double dt, const ParamView& theta, Rng&) const
{
    const auto report = ode_step(
        x, [&](double tt, std::span<const double> s, RateMatrix& rm) { fill_rates(s, tt, theta, rm); }, t, dt,
        layout_.names);
    note_clamps(report.count);
}

double Model2::measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                                double) const
{
    return theta[rho_] * x[cases_index(unit)];
}

double Model2::dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                        double t) const
{
    return log1p_normal_log_density(y, measurement_mean(x, unit, theta, t), theta[psi_]);
}

double Model2::rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                        Rng& rng) const
{
    return log1p_normal_sample(measurement_mean(x, unit, theta, t), theta[psi_], rng);
}

double Model2::new_infections(std::span<const double> x, std::size_t unit) const
{
    return x[infections_index(unit)];
}

} // namespace pompkit
