#include "pompkit/haiti_models.hpp"
#include "pompkit/measurement.hpp"
#include "pompkit/spline.hpp"

#include <cmath>
#include <map>

namespace pompkit {

double model1_default_t0()
{
    return date_to_time("2010-10-16");
}

double model1_phase_switch()
{
    return date_to_time("2015-03-01");
}

std::vector<Model1Cohort> model1_cohorts(const ScenarioSpec& scenario)
{
    std::map<double, std::array<double, 2>> by_start;
    for (const auto& c : scenario.campaigns) {
        auto& d = by_start[c.start];
        d[0] += c.doses_1;
        d[1] += c.doses_2;
    }
    std::vector<Model1Cohort> out;
    for (const auto& [start, doses] : by_start) {
        if (doses[0] > 0.0) {
            out.push_back({start, 1, doses[0]});
        }
        if (doses[1] > 0.0) {
            out.push_back({start, 2, doses[1]});
        }
    }
    return out;
}

Model1::Model1(Model1Config config) : config_(std::move(config))
{
    if (!(config_.tN > config_.t0)) {
        throw ValidationError("model1: last observation time must follow t0");
    }
    if (!(config_.population > 0.0)) {
        throw ValidationError("model1: population must be positive");
    }
    config_.efficacy.validate();

    static const char* comps[] = {"S", "E", "I", "A", "R"};
    for (std::size_t z = 0; z < cohorts(); ++z) {
        for (const char* c : comps) {
            layout_.add(std::string(c) + std::to_string(z), 0, false, true);
        }
    }
    cases_ = layout_.add("C", 0, true);
    infections_ = layout_.add("Inf", 0, true);

    const double pop = config_.population;
    const double day = kDaysPerYear;
    std::vector<ParameterInfo> p{
        {"beta1", Transform::identity, kShared, 1.4},
        {"beta2", Transform::identity, kShared, 1.2},
        {"beta3", Transform::identity, kShared, 1.1},
        {"beta4", Transform::identity, kShared, 1.1},
        {"beta5", Transform::identity, kShared, 1.4},
        {"beta6", Transform::identity, kShared, 1.0},
        {"zeta", Transform::identity, kShared, -0.0378},
        {"nu", Transform::logit, kShared, 0.98},
        {"rho", Transform::logit, kShared, 0.679},
        {"psi_epi", Transform::log, kShared, 279.15},
        {"psi_end", Transform::log, kShared, 78.33},
        {"sigma_epi", Transform::identity, kShared, 0.09, "wk^1/2"},
        {"sigma_end", Transform::identity, kShared, 0.12, "wk^1/2"},
        {"I0", Transform::logit, kShared, 7298.0 / pop},
        {"E0", Transform::logit, kShared, 350.0 / pop},
        {"mu_EI", Transform::log, kShared, 1.0 / 1.4, "day^-1", day},
        {"mu_IR", Transform::log, kShared, 1.0 / 2.0, "day^-1", day},
        {"mu_RS", Transform::log, kShared, 1.0 / 8.0, "yr^-1"},
        {"mu_S", Transform::log, kShared, 0.0223, "yr^-1"},
        {"delta", Transform::log, kShared, 0.0075, "yr^-1"},
        {"epsilon", Transform::logit, kShared, 0.05},
    };
    schema_ = std::make_shared<ParameterSchema>(std::move(p));
    const auto& s = *schema_;
    for (std::size_t j = 0; j < 6; ++j) {
        beta_[j] = s.index_of("beta" + std::to_string(j + 1));
    }
    zeta_ = s.index_of("zeta");
    nu_ = s.index_of("nu");
    rho_ = s.index_of("rho");
    psi_epi_ = s.index_of("psi_epi");
    psi_end_ = s.index_of("psi_end");
    sigma_epi_ = s.index_of("sigma_epi");
    sigma_end_ = s.index_of("sigma_end");
    i0_ = s.index_of("I0");
    e0_ = s.index_of("E0");
    mu_ei_ = s.index_of("mu_EI");
    mu_ir_ = s.index_of("mu_IR");
    mu_rs_ = s.index_of("mu_RS");
    mu_s_ = s.index_of("mu_S");
    delta_ = s.index_of("delta");
    eps_ = s.index_of("epsilon");
}

void Model1::validate(const ParameterSet& p) const
{
    PompModel::validate(p);
    if (p.get("I0") + p.get("E0") >= 1.0) {
        throw ValidationError("model1: I0 + E0 must be below 1");
    }
    if (p.get("sigma_epi") < 0.0 || p.get("sigma_end") < 0.0) {
        throw ValidationError("model1: process noise must be nonnegative");
    }
}

double Model1::transmission(double t, std::span<const double> theta) const
{
    std::array<double, 6> coef{};
    for (std::size_t j = 0; j < 6; ++j) {
        coef[j] = theta[beta_[j]];
    }
    return seasonal_beta(t, coef, theta[zeta_], config_.t0, config_.tN, per_week(1.0));
}

double Model1::force_of_infection(std::span<const double> x, double t, std::span<const double> theta,
                                  double gamma_ratio) const
{
    double infectious = 0.0;
    double total = 0.0;
    for (std::size_t z = 0; z < cohorts(); ++z) {
        infectious += x[index(z, 2)] + theta[eps_] * x[index(z, 3)];
        for (std::size_t c = 0; c < 5; ++c) {
            total += x[index(z, c)];
        }
    }
    if (infectious <= 0.0 || total <= 0.0) {
        return 0.0;
    }
    return std::pow(infectious, theta[nu_]) * gamma_ratio * transmission(t, theta) / total;
}

double Model1::asymptomatic_fraction(std::size_t z, double t) const
{
    if (z == 0) {
        return 0.0;
    }
    const auto& c = config_.cohorts[z - 1];
    return kEfficacyCorrection * config_.efficacy.efficacy((t - c.tau) / kWeek, c.doses);
}

double Model1::vaccination_rate(std::span<const double> x, std::size_t z, double t) const
{
    const auto& c = config_.cohorts[z - 1];
    if (t < c.tau || t >= c.tau + kWeek) {
        return 0.0;
    }
    double unvaccinated = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        unvaccinated += x[index(0, k)];
    }
    if (unvaccinated <= 0.0) {
        return 0.0;
    }
    return c.count / (unvaccinated * kWeek);
}

void Model1::fill_rates(std::span<const double> x, double t, std::span<const double> theta, double lambda,
                        RateMatrix& rm) const
{
    rm.clear();
    const auto& s = *schema_;
    const double mu_ei = per_year(s, theta, mu_ei_);
    const double mu_ir = per_year(s, theta, mu_ir_);
    const double mu_rs = per_year(s, theta, mu_rs_);
    const double delta = per_year(s, theta, delta_);
    const std::size_t nz = cohorts();

    std::vector<double> eta(nz, 0.0);
    for (std::size_t z = 1; z < nz; ++z) {
        eta[z] = vaccination_rate(x, z, t);
    }
    auto vaccinate = [&](std::size_t comp) {
        for (std::size_t z = 1; z < nz; ++z) {
            if (eta[z] > 0.0) {
                rm.add(index(0, comp), index(z, comp), eta[z]);
            }
        }
    };

    for (std::size_t z = 0; z < nz; ++z) {
        const double f = asymptomatic_fraction(z, t);
        rm.add(index(z, 0), index(z, 1), lambda, 0.0, {infections_, kNoTally});
        rm.add(index(z, 0), kSink, delta);
        if (z == 0) {
            vaccinate(0);
        }
        rm.add(index(z, 1), index(z, 2), mu_ei * (1.0 - f), 0.0, {cases_, kNoTally});
        rm.add(index(z, 1), index(z, 3), mu_ei * f);
        rm.add(index(z, 1), kSink, delta);
        if (z == 0) {
            vaccinate(1);
        }
        rm.add(index(z, 2), index(z, 4), mu_ir);
        rm.add(index(z, 2), kSink, delta);
        if (z == 0) {
            vaccinate(2);
        }
        rm.add(index(z, 3), index(z, 4), mu_ir);
        rm.add(index(z, 3), kSink, delta);
        if (z == 0) {
            vaccinate(3);
        }
        rm.add(index(z, 4), index(z, 0), mu_rs);
        rm.add(index(z, 4), kSink, delta);
        if (z == 0) {
            vaccinate(4);
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < nz * 5; ++i) {
        total += x[i];
    }
    rm.add_inflow(index(0, 0), per_year(s, theta, mu_s_) * total);
}

void Model1::initialize(std::span<double> x, const ParamView& theta, Rng&) const
{
    const auto th = theta.shared();
    std::fill(x.begin(), x.end(), 0.0);
    const double pop = config_.population;
    const double i0 = std::round(pop * th[i0_]);
    const double e0 = std::round(pop * th[e0_]);
    x[index(0, 2)] = i0;
    x[index(0, 1)] = e0;
    x[index(0, 0)] = pop - i0 - e0;
}

void Model1::step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const
{
    thread_local RateMatrix rm;
    const auto th = theta.shared();
    const double sigma = t < config_.phase_switch ? th[sigma_epi_] : th[sigma_end_];
    double ratio = 1.0;
    if (sigma != 0.0) {
        ratio = gamma_increment(dt, sigma * sigma * kWeek, rng) / dt;
    }
    const double lambda = force_of_infection(x, t, th, ratio);
    fill_rates(x, t, th, lambda, rm);
    stochastic_step(x, rm, dt, rng);
}

double Model1::measurement_mean(std::span<const double> x, std::size_t, std::span<const double> theta, double) const
{
    return theta[rho_] * x[cases_];
}

double Model1::dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                        double t) const
{
    const double psi = t < config_.phase_switch ? theta[psi_epi_] : theta[psi_end_];
    return nb_log_pmf(y, measurement_mean(x, unit, theta, t), psi);
}

double Model1::rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                        Rng& rng) const
{
    const double psi = t < config_.phase_switch ? theta[psi_epi_] : theta[psi_end_];
    return nb_sample(measurement_mean(x, unit, theta, t), psi, rng);
}

double Model1::new_infections(std::span<const double> x, std::size_t) const
{
    return x[infections_];
}

} // namespace pompkit
