#include "pompkit/toy_models.hpp"

#include "pompkit/measurement.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace pompkit {

// ---------------------------------------------------------------------------
// SIR

SirModel::SirModel(SirConfig config) : config_(config)
{
    if (config_.units == 0) {
        throw ValidationError("toy SIR needs at least one unit");
    }
    if (!(config_.population > 0.0)) {
        throw ValidationError("toy SIR population must be positive");
    }
    for (std::size_t u = 0; u < config_.units; ++u) {
        unit_names_.push_back("unit" + std::to_string(u + 1));
    }
    for (std::size_t u = 0; u < config_.units; ++u) {
        const int ui = static_cast<int>(u);
        const std::string tag = "[" + unit_names_[u] + "]";
        layout_.add("S" + tag, ui, false, true);
        layout_.add("I" + tag, ui, false, true);
        layout_.add("R" + tag, ui, false, true);
        layout_.add("C" + tag, ui, true, false);
    }

    std::vector<ParameterInfo> p;
    if (config_.unit_beta) {
        for (std::size_t u = 0; u < config_.units; ++u) {
            p.push_back({"beta_" + std::to_string(u + 1), Transform::log, static_cast<int>(u), 2.0});
        }
    }
    else {
        p.push_back({"beta", Transform::log, kShared, 2.0});
    }
    p.push_back({"gamma", Transform::log, kShared, 1.0});
    p.push_back({"omega", Transform::log, kShared, 1.0 / 52.0});
    p.push_back({"rho", Transform::logit, kShared, 0.5});
    p.push_back({"psi", Transform::log, kShared, 20.0});
    p.push_back({"coupling", Transform::identity, kShared, 0.0});
    p.push_back({"sigma", Transform::identity, kShared, 0.0});
    p.push_back({"iota", Transform::identity, kShared, 0.0});
    if (config_.unit_i0) {
        for (std::size_t u = 0; u < config_.units; ++u) {
            p.push_back({"I0_" + std::to_string(u + 1), Transform::logit, static_cast<int>(u), 0.01});
        }
    }
    else {
        p.push_back({"I0", Transform::logit, kShared, 0.01});
    }
    schema_ = std::make_shared<ParameterSchema>(std::move(p));

    if (config_.unit_beta) {
        for (std::size_t u = 0; u < config_.units; ++u) {
            beta_idx_.push_back(schema_->index_of("beta_" + std::to_string(u + 1)));
        }
    }
    else {
        beta_idx_.assign(config_.units, schema_->index_of("beta"));
    }
    if (config_.unit_i0) {
        for (std::size_t u = 0; u < config_.units; ++u) {
            i0_idx_.push_back(schema_->index_of("I0_" + std::to_string(u + 1)));
        }
    }
    else {
        i0_idx_.assign(config_.units, schema_->index_of("I0"));
    }
    gamma_idx_ = schema_->index_of("gamma");
    omega_idx_ = schema_->index_of("omega");
    rho_idx_ = schema_->index_of("rho");
    psi_idx_ = schema_->index_of("psi");
    coupling_idx_ = schema_->index_of("coupling");
    sigma_idx_ = schema_->index_of("sigma");
    iota_idx_ = schema_->index_of("iota");
}

void SirModel::validate(const ParameterSet& p) const
{
    PompModel::validate(p);
    for (const char* nm : {"coupling", "sigma", "iota"}) {
        if (p.get(nm) < 0.0) {
            throw ValidationError(std::string("parameter '") + nm + "' must be nonnegative");
        }
    }
}

void SirModel::initialize(std::span<double> x, const ParamView& theta, Rng& /*rng*/) const
{
    for (std::size_t u = 0; u < config_.units; ++u) {
        const double i0 = theta.unit(u)[i0_idx_[u]];
        double inf = config_.population * i0;
        if (!config_.deterministic) {
            inf = std::round(inf);
        }
        x[index(u, 0)] = config_.population - inf;
        x[index(u, 1)] = inf;
        x[index(u, 2)] = 0.0;
        x[index(u, 3)] = 0.0;
    }
}

void SirModel::fill_rates(std::span<const double> x, const ParamView& theta, RateMatrix& rm) const
{
    rm.clear();
    double total_i = 0.0;
    for (std::size_t u = 0; u < config_.units; ++u) {
        total_i += x[index(u, 1)];
    }
    for (std::size_t u = 0; u < config_.units; ++u) {
        const auto th = theta.unit(u);
        const double own = x[index(u, 1)];
        const double lambda =
            th[beta_idx_[u]] * (own + th[coupling_idx_] * (total_i - own)) / config_.population + th[iota_idx_];
        const double s2 = th[sigma_idx_] * th[sigma_idx_];
        rm.add(index(u, 0), index(u, 1), lambda, config_.deterministic ? 0.0 : s2, {index(u, 3), kNoTally});
        rm.add(index(u, 1), index(u, 2), th[gamma_idx_]);
        rm.add(index(u, 2), index(u, 0), th[omega_idx_]);
    }
}

void SirModel::step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const
{
    thread_local RateMatrix rm;
    if (config_.deterministic) {
        note_clamps(ode_step(
                        x, [&](double, std::span<const double> s, RateMatrix& out) { fill_rates(s, theta, out); }, t,
                        dt, layout_.names)
                        .count);
        return;
    }
    fill_rates(x, theta, rm);
    stochastic_step(x, rm, dt, rng);
}

double SirModel::measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                                  double) const
{
    return theta[rho_idx_] * x[index(unit, 3)];
}

double SirModel::dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                          double t) const
{
    return nb_log_pmf(y, measurement_mean(x, unit, theta, t), theta[psi_idx_]);
}

double SirModel::rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                          Rng& rng) const
{
    return nb_sample(measurement_mean(x, unit, theta, t), theta[psi_idx_], rng);
}

double SirModel::new_infections(std::span<const double> x, std::size_t unit) const
{
    return x[index(unit, 3)];
}

// ---------------------------------------------------------------------------
// Decay

DecayModel::DecayModel(std::size_t units, bool deterministic) : deterministic_(deterministic)
{
    if (units == 0) {
        throw ValidationError("decay toy needs at least one unit");
    }
    for (std::size_t u = 0; u < units; ++u) {
        unit_names_.push_back("unit" + std::to_string(u + 1));
        layout_.add("I[" + unit_names_.back() + "]", static_cast<int>(u), false, true);
    }
    schema_ = std::make_shared<ParameterSchema>(std::vector<ParameterInfo>{
        {"mu", Transform::log, kShared, std::numbers::ln2},
        {"I0", Transform::log, kShared, 10.0},
        {"rho", Transform::logit, kShared, 0.5},
        {"psi", Transform::log, kShared, 10.0},
    });
}

void DecayModel::initialize(std::span<double> x, const ParamView& theta, Rng&) const
{
    for (std::size_t u = 0; u < units(); ++u) {
        const double i0 = theta.unit(u)[1];
        x[u] = deterministic_ ? i0 : std::round(i0);
    }
}

void DecayModel::step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const
{
    thread_local RateMatrix rm;
    rm.clear();
    for (std::size_t u = 0; u < units(); ++u) {
        rm.add(u, kSink, theta.unit(u)[0]);
    }
    if (deterministic_) {
        note_clamps(
            ode_step(x, [&](double, std::span<const double>, RateMatrix& out) { out = rm; }, t, dt, layout_.names)
                .count);
        return;
    }
    stochastic_step(x, rm, dt, rng);
}

double DecayModel::measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                                    double) const
{
    return theta[2] * x[unit];
}

double DecayModel::dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                            double t) const
{
    return nb_log_pmf(y, measurement_mean(x, unit, theta, t), theta[3]);
}

double DecayModel::rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                            Rng& rng) const
{
    return nb_sample(measurement_mean(x, unit, theta, t), theta[3], rng);
}

double DecayModel::new_infections(std::span<const double> x, std::size_t unit) const
{
    return x[unit];
}

// ---------------------------------------------------------------------------
// HMM

HmmModel::HmmModel(HmmSpec spec) : spec_(spec), unit_names_{"chain"}
{
    layout_.add("X", 0);
    schema_ = std::make_shared<ParameterSchema>(std::vector<ParameterInfo>{});
}

void HmmModel::initialize(std::span<double> x, const ParamView&, Rng& rng) const
{
    x[0] = rng.uniform() < spec_.initial[0] ? 0.0 : 1.0;
}

void HmmModel::step(std::span<double> x, double, double, const ParamView&, Rng& rng) const
{
    const auto from = static_cast<std::size_t>(x[0]);
    x[0] = rng.uniform() < spec_.transition[from][0] ? 0.0 : 1.0;
}

double HmmModel::dmeasure(std::span<const double> x, std::size_t, double y, std::span<const double>, double) const
{
    const auto s = static_cast<std::size_t>(x[0]);
    const auto o = static_cast<std::size_t>(y);
    if (o > 1) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::log(spec_.emission[s][o]);
}

double HmmModel::rmeasure(std::span<const double> x, std::size_t, std::span<const double>, double, Rng& rng) const
{
    const auto s = static_cast<std::size_t>(x[0]);
    return rng.uniform() < spec_.emission[s][0] ? 0.0 : 1.0;
}

double HmmModel::measurement_mean(std::span<const double> x, std::size_t, std::span<const double>, double) const
{
    return spec_.emission[static_cast<std::size_t>(x[0])][1];
}

double HmmModel::new_infections(std::span<const double>, std::size_t) const
{
    return 0.0;
}

// ---------------------------------------------------------------------------
// Linear Gaussian

LinearGaussianModel::LinearGaussianModel(LinearGaussianSpec spec) : spec_(spec), unit_names_{"series"}
{
    layout_.add("X", 0);
    schema_ = std::make_shared<ParameterSchema>(std::vector<ParameterInfo>{
        {"a", Transform::identity, kShared, spec.a},
        {"q", Transform::log, kShared, spec.q},
        {"r", Transform::log, kShared, spec.r},
        {"m0", Transform::identity, kShared, spec.m0},
        {"v0", Transform::log, kShared, spec.v0},
    });
}

void LinearGaussianModel::initialize(std::span<double> x, const ParamView& theta, Rng& rng) const
{
    const auto th = theta.shared();
    x[0] = th[3] + std::sqrt(th[4]) * rng.normal();
}

void LinearGaussianModel::step(std::span<double> x, double, double, const ParamView& theta, Rng& rng) const
{
    const auto th = theta.shared();
    x[0] = th[0] * x[0] + std::sqrt(th[1]) * rng.normal();
}

double LinearGaussianModel::dmeasure(std::span<const double> x, std::size_t, double y, std::span<const double> theta,
                                     double) const
{
    const double r = theta[2];
    const double z = y - x[0];
    return -0.5 * std::log(2.0 * std::numbers::pi * r) - 0.5 * z * z / r;
}

double LinearGaussianModel::rmeasure(std::span<const double> x, std::size_t, std::span<const double> theta, double,
                                     Rng& rng) const
{
    return x[0] + std::sqrt(theta[2]) * rng.normal();
}

double LinearGaussianModel::measurement_mean(std::span<const double> x, std::size_t, std::span<const double>,
                                             double) const
{
    return x[0];
}

double LinearGaussianModel::new_infections(std::span<const double>, std::size_t) const
{
    return 0.0;
}

} // namespace pompkit
