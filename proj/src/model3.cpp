#include "pompkit/haiti_models.hpp"
#include "pompkit/measurement.hpp"

#include <algorithm>
#include <cmath>

namespace pompkit {

double model3_default_t0()
{
    return date_to_time("2010-11-13");
}

double hurricane_matthew_time()
{
    return date_to_time("2016-10-04");
}

namespace {

constexpr double kBeta[10] = {0.82e-6, 0.02e-6, 0.38e-6, 0.21e-6, 0.51e-6, 0.51e-6, 0.35e-6, 0.12e-6, 0.26e-6, 0.10e-6};
constexpr double kBetaW[10] = {4.70, 21.00, 24.97, 27.14, 5.28, 30.70, 10.17, 0.99, 11.89, 12.82};

std::size_t haiti_position(const std::string& name)
{
    const auto& d = haiti_departments();
    auto it = std::find(d.begin(), d.end(), name);
    return it == d.end() ? Model3::npos : static_cast<std::size_t>(it - d.begin());
}

} // namespace

Model3::Model3(Model3Config config) : config_(std::move(config))
{
    const auto& geo = config_.geography;
    geo.validate();
    const std::size_t n = geo.size();
    if (config_.init_cases.size() != n) {
        throw ValidationError("model3: need four initialization weeks for every department");
    }
    for (std::size_t u = 0; u < n; ++u) {
        for (double y : config_.init_cases[u]) {
            if (!(y >= 0.0)) {
                throw DataError("model3: initialization cases for " + geo.names[u] + " must be nonnegative numbers");
            }
        }
    }
    config_.efficacy.validate();

    static const char* comps[] = {"S0", "S1", "S2", "S3", "S4", "I", "A", "R1", "R2", "R3"};
    for (std::size_t u = 0; u < n; ++u) {
        const int ui = static_cast<int>(u);
        const std::string tag = "[" + geo.names[u] + "]";
        for (const char* c : comps) {
            layout_.add(std::string(c) + tag, ui, false, true);
        }
        layout_.add("W" + tag, ui);
        layout_.add("C" + tag, ui, true);
        layout_.add("Inf" + tag, ui, true);
    }

    rain_series_.assign(n, npos);
    if (!config_.rainfall.empty()) {
        for (std::size_t u = 0; u < n; ++u) {
            if (!config_.rainfall.has_series(geo.names[u])) {
                throw DataError("model3: no rainfall series for " + geo.names[u]);
            }
            rain_series_[u] = config_.rainfall.series_index(geo.names[u]);
            for (double j : config_.rainfall.series(rain_series_[u])) {
                if (!(j >= 0.0 && j <= 1.0)) {
                    throw DataError("model3: rainfall for " + geo.names[u] + " is not standardized to [0, 1]");
                }
            }
        }
    }

    unit_campaigns_.assign(n, {});
    for (const auto& c : config_.campaigns) {
        unit_campaigns_[geo.index_of(c.department)].push_back({c.start, 0, 0, 0.0, c.duration_weeks});
        auto& list = unit_campaigns_[geo.index_of(c.department)];
        list.back().count = c.doses_1;
        list.back().doses = 1;
        list.push_back({c.start, 2, 0, c.doses_2, c.duration_weeks});
    }
    for (std::size_t u = 0; u < n; ++u) {
        auto& list = unit_campaigns_[u];
        std::stable_sort(list.begin(), list.end(),
                         [](const UnitCampaign& a, const UnitCampaign& b) { return a.tau < b.tau; });
        if (list.size() > 4) {
            throw ValidationError("model3: at most two campaigns per department (" + geo.names[u] + ")");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            // campaign j: one dose -> 2j-1, two doses -> 2j
            const std::size_t j = i / 2 + 1;
            list[i].z = list[i].doses == 1 ? 2 * j - 1 : 2 * j;
        }
    }

    const double day = kDaysPerYear;
    const double week = kWeeksPerYear;
    std::vector<ParameterInfo> p;
    for (std::size_t u = 0; u < n; ++u) {
        const auto k = haiti_position(geo.names[u]);
        p.push_back({"beta_" + std::to_string(u + 1), Transform::log, static_cast<int>(u),
                     k == npos ? 1e-7 : kBeta[k], "yr^-1"});
    }
    for (std::size_t u = 0; u < n; ++u) {
        const auto k = haiti_position(geo.names[u]);
        p.push_back({"betaW_" + std::to_string(u + 1), Transform::log, static_cast<int>(u),
                     k == npos ? 10.0 : kBetaW[k], "yr^-1"});
    }
    p.push_back({"mu_W", Transform::log, kShared, 9.77e-7, "km^2 wk^-1", week});
    p.push_back({"delta_W", Transform::log, kShared, 1.0 / 0.11, "wk^-1", week});
    p.push_back({"a", Transform::log, kShared, 1.0});
    p.push_back({"r", Transform::log, kShared, 0.78});
    p.push_back({"epsilon", Transform::identity, kShared, 1.0});
    p.push_back({"epsilon_W", Transform::log, kShared, 0.008});
    p.push_back({"f", Transform::logit, kShared, 0.25});
    p.push_back({"mu_IR", Transform::log, kShared, 1.0 / 5.0, "day^-1", day});
    p.push_back({"mu_RS", Transform::log, kShared, 1.0 / 8.0, "yr^-1"});
    p.push_back({"delta", Transform::log, kShared, 0.0159, "yr^-1"});
    p.push_back({"delta_C", Transform::log, kShared, 1.46, "yr^-1"});
    p.push_back({"sigma", Transform::identity, kShared, 0.218, "wk^1/2"});
    p.push_back({"rho", Transform::logit, kShared, 0.98});
    p.push_back({"psi", Transform::log, kShared, 88.58});

    hm_beta_.assign(n, npos);
    hm_h_.assign(n, npos);
    i0_.assign(n, npos);
    const std::pair<const char*, std::pair<double, double>> hurricane[] = {{"Grand'Anse", {36.88, 98.98}},
                                                                           {"Sud", {31.64, 58.43}}};
    std::vector<std::pair<std::size_t, std::string>> hm_names, i0_names;
    for (const auto& [dept, vals] : hurricane) {
        for (std::size_t u = 0; u < n; ++u) {
            if (geo.names[u] == dept) {
                const auto k = std::to_string(u + 1);
                p.push_back({"betaHM_" + k, Transform::log, static_cast<int>(u), vals.first, "yr^-1"});
                p.push_back({"hHM_" + k, Transform::log, static_cast<int>(u), vals.second, "yr^-1"});
                hm_names.push_back({u, k});
            }
        }
    }
    const std::pair<const char*, double> seeds[] = {{"Grand'Anse", 21.0}, {"Nippes", 6.0}};
    for (const auto& [dept, value] : seeds) {
        for (std::size_t u = 0; u < n; ++u) {
            if (geo.names[u] == dept) {
                const auto k = std::to_string(u + 1);
                p.push_back({"I0_" + k, Transform::log, static_cast<int>(u), value, "persons"});
                i0_names.push_back({u, k});
            }
        }
    }
    schema_ = std::make_shared<ParameterSchema>(std::move(p));
    const auto& s = *schema_;
    for (std::size_t u = 0; u < n; ++u) {
        beta_.push_back(s.index_of("beta_" + std::to_string(u + 1)));
        beta_w_.push_back(s.index_of("betaW_" + std::to_string(u + 1)));
    }
    for (const auto& [u, k] : hm_names) {
        hm_beta_[u] = s.index_of("betaHM_" + k);
        hm_h_[u] = s.index_of("hHM_" + k);
    }
    for (const auto& [u, k] : i0_names) {
        i0_[u] = s.index_of("I0_" + k);
    }
    mu_w_ = s.index_of("mu_W");
    delta_w_ = s.index_of("delta_W");
    a_ = s.index_of("a");
    r_ = s.index_of("r");
    eps_ = s.index_of("epsilon");
    eps_w_ = s.index_of("epsilon_W");
    f_ = s.index_of("f");
    mu_ir_ = s.index_of("mu_IR");
    mu_rs_ = s.index_of("mu_RS");
    delta_ = s.index_of("delta");
    delta_c_ = s.index_of("delta_C");
    sigma_ = s.index_of("sigma");
    rho_ = s.index_of("rho");
    psi_ = s.index_of("psi");
}

void Model3::validate(const ParameterSet& p) const
{
    PompModel::validate(p);
    if (p.get("sigma") < 0.0) {
        throw ValidationError("model3: sigma must be nonnegative");
    }
    if (p.get("epsilon") < 0.0) {
        throw ValidationError("model3: epsilon must be nonnegative");
    }
}

void Model3::check_covariates(double from, double to) const
{
    if (config_.rainfall.empty()) {
        throw DataError("model3: no rainfall covariate bound");
    }
    config_.rainfall.check_coverage(from, to);
}

double Model3::rainfall(std::size_t u, double t) const
{
    if (rain_series_[u] == npos) {
        throw DataError("model3: no rainfall for " + config_.geography.names[u] + " at " + time_to_date(t));
    }
    try {
        return config_.rainfall.value(rain_series_[u], t);
    }
    catch (const DataError&) {
        throw DataError("model3: rainfall for " + config_.geography.names[u] + " missing at " + time_to_date(t) +
                        " (t=" + std::to_string(t) + ")");
    }
}

double Model3::rainfall_factor(std::size_t u, double t, std::span<const double> theta) const
{
    const double j = rainfall(u, t);
    return 1.0 + theta[a_] * (j > 0.0 ? std::pow(j, theta[r_]) : 0.0);
}

double Model3::water_transmission(std::size_t u, double t, std::span<const double> theta) const
{
    double b = per_year(*schema_, theta, beta_w_[u]);
    if (hm_beta_[u] != npos && t >= config_.hurricane_time) {
        b += per_year(*schema_, theta, hm_beta_[u]) *
             std::exp(-per_year(*schema_, theta, hm_h_[u]) * (t - config_.hurricane_time));
    }
    return b;
}

double Model3::force_of_infection(std::span<const double> x, std::size_t u, double t, const ParamView& theta) const
{
    const auto th = theta.unit(u);
    const double w = x[water_index(u)];
    double coupling = 0.0;
    for (std::size_t v = 0; v < units(); ++v) {
        if (v != u) {
            coupling += x[index(v, 5)] + th[eps_] * x[index(v, 6)];
        }
    }
    return water_transmission(u, t, th) * w / (1.0 + w) + per_year(*schema_, th, beta_[u]) * coupling;
}

double Model3::efficacy(std::size_t u, std::size_t z, double t) const
{
    if (z == 0) {
        return 0.0;
    }
    for (const auto& c : unit_campaigns_[u]) {
        if (c.z == z) {
            return kEfficacyCorrection * config_.efficacy.efficacy((t - c.tau) / kWeek, c.doses);
        }
    }
    return 0.0;
}

void Model3::initialize(std::span<double> x, const ParamView& theta, Rng&) const
{
    std::fill(x.begin(), x.end(), 0.0);
    const auto& geo = config_.geography;
    std::size_t clamps = 0;
    for (std::size_t u = 0; u < geo.size(); ++u) {
        const auto th = theta.unit(u);
        const auto& y = config_.init_cases[u];
        const double rho = th[rho_];
        const double f = th[f_];
        double inf = 0.0;
        if (y[2] > 0.0) {
            inf = y[2] / (7.0 * rho * (th[mu_ir_] + (th[delta_] + th[delta_c_]) / 365.0));
        }
        else if (i0_[u] != npos) {
            inf = th[i0_[u]];
        }
        inf = std::round(inf);
        const double asym = std::round(inf * (1.0 - f) / f);
        double reported = 0.0;
        for (double v : y) {
            reported += v;
        }
        double r = (reported / (rho * f) - (inf + asym)) / 3.0;
        if (r < 0.0) {
            r = 0.0;
            ++clamps;
        }
        r = std::round(r);
        const double s = geo.population[u] - inf - asym - 3.0 * r;
        if (s < 0.0) {
            throw ValidationError("model3: initial infected and recovered exceed the population of " + geo.names[u]);
        }
        x[index(u, 0)] = s;
        x[index(u, 5)] = inf;
        x[index(u, 6)] = asym;
        x[index(u, 7)] = r;
        x[index(u, 8)] = r;
        x[index(u, 9)] = r;
        const double j = config_.median_rainfall;
        const double inflow = (1.0 + th[a_] * std::pow(j, th[r_])) * geo.density[u] * th[mu_w_] *
                              (inf + th[eps_w_] * asym);
        x[water_index(u)] = inflow / th[delta_w_];
    }
    note_clamps(clamps);
}

void Model3::step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const
{
    thread_local RateMatrix rm;
    thread_local std::vector<double> lambda, inflow;
    const auto& s = *schema_;
    const auto& geo = config_.geography;
    const std::size_t n = geo.size();
    lambda.assign(n, 0.0);
    inflow.assign(n, 0.0);

    for (std::size_t u = 0; u < n; ++u) {
        const auto th = theta.unit(u);
        const double sigma = th[sigma_];
        double ratio = 1.0;
        if (sigma != 0.0) {
            ratio = gamma_increment(dt, sigma * sigma * kWeek, rng) / dt;
        }
        lambda[u] = force_of_infection(x, u, t, theta) * ratio;
        inflow[u] = rainfall_factor(u, t, th) * geo.density[u] * per_year(s, th, mu_w_) *
                    (x[index(u, 5)] + th[eps_w_] * x[index(u, 6)]);
    }

    rm.clear();
    for (std::size_t u = 0; u < n; ++u) {
        const auto th = theta.unit(u);
        const double f = th[f_];
        const double delta = per_year(s, th, delta_);
        const double delta_c = per_year(s, th, delta_c_);
        const double mu_ir = per_year(s, th, mu_ir_);
        const double wane = 3.0 * per_year(s, th, mu_rs_);
        const std::size_t c = cases_index(u);
        const std::size_t inf = infections_index(u);

        std::array<double, 5> eta{};
        const double s0 = x[index(u, 0)];
        if (s0 > 0.0) {
            for (const auto& camp : unit_campaigns_[u]) {
                if (t >= camp.tau && t < camp.tau + camp.duration_weeks * kWeek) {
                    eta[camp.z] += camp.count / camp.duration_weeks * kWeeksPerYear / s0;
                }
            }
        }

        for (std::size_t z = 0; z < 5; ++z) {
            const double susceptibility = 1.0 - efficacy(u, z, t);
            rm.add(index(u, z), index(u, 5), f * lambda[u] * susceptibility, 0.0, {c, inf});
            rm.add(index(u, z), index(u, 6), (1.0 - f) * lambda[u] * susceptibility, 0.0, {inf, kNoTally});
            if (z == 0) {
                for (std::size_t k = 1; k < 5; ++k) {
                    if (eta[k] > 0.0) {
                        rm.add(index(u, 0), index(u, k), eta[k]);
                    }
                }
            }
            else {
                rm.add(index(u, z), index(u, 0), delta);
            }
        }
        rm.add(index(u, 5), index(u, 7), mu_ir);
        rm.add(index(u, 5), index(u, 0), delta + delta_c);
        rm.add(index(u, 6), index(u, 7), mu_ir);
        rm.add(index(u, 6), index(u, 0), delta);
        rm.add(index(u, 7), index(u, 8), wane);
        rm.add(index(u, 7), index(u, 0), delta);
        rm.add(index(u, 8), index(u, 9), wane);
        rm.add(index(u, 8), index(u, 0), delta);
        rm.add(index(u, 9), index(u, 0), delta + wane);
    }
    stochastic_step(x, rm, dt, rng);

    // reservoir: exact solution of W' = inflow - delta_W W over the step
    for (std::size_t u = 0; u < n; ++u) {
        const double dw = per_year(s, theta.unit(u), delta_w_);
        const double decay = std::exp(-dw * dt);
        const double w = x[water_index(u)];
        x[water_index(u)] = w * decay + inflow[u] / dw * (1.0 - decay);
    }
}

double Model3::measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                                double) const
{
    return theta[rho_] * x[cases_index(unit)];
}

double Model3::dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                        double t) const
{
    return nb_log_pmf(y, measurement_mean(x, unit, theta, t), theta[psi_]);
}

double Model3::rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                        Rng& rng) const
{
    return nb_sample(measurement_mean(x, unit, theta, t), theta[psi_], rng);
}

double Model3::new_infections(std::span<const double> x, std::size_t unit) const
{
    return x[infections_index(unit)];
}

} // namespace pompkit
