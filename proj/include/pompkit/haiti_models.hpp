#pragma once

#include "pompkit/geography.hpp"
#include "pompkit/model.hpp"
#include "pompkit/vaccination.hpp"

#include <array>

namespace pompkit {

/// Parameter value converted to per-year units using the schema's factor.
inline double per_year(const ParameterSchema& s, std::span<const double> theta, std::size_t i)
{
    return theta[i] * s[i].year_factor;
}

// ---------------------------------------------------------------------------
// National SEIAR model with vaccination cohorts, spline seasonality and trend.

struct Model1Cohort {
    double tau = 0.0;   ///< vaccination week start (years)
    int doses = 1;
    double count = 0.0; ///< persons vaccinated during the pulse week
};

struct Model1Config {
    double t0 = 0.0;
    double tN = 1.0;                 ///< last observation time, anchors the trend
    double population = 10911819.0;
    double phase_switch = 0.0;       ///< epidemic -> endemic noise/overdispersion switch
    EfficacyCurve efficacy = EfficacyCurve::standard();
    std::vector<Model1Cohort> cohorts;
};

/// Department campaigns collapsed into national one-week pulses of equal total
/// doses: one cohort per (start date, dose count).
std::vector<Model1Cohort> model1_cohorts(const ScenarioSpec& scenario);

class Model1 final : public PompModel {
public:
    explicit Model1(Model1Config config);

    std::string name() const override { return "model1"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return 1; }
    const std::vector<std::string>& unit_names() const override { return unit_names_; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }
    void validate(const ParameterSet& p) const override;

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

    const Model1Config& config() const { return config_; }

    /// beta(t) in per-year units.
    double transmission(double t, std::span<const double> theta) const;

    /// lambda = (sum I + eps sum A)^nu * gamma_ratio * beta(t) / N, per year.
    double force_of_infection(std::span<const double> x, double t, std::span<const double> theta,
                              double gamma_ratio) const;

    /// Asymptomatic fraction f_z(t) of cohort z.
    double asymptomatic_fraction(std::size_t z, double t) const;

    /// Per-capita vaccination rate out of cohort 0 into cohort z (z >= 1), per year.
    double vaccination_rate(std::span<const double> x, std::size_t z, double t) const;

    /// Rates at X(t) given the force of infection.
    void fill_rates(std::span<const double> x, double t, std::span<const double> theta, double lambda,
                    RateMatrix& rm) const;

    std::size_t cohorts() const { return config_.cohorts.size() + 1; }
    std::size_t index(std::size_t z, std::size_t comp) const { return z * 5 + comp; }  ///< comp: S,E,I,A,R
    std::size_t cases_index() const { return cases_; }
    std::size_t infections_index() const { return infections_; }

private:
    Model1Config config_;
    StateLayout layout_;
    std::vector<std::string> unit_names_{"Haiti"};
    std::shared_ptr<const ParameterSchema> schema_;
    std::size_t cases_ = 0, infections_ = 0;
    std::array<std::size_t, 6> beta_{};
    std::size_t zeta_, nu_, rho_, psi_epi_, psi_end_, sigma_epi_, sigma_end_, i0_, e0_, mu_ei_, mu_ir_, mu_rs_, mu_s_,
        delta_, eps_;
};

// ---------------------------------------------------------------------------
// Deterministic metapopulation SEIAR + water model with gravity coupling.

struct Model2Config {
    Geography geography;
    double t0 = 0.0;
    std::vector<double> first_cases;  ///< reported cases per unit in the first week
    std::vector<Campaign> campaigns;
};

class Model2 final : public PompModel {
public:
    explicit Model2(Model2Config config);

    std::string name() const override { return "model2"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return config_.geography.size(); }
    const std::vector<std::string>& unit_names() const override { return config_.geography.names; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }
    bool deterministic() const override { return true; }
    void validate(const ParameterSet& p) const override;

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

    const Model2Config& config() const { return config_; }

    /// Parameters the trajectory matcher frees by default.
    static std::vector<std::string> default_free_parameters();

    double force_of_infection(std::span<const double> x, std::size_t u, double t, const ParamView& theta) const;
    void fill_rates(std::span<const double> x, double t, const ParamView& theta, RateMatrix& rm) const;

    /// Efficacy of cohort z (0 = unvaccinated).
    static double efficacy(std::size_t z);

    /// comp: 0=S 1=E 2=I 3=A 4=R 5=RA
    std::size_t index(std::size_t u, std::size_t z, std::size_t comp) const { return u * stride_ + z * 6 + comp; }
    std::size_t water_index(std::size_t u) const { return u * stride_ + 30; }
    std::size_t cases_index(std::size_t u) const { return u * stride_ + 31; }
    std::size_t infections_index(std::size_t u) const { return u * stride_ + 32; }

private:
    Model2Config config_;
    StateLayout layout_;
    std::shared_ptr<const ParameterSchema> schema_;
    std::size_t stride_ = 33;
    std::vector<double> gravity_kernel_;  ///< Pop_u Pop_v / D_uv^2
    std::vector<std::vector<std::size_t>> unit_campaigns_;
    std::size_t beta_, beta_w_, phi_, mu_rs_, mu_w_, psi_, w_sat_, a_, mu_ei_, mu_ir_, omega1_, omega2_, f_, eps_,
        eps_w_, delta_w_, rho_, v_rate_, w_r_;
};

// ---------------------------------------------------------------------------
// Stochastic metapopulation model with rainfall-driven reservoir and hurricane forcing.

struct Model3Config {
    Geography geography;
    double t0 = 0.0;
    CovariateTable rainfall;                      ///< standardized, one series per department name
    std::vector<std::array<double, 4>> init_cases;  ///< weeks -3..0 per unit
    EfficacyCurve efficacy = EfficacyCurve::standard();
    std::vector<Campaign> campaigns;
    double hurricane_time = 0.0;
    double median_rainfall = 0.002376;
};

class Model3 final : public PompModel {
public:
    explicit Model3(Model3Config config);

    std::string name() const override { return "model3"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return config_.geography.size(); }
    const std::vector<std::string>& unit_names() const override { return config_.geography.names; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }
    void validate(const ParameterSet& p) const override;
    void check_covariates(double from, double to) const override;

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

    const Model3Config& config() const { return config_; }

    double force_of_infection(std::span<const double> x, std::size_t u, double t, const ParamView& theta) const;
    /// Water-to-human coefficient including the hurricane pulse, per year.
    double water_transmission(std::size_t u, double t, std::span<const double> theta) const;
    /// Shedding multiplier 1 + a J^r.
    double rainfall_factor(std::size_t u, double t, std::span<const double> theta) const;
    double rainfall(std::size_t u, double t) const;
    double efficacy(std::size_t u, std::size_t z, double t) const;

    /// comp: S0..S4 = 0..4, I = 5, A = 6, R1..R3 = 7..9
    std::size_t index(std::size_t u, std::size_t comp) const { return u * stride_ + comp; }
    std::size_t water_index(std::size_t u) const { return u * stride_ + 10; }
    std::size_t cases_index(std::size_t u) const { return u * stride_ + 11; }
    std::size_t infections_index(std::size_t u) const { return u * stride_ + 12; }

    /// Index of the hurricane parameters for unit u, or npos.
    std::size_t hurricane_beta_index(std::size_t u) const { return hm_beta_[u]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    struct UnitCampaign {
        double tau;
        int doses;
        std::size_t z;
        double count;
        double duration_weeks;
    };

    Model3Config config_;
    StateLayout layout_;
    std::shared_ptr<const ParameterSchema> schema_;
    std::size_t stride_ = 13;
    std::vector<std::size_t> beta_, beta_w_, hm_beta_, hm_h_, i0_, rain_series_;
    std::vector<std::vector<UnitCampaign>> unit_campaigns_;
    std::size_t mu_w_, delta_w_, a_, r_, eps_, eps_w_, f_, mu_ir_, mu_rs_, delta_, delta_c_, sigma_, rho_, psi_;
};

/// Reference dates.
double model1_default_t0();
double model1_phase_switch();
double model3_default_t0();
double hurricane_matthew_time();

} // namespace pompkit
