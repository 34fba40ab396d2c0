#pragma once

#include "pompkit/model.hpp"

#include <array>

namespace pompkit {

/// SIRS metapopulation in weekly time units with negative binomial reports of
/// new infections. Units couple through `coupling` times the infectious count
/// of the other units.
struct SirConfig {
    std::size_t units = 1;
    double population = 50000.0;
    bool deterministic = false;
    bool unit_beta = false;   ///< one beta per unit instead of a shared one
    bool unit_i0 = false;     ///< one initial fraction per unit
};

class SirModel final : public PompModel {
public:
    explicit SirModel(SirConfig config);

    std::string name() const override { return config_.deterministic ? "toy:sir-det" : "toy:sir"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return config_.units; }
    const std::vector<std::string>& unit_names() const override { return unit_names_; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }
    bool deterministic() const override { return config_.deterministic; }
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

    /// Component index of compartment `c` (0=S, 1=I, 2=R, 3=C) in unit u.
    std::size_t index(std::size_t unit, std::size_t c) const { return unit * 4 + c; }

private:
    void fill_rates(std::span<const double> x, const ParamView& theta, RateMatrix& rm) const;

    SirConfig config_;
    StateLayout layout_;
    std::vector<std::string> unit_names_;
    std::shared_ptr<const ParameterSchema> schema_;
    std::vector<std::size_t> beta_idx_, i0_idx_;
    std::size_t gamma_idx_, omega_idx_, rho_idx_, psi_idx_, coupling_idx_, sigma_idx_, iota_idx_;
};

/// Independent infected counts per unit that each leave at rate `mu` per week.
/// new_infections() reports the current prevalence so elimination means
/// the compartment has emptied.
class DecayModel final : public PompModel {
public:
    DecayModel(std::size_t units, bool deterministic);

    std::string name() const override { return deterministic_ ? "toy:decay-det" : "toy:decay"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return unit_names_.size(); }
    const std::vector<std::string>& unit_names() const override { return unit_names_; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }
    bool deterministic() const override { return deterministic_; }

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

private:
    bool deterministic_;
    StateLayout layout_;
    std::vector<std::string> unit_names_;
    std::shared_ptr<const ParameterSchema> schema_;
};

/// Two-state hidden Markov chain with binary emissions, one transition per unit time.
struct HmmSpec {
    std::array<double, 2> initial{0.5, 0.5};
    std::array<std::array<double, 2>, 2> transition{{{0.9, 0.1}, {0.2, 0.8}}};
    std::array<std::array<double, 2>, 2> emission{{{0.8, 0.2}, {0.3, 0.7}}};  ///< P(y | x)
};

class HmmModel final : public PompModel {
public:
    explicit HmmModel(HmmSpec spec);

    std::string name() const override { return "toy:hmm"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return 1; }
    const std::vector<std::string>& unit_names() const override { return unit_names_; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

    const HmmSpec& spec() const { return spec_; }

private:
    HmmSpec spec_;
    StateLayout layout_;
    std::vector<std::string> unit_names_;
    std::shared_ptr<const ParameterSchema> schema_;
};

/// x_n = a x_{n-1} + N(0, q), y_n = x_n + N(0, r), x_0 ~ N(m0, v0).
struct LinearGaussianSpec {
    double a = 0.8;
    double q = 1.0;
    double r = 0.5;
    double m0 = 0.0;
    double v0 = 1.0;
};

class LinearGaussianModel final : public PompModel {
public:
    explicit LinearGaussianModel(LinearGaussianSpec spec);

    std::string name() const override { return "toy:linear-gaussian"; }
    const StateLayout& layout() const override { return layout_; }
    std::size_t units() const override { return 1; }
    const std::vector<std::string>& unit_names() const override { return unit_names_; }
    std::shared_ptr<const ParameterSchema> schema() const override { return schema_; }

    void initialize(std::span<double> x, const ParamView& theta, Rng& rng) const override;
    void step(std::span<double> x, double t, double dt, const ParamView& theta, Rng& rng) const override;
    double dmeasure(std::span<const double> x, std::size_t unit, double y, std::span<const double> theta,
                    double t) const override;
    double rmeasure(std::span<const double> x, std::size_t unit, std::span<const double> theta, double t,
                    Rng& rng) const override;
    double measurement_mean(std::span<const double> x, std::size_t unit, std::span<const double> theta,
                            double t) const override;
    double new_infections(std::span<const double> x, std::size_t unit) const override;

    const LinearGaussianSpec& spec() const { return spec_; }

private:
    LinearGaussianSpec spec_;
    StateLayout layout_;
    std::vector<std::string> unit_names_;
    std::shared_ptr<const ParameterSchema> schema_;
};

} // namespace pompkit
