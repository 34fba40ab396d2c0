#pragma once

#include "pompkit/geography.hpp"

#include <string>
#include <vector>

namespace pompkit {

/// Step-function efficacy by weeks since vaccination for one and two doses.
struct EfficacyCurve {
    std::vector<double> weeks;      ///< increasing breakpoints, first is 0
    std::vector<double> one_dose;
    std::vector<double> two_dose;

    /// Value at the last breakpoint <= weeks_since; 0 before vaccination.
    double efficacy(double weeks_since, int doses) const;
    void validate() const;

    /// Flat 0.519 for both doses until week 52, two doses until week 260, then 0.
    static EfficacyCurve standard();
};

/// Under-five correction applied to adult efficacy.
inline constexpr double kUnderFiveEfficacy = 0.4688;
inline constexpr double kUnderFiveShare = 0.11;
inline constexpr double kEfficacyCorrection = 1.0 - (1.0 - kUnderFiveEfficacy) * kUnderFiveShare;

struct Campaign {
    std::string department;
    double start = 0.0;          ///< years
    double duration_weeks = 0.0;
    double doses_1 = 0.0;        ///< persons receiving one dose
    double doses_2 = 0.0;        ///< persons receiving two doses
};

struct ScenarioSpec {
    std::string id = "V0";
    std::vector<Campaign> campaigns;
    double horizon_weeks = 520.0;

    /// Throws DataError for unknown departments or negative doses, ValidationError for short horizons.
    void validate(const Geography& geo) const;
    double total_doses() const;
};

/// V0..V4 starting at `start`. Coverage: 70% of each targeted department's
/// population receives two doses and a further 10% one dose.
ScenarioSpec builtin_scenario(const std::string& id, const Geography& geo, double start);

/// Per-week dose rate of a campaign while active, else 0.
double campaign_weekly_rate(const Campaign& c, double doses, double t);

} // namespace pompkit
