#include "pompkit/vaccination.hpp"

#include "pompkit/core.hpp"

#include <algorithm>

namespace pompkit {

double EfficacyCurve::efficacy(double weeks_since, int doses) const
{
    if (weeks_since < 0.0 || weeks.empty()) {
        return 0.0;
    }
    auto it = std::upper_bound(weeks.begin(), weeks.end(), weeks_since);
    if (it == weeks.begin()) {
        return 0.0;
    }
    const auto i = static_cast<std::size_t>(std::distance(weeks.begin(), it) - 1);
    return doses >= 2 ? two_dose[i] : one_dose[i];
}

void EfficacyCurve::validate() const
{
    if (weeks.empty() || weeks.size() != one_dose.size() || weeks.size() != two_dose.size()) {
        throw DataError("efficacy curve needs matching, nonempty columns");
    }
    for (std::size_t i = 0; i < weeks.size(); ++i) {
        if (i > 0 && !(weeks[i] > weeks[i - 1])) {
            throw DataError("efficacy curve weeks must increase (row " + std::to_string(i + 1) + ")");
        }
        for (double e : {one_dose[i], two_dose[i]}) {
            if (!(e >= 0.0 && e < 1.0)) {
                throw DataError("efficacy values must lie in [0, 1) (row " + std::to_string(i + 1) + ")");
            }
        }
    }
}

EfficacyCurve EfficacyCurve::standard()
{
    return EfficacyCurve{{0.0, 52.0, 260.0}, {0.519, 0.0, 0.0}, {0.519, 0.519, 0.0}};
}

void ScenarioSpec::validate(const Geography& geo) const
{
    if (horizon_weeks < 52.0) {
        throw ValidationError("scenario horizon must be at least 52 weeks");
    }
    for (const auto& c : campaigns) {
        geo.index_of(c.department);
        if (!(c.doses_1 >= 0.0) || !(c.doses_2 >= 0.0)) {
            throw DataError("negative dose count for " + c.department + " in scenario " + id);
        }
        if (!(c.duration_weeks > 0.0)) {
            throw DataError("campaign duration must be positive for " + c.department + " in scenario " + id);
        }
    }
}

double ScenarioSpec::total_doses() const
{
    double s = 0.0;
    for (const auto& c : campaigns) {
        s += c.doses_1 + 2.0 * c.doses_2;
    }
    return s;
}

ScenarioSpec builtin_scenario(const std::string& id, const Geography& geo, double start)
{
    ScenarioSpec s;
    s.id = id;
    std::vector<std::string> depts;
    double weeks = 104.0;
    if (id == "V0") {
        return s;
    }
    if (id == "V1") {
        depts = {"Artibonite", "Centre"};
    }
    else if (id == "V2") {
        depts = {"Artibonite", "Centre", "Ouest"};
    }
    else if (id == "V3" || id == "V4") {
        depts = geo.names;
        weeks = id == "V3" ? 260.0 : 104.0;
    }
    else {
        throw ValidationError("unknown built-in scenario '" + id + "' (expected V0..V4)");
    }
    for (const auto& d : depts) {
        const double pop = geo.population[geo.index_of(d)];
        s.campaigns.push_back(Campaign{d, start, weeks, 0.1 * pop, 0.7 * pop});
    }
    return s;
}

double campaign_weekly_rate(const Campaign& c, double doses, double t)
{
    const double end = c.start + c.duration_weeks * kWeek;
    if (t < c.start || t >= end) {
        return 0.0;
    }
    return doses / c.duration_weeks;
}

} // namespace pompkit
