#include <doctest.h>

#include "support.hpp"

#include "pompkit/forecast.hpp"
#include "pompkit/io.hpp"

using namespace pompkit;

namespace {

ForecastOptions weekly_options(std::size_t sims, std::size_t horizon, std::size_t window, std::uint64_t seed)
{
    ForecastOptions fo;
    fo.n_sims = sims;
    fo.seed = seed;
    fo.horizon_weeks = horizon;
    fo.window_weeks = window;
    fo.week = 1.0;
    fo.euler_step = 1.0 / 7.0;
    return fo;
}

Model2 model2_with(const std::string& scenario)
{
    const std::string data = POMPKIT_DATA_DIR;
    Model2Config c;
    c.geography = load_geography(data + "/geography.csv", data + "/distance.csv", data + "/river.csv");
    c.t0 = date_to_time("2010-10-16");
    c.first_cases.assign(c.geography.size(), 20.0);
    c.campaigns = builtin_scenario(scenario, c.geography, date_to_time("2012-01-07")).campaigns;
    return Model2(c);
}

} // namespace

TEST_CASE("zero runs")
{
    const std::vector<double> a{1, 0, 0, 0, 2, 0, 0};
    CHECK(has_zero_run(a, 3));
    CHECK_FALSE(has_zero_run(a, 4));
    CHECK(has_zero_run(a, 1));
    CHECK_FALSE(has_zero_run(std::vector<double>{0.5, 1e-12}, 1));
    CHECK(has_zero_run(std::vector<double>(52, 0.0), 52));
    CHECK_THROWS_AS(has_zero_run(a, 0), ValidationError);
}

TEST_CASE("elimination probability counts qualifying simulations")
{
    ForecastResult r;
    r.sims = 10;
    r.units = 2;
    r.weeks = 6;
    r.infections.assign(r.sims * r.units * r.weeks, 1.0);
    for (std::size_t s : {1, 4, 8}) {
        for (std::size_t u = 0; u < 2; ++u) {
            for (std::size_t w = 2; w < 6; ++w) {
                r.infections[(s * 2 + u) * 6 + w] = 0.0;
            }
        }
    }
    // one unit silent is not enough
    for (std::size_t w = 0; w < 6; ++w) {
        r.infections[(2 * 2 + 0) * 6 + w] = 0.0;
    }
    CHECK(elimination_probability(r, 4) == doctest::Approx(0.3));
    CHECK(r.eliminated[4] == 1);
    CHECK(r.eliminated[2] == 0);
    CHECK_THROWS_AS(elimination_probability(r, 7), ValidationError);
}

TEST_CASE("states are mapped by component name")
{
    StateLayout from;
    from.add("S[a]", 0);
    from.add("I[a]", 0);
    StateLayout to;
    to.add("I[a]", 0);
    to.add("V[a]", 0);
    to.add("S[a]", 0);
    const std::vector<double> x{7.0, 3.0};
    CHECK(map_state(from, x, to) == std::vector<double>{3.0, 0.0, 7.0});
    CHECK_THROWS_AS(map_state(to, x, from), ValidationError);
    CHECK_THROWS_AS(map_state(from, std::vector<double>{1.0}, to), ValidationError);
}

TEST_CASE("pure death process matches the extinction law")
{
    // each of k individuals survives a week with probability 1/2; a zero run of
    // `window` weeks inside `horizon` needs extinction by week horizon - window + 1
    const DecayModel model(1, false);
    ParameterSet p = model.default_parameters();
    for (double k : {1.0, 4.0, 10.0}) {
        p.set("I0", k);
        const std::size_t horizon = 20;
        const std::size_t window = 15;
        const auto r = forecast_from_initial(model, {p}, 0.0, weekly_options(4000, horizon, window, 55));
        const double exact = std::pow(1.0 - std::pow(0.5, static_cast<double>(horizon - window + 1)), k);
        const double se = std::sqrt(exact * (1.0 - exact) / 4000.0);
        CHECK(std::abs(r.probability - exact) < 3.0 * se + 1e-12);
    }
}

TEST_CASE("forecasts are reproducible and independent of the worker count")
{
    const SirModel model(SirConfig{2});
    const auto p = model.default_parameters();
    const auto grid = testkit::toy_grid(10);
    const auto sim = simulate(model, p, grid, 1, 3, 1).front();
    const std::size_t d = model.layout().size();
    // a filter sample of identical rows
    std::vector<double> sample;
    for (int k = 0; k < 5; ++k) {
        sample.insert(sample.end(), sim.states.end() - static_cast<std::ptrdiff_t>(d), sim.states.end());
    }
    auto fo = weekly_options(30, 60, 52, 8);
    fo.workers = 1;
    const auto a = forecast_from_filter(model, {p}, model.layout(), sample, 10.0, fo);
    fo.workers = 4;
    const auto b = forecast_from_filter(model, {p}, model.layout(), sample, 10.0, fo);
    CHECK(a.infections == b.infections);
    CHECK(a.cases == b.cases);
    CHECK(a.probability == b.probability);
    CHECK(a.times.front() == doctest::Approx(11.0));
    CHECK(a.source == "filter");
    fo.horizon_weeks = 10;
    CHECK_THROWS_AS(forecast_from_filter(model, {p}, model.layout(), sample, 10.0, fo), ValidationError);
}

TEST_CASE("deterministic projection band and vaccination effect")
{
    const Model2 none = model2_with("V0");
    const Model2 all = model2_with("V4");
    const auto p = none.default_parameters();
    const TimeGrid grid = TimeGrid::weekly(none.config().t0, 300);
    const auto a = trajectory_projection(none, p, grid);
    const auto b = trajectory_projection(all, p, grid);
    double ca = 0.0;
    double cb = 0.0;
    for (std::size_t i = 0; i < a.mean.size(); ++i) {
        REQUIRE(a.lower[i] <= a.mean[i] + 1e-9);
        REQUIRE(a.mean[i] <= a.upper[i] + 1e-9);
        ca += a.infections[i];
        cb += b.infections[i];
    }
    CHECK(cb <= ca);
    // identical until the campaigns begin
    CHECK(a.infections[10] == b.infections[10]);
}
