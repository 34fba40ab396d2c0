#include <doctest.h>

#include "support.hpp"

#include "pompkit/haiti_models.hpp"
#include "pompkit/io.hpp"

using namespace pompkit;

namespace {

const std::string kData = POMPKIT_DATA_DIR;

Geography two_towns()
{
    Geography g;
    g.names = {"A", "B"};
    g.population = {1e4, 1e4};
    g.density = {100.0, 50.0};
    g.distance = {0.0, 100.0, 100.0, 0.0};
    g.river = {0.0, 1.0, 0.0, 0.0};
    return g;
}

double total(const StateLayout& layout, std::span<const double> x, std::size_t units)
{
    double s = 0.0;
    for (std::size_t u = 0; u < units; ++u) {
        s += layout.unit_population(x, static_cast<int>(u));
    }
    return s;
}

} // namespace

TEST_CASE("gravity coupling")
{
    const Geography g = two_towns();
    CHECK_NOTHROW(g.validate());
    const auto t = g.gravity(1e-8);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(t[2] == t[1]);

    Geography bad = g;
    bad.distance[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = g;
    bad.population[0] = -1.0;
    CHECK_THROWS_AS(bad.validate(), DataError);
    CHECK_THROWS_AS(g.index_of("C"), DataError);
}

TEST_CASE("built-in scenarios nest")
{
    const Geography geo = synthetic_haiti_geography();
    const double start = 2019.0;
    const auto v1 = builtin_scenario("V1", geo, start);
    const auto v2 = builtin_scenario("V2", geo, start);
    const auto v4 = builtin_scenario("V4", geo, start);
    CHECK(builtin_scenario("V0", geo, start).campaigns.empty());
    for (const auto& c : v1.campaigns) {
        const bool found = std::any_of(v2.campaigns.begin(), v2.campaigns.end(), [&](const Campaign& d) {
            return d.department == c.department && d.doses_2 == c.doses_2 && d.start == c.start;
        });
        CHECK(found);
    }
    CHECK(v1.total_doses() < v2.total_doses());
    CHECK(v2.total_doses() < v4.total_doses());
    CHECK(v4.campaigns.size() == geo.size());
    CHECK_THROWS_AS(builtin_scenario("V9", geo, start), ValidationError);

    ScenarioSpec s;
    s.campaigns.push_back(Campaign{"Atlantis", start, 10.0, 1.0, 1.0});
    CHECK_THROWS_AS(s.validate(geo), DataError);
}

TEST_CASE("campaign dose rates")
{
    const Campaign c{"A", 2019.0, 10.0, 0.0, 5000.0};
    CHECK(campaign_weekly_rate(c, 5000.0, 2018.99) == 0.0);
    CHECK(campaign_weekly_rate(c, 5000.0, 2019.0) == 500.0);
    CHECK(campaign_weekly_rate(c, 5000.0, 2019.0 + 10.5 * kWeek) == 0.0);
}

TEST_CASE("efficacy curve")
{
    const auto e = EfficacyCurve::standard();
    CHECK_NOTHROW(e.validate());
    CHECK(e.efficacy(-1.0, 2) == 0.0);
    CHECK(e.efficacy(10.0, 1) == doctest::Approx(0.519));
    CHECK(e.efficacy(100.0, 1) == 0.0);
    CHECK(e.efficacy(100.0, 2) > 0.0);
    CHECK(e.efficacy(300.0, 2) == 0.0);
}

TEST_CASE("toy SIR without transmission or infection stays silent")
{
    const SirModel model(SirConfig{2, 50000.0, false, false, false});
    ParameterSet p = model.default_parameters();
    p.set("beta", 0.0);
    p.set("I0", 0.0);
    const auto sims = simulate(model, p, testkit::toy_grid(40), 3, 5, 1);
    for (const auto& s : sims) {
        for (std::size_t u = 0; u < 2; ++u) {
            for (std::size_t n = 0; n < 40; ++n) {
                REQUIRE(s.observations(u, n) == 0.0);
            }
        }
    }
}

TEST_CASE("simulation does not depend on the worker count")
{
    const SirModel model(SirConfig{3});
    const auto p = model.default_parameters();
    const auto a = simulate(model, p, testkit::toy_grid(30), 8, 17, 1);
    const auto b = simulate(model, p, testkit::toy_grid(30), 8, 17, 4);
    for (std::size_t k = 0; k < 8; ++k) {
        CHECK(a[k].states == b[k].states);
    }
}

TEST_CASE("property: SIR units conserve their population")
{
    Rng gen(8, Stream::user, {0});
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t units = 1 + gen() % 3;
        const double pop = std::round(1000.0 + 100000.0 * gen.uniform());
        const SirModel model(SirConfig{units, pop});
        ParameterSet p = model.default_parameters();
        p.set("beta", 4.0 * gen.uniform());
        p.set("sigma", 0.5 * gen.uniform());
        p.set("coupling", 0.1 * gen.uniform());
        const auto sim = simulate(model, p, testkit::toy_grid(20), 1, gen(), 1).front();
        const auto& lay = model.layout();
        for (std::size_t n = 0; n <= 20; ++n) {
            const std::span<const double> x(sim.states.data() + n * lay.size(), lay.size());
            for (std::size_t u = 0; u < units; ++u) {
                REQUIRE(lay.unit_population(x, static_cast<int>(u)) == pop);
            }
        }
    }
}

TEST_CASE("model 2 conserves the national population over a short run")
{
    const Geography geo = load_geography(kData + "/geography.csv", kData + "/distance.csv", kData + "/river.csv");
    Model2Config c;
    c.geography = geo;
    c.t0 = 2010.8;
    c.first_cases.assign(geo.size(), 10.0);
    const Model2 m(c);
    const auto sim = simulate(m, m.default_parameters(), TimeGrid::weekly(c.t0, 30), 1, 1, 1).front();
    const auto& lay = m.layout();
    const double p0 = total(lay, std::span<const double>(sim.states.data(), lay.size()), geo.size());
    for (std::size_t n = 1; n <= 30; ++n) {
        const double pn = total(lay, std::span<const double>(sim.states.data() + n * lay.size(), lay.size()), geo.size());
        REQUIRE(std::abs(pn - p0) / p0 < 1e-10);
    }
    CHECK(m.deterministic());
}

TEST_CASE("model 3 keeps every department total fixed, with or without vaccination")
{
    const Geography geo = load_geography(kData + "/geography.csv", kData + "/distance.csv", kData + "/river.csv");
    Model3Config c;
    c.geography = geo;
    c.t0 = date_to_time("2018-06-16");
    c.rainfall = load_rainfall(kData + "/rainfall.csv", geo.names);
    c.hurricane_time = hurricane_matthew_time();
    c.init_cases.assign(geo.size(), {20.0, 20.0, 20.0, 20.0});
    c.campaigns = builtin_scenario("V4", geo, c.t0 + kWeek).campaigns;
    const Model3 m(c);
    const auto sim = simulate(m, m.default_parameters(), TimeGrid::weekly(c.t0, 60), 2, 3, 1);
    const auto& lay = m.layout();
    for (const auto& s : sim) {
        const std::span<const double> x0(s.states.data(), lay.size());
        for (std::size_t n = 1; n <= 60; ++n) {
            const std::span<const double> x(s.states.data() + n * lay.size(), lay.size());
            for (std::size_t u = 0; u < geo.size(); ++u) {
                const int ui = static_cast<int>(u);
                REQUIRE(lay.unit_population(x, ui) == lay.unit_population(x0, ui));
            }
        }
    }
    CHECK_THROWS_AS(m.check_covariates(c.t0, 2040.0), DataError);
}
