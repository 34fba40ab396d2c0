#include <doctest.h>

#include "pompkit/core.hpp"
#include "pompkit/rng.hpp"

#include <set>

using namespace pompkit;

TEST_CASE("dates map linearly onto decimal years")
{
    CHECK(date_to_time("2000-01-01") == doctest::Approx(2000.0));
    const double a = date_to_time("2010-10-23");
    const double b = date_to_time("2010-10-30");
    CHECK(b - a == doctest::Approx(kWeek).epsilon(1e-12));
    CHECK(time_to_date(a) == "2010-10-23");
    CHECK(time_to_date(date_to_time("2016-02-29")) == "2016-02-29");
    CHECK_THROWS_AS(date_to_time("2010-13-01"), DataError);
    CHECK_THROWS_AS(date_to_time("yesterday"), DataError);
}

TEST_CASE("date round trip over many weeks")
{
    double t = date_to_time("1999-12-25");
    for (int i = 0; i < 2000; ++i) {
        const std::string d = time_to_date(t);
        CHECK(time_to_date(date_to_time(d)) == d);
        t += kWeek;
    }
}

TEST_CASE("transforms invert each other")
{
    Rng rng(5, Stream::user, {0});
    for (int i = 0; i < 1000; ++i) {
        const double x = 1e-3 + 50.0 * rng.uniform();
        CHECK(to_natural(Transform::log, to_estimation(Transform::log, x)) == doctest::Approx(x).epsilon(1e-12));
        const double p = rng.uniform();
        CHECK(to_natural(Transform::logit, to_estimation(Transform::logit, p)) == doctest::Approx(p).epsilon(1e-10));
        CHECK(to_estimation(Transform::identity, x) == x);
    }
    CHECK(parse_transform("logit") == Transform::logit);
    CHECK_THROWS_AS(parse_transform("probit"), ValidationError);
}

TEST_CASE("parameter sets")
{
    auto schema = std::make_shared<ParameterSchema>(std::vector<ParameterInfo>{
        {"beta", Transform::log, kShared, 2.0},
        {"rho", Transform::logit, kShared, 0.5},
        {"phi", Transform::identity, kShared, -1.0},
    });
    ParameterSet p(schema);
    CHECK(p.get("beta") == 2.0);
    CHECK(p.get("phi") == -1.0);
    CHECK_THROWS_AS(p.get("gamma"), ValidationError);

    SUBCASE("estimation round trip")
    {
        const auto est = p.estimation_values();
        ParameterSet q(schema);
        q.set("beta", 7.0);
        q.set_from_estimation(est);
        CHECK(q.get("beta") == doctest::Approx(2.0));
        CHECK(q.get("rho") == doctest::Approx(0.5));
    }
    SUBCASE("domain checks")
    {
        p.set("beta", -1.0);
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p.set("beta", 0.0);
        CHECK_NOTHROW(p.validate());
        CHECK_THROWS_AS(p.check_estimable("beta"), ValidationError);
        p.set("beta", 1.0);
        p.set("rho", 1.5);
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p.set("rho", std::nan(""));
        CHECK_THROWS_AS(p.validate(), ValidationError);
    }
    CHECK_THROWS_AS(ParameterSchema({{"a"}, {"a"}}), ValidationError);
}

TEST_CASE("time grids")
{
    TimeGrid g = TimeGrid::weekly(2010.0, 10);
    CHECK(g.size() == 10);
    CHECK(g.obs_times.front() == doctest::Approx(2010.0 + kWeek));
    CHECK_NOTHROW(g.validate());
    g.euler_step = 1.0;
    CHECK_THROWS_AS(g.validate(), ValidationError);
    TimeGrid bad{5.0, {5.0, 6.0}, 0.1};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK(substeps(0.0, 1.0, 0.3) == 4);
    CHECK(substeps(0.0, 1.0, 1.0) == 1);
}

TEST_CASE("covariate tables are piecewise constant with checked coverage")
{
    CovariateTable t({0.0, 1.0, 2.0}, 3.0);
    t.add_series("rain", {0.1, 0.5, 0.9});
    CHECK(t.value("rain", 0.0) == 0.1);
    CHECK(t.value("rain", 1.5) == 0.5);
    CHECK(t.value("rain", 2.999) == 0.9);
    CHECK_THROWS_AS(t.value("rain", 3.5), DataError);
    CHECK_THROWS_AS(t.check_coverage(0.5, 4.0), DataError);
    CHECK_NOTHROW(t.check_coverage(0.0, 3.0));
    CHECK_THROWS_AS(t.add_series("short", {1.0}), ValidationError);
}

TEST_CASE("rainfall standardization")
{
    const auto s = standardize_rainfall({{0.0, 5.0, 10.0}, {2.0, 2.0, 1.0}}, {"a", "b"});
    CHECK(s[0] == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(s[1][2] == 0.5);
    CHECK_THROWS_AS(standardize_rainfall({{1.0, -1.0}}, {"a"}), DataError);
}

TEST_CASE("observation series slicing")
{
    ObservationSeries y({"a", "b"}, {1.0, 2.0, 3.0});
    for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t n = 0; n < 3; ++n) {
            y(u, n) = static_cast<double>(10 * u + n);
        }
    }
    const auto s = y.slice(1, 2);
    CHECK(s.length() == 2);
    CHECK(s(1, 0) == 11.0);
    CHECK(s.times().front() == 2.0);
    CHECK_THROWS_AS(y.slice(2, 2), ValidationError);
}

TEST_CASE("random streams are addressed by key, not by order")
{
    Rng a(42, Stream::process, {3, 7});
    Rng b(42, Stream::process, {3, 7});
    for (int i = 0; i < 100; ++i) {
        CHECK(a() == b());
    }
    // distinct purposes, indices and seeds give distinct streams
    std::set<std::uint64_t> keys;
    for (std::uint64_t seed : {1, 2}) {
        for (auto tag : {Stream::init, Stream::process, Stream::measure, Stream::resample}) {
            for (std::uint64_t i = 0; i < 20; ++i) {
                keys.insert(Rng(seed, tag, {i}).key());
                keys.insert(Rng(seed, tag, {i, 0}).key());
            }
        }
    }
    CHECK(keys.size() == 2 * 4 * 20 * 2);

    Rng u(9, Stream::user, {0});
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        REQUIRE(v > 0.0);
        REQUIRE(v < 1.0);
        sum += v;
    }
    CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(0.01));
}
