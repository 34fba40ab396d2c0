#include <doctest.h>

#include "support.hpp"

#include "pompkit/euler.hpp"

using namespace pompkit;

TEST_CASE("exit probabilities")
{
    const std::vector<double> one{1.0};
    CHECK(euler_exit_probabilities(one, 0.1)[0] == doctest::Approx(1.0 - std::exp(-0.1)));
    const std::vector<double> two{1.0, 3.0};
    const auto p = euler_exit_probabilities(two, 0.5);
    CHECK(p[0] == doctest::Approx(0.21617).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.64850).epsilon(1e-4));
    CHECK(p[0] + p[1] < 1.0);
    const std::vector<double> none{0.0, 0.0};
    CHECK(euler_exit_probabilities(none, 1.0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("euler multinomial edge cases")
{
    std::vector<std::int64_t> out(2);
    Rng rng(1, Stream::user, {0});
    const std::vector<double> rates{1.0, 2.0};
    CHECK(euler_multinomial(0, rates, 1.0, rng, out) == 0);
    CHECK(out == std::vector<std::int64_t>{0, 0});
    const std::vector<double> zero{0.0, 0.0};
    CHECK(euler_multinomial(50, zero, 1.0, rng, out) == 50);
    const std::vector<double> bad{1.0, -1.0};
    CHECK_THROWS_AS(euler_multinomial(5, bad, 1.0, rng, out), ValidationError);
    // huge hazard: everybody leaves, split between destinations
    const std::vector<double> huge{1e6, 1e6};
    const auto stay = euler_multinomial(1000, huge, 1.0, rng, out);
    CHECK(stay == 0);
    CHECK(out[0] + out[1] == 1000);
}

TEST_CASE("property: euler multinomial never creates or destroys individuals")
{
    Rng gen(2, Stream::user, {0});
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t k = 1 + gen() % 4;
        std::vector<double> rates(k);
        for (auto& r : rates) {
            r = gen.uniform() < 0.2 ? 0.0 : 10.0 * gen.uniform();
        }
        const auto n = static_cast<std::int64_t>(gen() % 10000);
        std::vector<std::int64_t> out(k);
        const auto stay = euler_multinomial(n, rates, gen.uniform(), gen, out);
        std::int64_t moved = 0;
        for (std::size_t j = 0; j < k; ++j) {
            REQUIRE(out[j] >= 0);
            if (rates[j] == 0.0) {
                REQUIRE(out[j] == 0);
            }
            moved += out[j];
        }
        REQUIRE(stay + moved == n);
    }
}

TEST_CASE("gamma increments")
{
    Rng rng(3, Stream::user, {0});
    CHECK(gamma_increment(0.25, 0.0, rng) == 0.25);
    CHECK_THROWS_AS(gamma_increment(0.0, 1.0, rng), ValidationError);
    CHECK_THROWS_AS(gamma_increment(0.1, -1.0, rng), ValidationError);
    std::vector<double> v(200000);
    for (auto& x : v) {
        x = gamma_increment(0.1, 0.04, rng);
        REQUIRE(x >= 0.0);
    }
    const auto m = testkit::moments(v);
    CHECK(std::abs(m.mean - 0.1) < 3.0 * std::sqrt(0.004 / 200000.0));
    CHECK(m.var == doctest::Approx(0.004).epsilon(0.02));
}

TEST_CASE("balanced demography conserves a unit exactly")
{
    // Pop = 1000, death rate 0.0159 / yr, daily steps for one year
    std::vector<double> x{700.0, 100.0, 50.0, 150.0};
    const std::vector<double> deaths(4, 0.0159);
    Rng rng(4, Stream::user, {0});
    double s_gain = 0.0;
    const double s_start = x[0];
    for (int day = 0; day < 365; ++day) {
        const auto rec = balanced_demography_step(x, deaths, 0, 1.0 / 365.0, rng);
        for (double f : rec.flows) {
            s_gain += f;
        }
        REQUIRE(x[0] + x[1] + x[2] + x[3] == 1000.0);
    }
    CHECK(x[0] - s_start == s_gain);
    CHECK(x[0] >= s_start);
}

TEST_CASE("rate matrices validate grouping and values")
{
    RateMatrix rm;
    rm.add(0, 1, 1.0);
    rm.add(1, 2, 1.0);
    rm.add(0, 2, 1.0);
    CHECK_THROWS_AS(rm.validate(), ValidationError);
    RateMatrix neg;
    neg.add(0, 1, -1.0);
    CHECK_THROWS_AS(neg.validate(), ValidationError);
    RateMatrix ok;
    ok.add(0, 1, 1.0);
    ok.add(0, 2, 2.0);
    CHECK_NOTHROW(ok.validate());
    CHECK(ok.rate(0, 2) == 2.0);
    CHECK(ok.rate(1, 2) == 0.0);
}

TEST_CASE("stochastic step keeps integer counts and records tallies")
{
    std::vector<double> x{1000.0, 10.0, 0.0, 0.0};
    RateMatrix rm;
    rm.add(0, 1, 0.5, 0.1, {3, kNoTally});
    rm.add(1, 2, 1.0);
    rm.add_inflow(0, 20.0);
    Rng rng(5, Stream::user, {0});
    for (int i = 0; i < 100; ++i) {
        const double c_before = x[3];
        StepFlows rec;
        stochastic_step(x, rm, 0.1, rng, &rec);
        CHECK(x[3] - c_before == rec.flows[0]);
        for (double v : x) {
            REQUIRE(v == std::round(v));
            REQUIRE(v >= 0.0);
        }
    }
}

TEST_CASE("RK4 ODE step against the exponential solution")
{
    std::vector<double> x{1.0, 0.0};
    const RateField field = [](double, std::span<const double>, RateMatrix& rm) { rm.add(0, 1, 2.0); };
    double t = 0.0;
    for (int i = 0; i < 100; ++i) {
        ode_step(x, field, t, 0.01, {});
        t += 0.01;
    }
    CHECK(x[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
    CHECK(x[0] + x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ODE clamps undershoots and reports them")
{
    std::vector<double> x{1.0, 0.0};
    const RateField field = [](double, std::span<const double>, RateMatrix& rm) { rm.add(0, 1, 500.0); };
    const auto rep = ode_step(x, field, 0.0, 1.0, {});
    CHECK(x[0] >= 0.0);
    CHECK(rep.count >= 1);
}
