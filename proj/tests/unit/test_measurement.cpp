#include <doctest.h>

#include "support.hpp"

#include "pompkit/measurement.hpp"
#include "pompkit/spline.hpp"

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/normal.hpp>

using namespace pompkit;

TEST_CASE("negative binomial pmf against an independent implementation")
{
    for (double size : {0.5, 3.0, 20.0, 400.0}) {
        for (double mean : {0.2, 5.0, 150.0, 4000.0}) {
            const boost::math::negative_binomial_distribution<double> ref(size, size / (size + mean));
            for (double y : {0.0, 1.0, 7.0, 140.0, 3900.0}) {
                const double expected = std::log(boost::math::pdf(ref, y));
                if (std::isfinite(expected)) {
                    CHECK(nb_log_pmf(y, mean, size) == doctest::Approx(expected).epsilon(1e-9));
                }
            }
        }
    }
}

TEST_CASE("negative binomial with zero mean is a point mass")
{
    CHECK(nb_log_pmf(0.0, 0.0, 5.0) == 0.0);
    CHECK(std::isinf(nb_log_pmf(3.0, 0.0, 5.0)));
}

TEST_CASE("negative binomial draws have the stated mean and variance")
{
    Rng rng(11, Stream::user, {0});
    std::vector<double> v(200000);
    for (auto& y : v) {
        y = nb_sample(30.0, 4.0, rng);
    }
    const auto m = testkit::moments(v);
    CHECK(std::abs(m.mean - 30.0) < 4.0 * m.se);
    CHECK(m.var == doctest::Approx(30.0 + 900.0 / 4.0).epsilon(0.03));
}

TEST_CASE("log1p-normal quantiles")
{
    const double rho_m = 250.0;
    const double psi = 0.3;
    CHECK(log1p_normal_quantile(rho_m, psi, 0.975)
          == doctest::Approx(std::exp(std::log(rho_m + 1.0) + 1.959964 * psi) - 1.0).epsilon(1e-6));
    CHECK(log1p_normal_quantile(rho_m, psi, 0.025)
          == doctest::Approx(std::exp(std::log(rho_m + 1.0) - 1.959964 * psi) - 1.0).epsilon(1e-6));
    CHECK(log1p_normal_quantile(rho_m, psi, 0.5) == doctest::Approx(rho_m));
}

TEST_CASE("log1p-normal density is the Gaussian density of log(y+1)")
{
    const boost::math::normal_distribution<double> z(std::log(41.0), 0.4);
    for (double y : {0.0, 10.0, 40.0, 300.0}) {
        CHECK(log1p_normal_log_density(y, 40.0, 0.4) == doctest::Approx(std::log(boost::math::pdf(z, std::log1p(y)))));
    }
    Rng rng(12, Stream::user, {0});
    for (int i = 0; i < 1000; ++i) {
        const double y = log1p_normal_sample(40.0, 0.4, rng);
        REQUIRE(y >= 0.0);
        REQUIRE(y == std::round(y));
    }
}

TEST_CASE("periodic spline basis")
{
    Rng rng(13, Stream::user, {0});
    for (int i = 0; i < 500; ++i) {
        const double t = 20.0 * rng.uniform() - 10.0;
        const auto a = periodic_bspline_basis(t, 6);
        const auto b = periodic_bspline_basis(t + 1.0, 6);
        double sum = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            REQUIRE(std::abs(a[j] - b[j]) < 1e-12);
            REQUIRE(a[j] >= 0.0);
            sum += a[j];
        }
        REQUIRE(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("seasonal transmission")
{
    const std::vector<double> zeros(6, 0.0);
    for (double t : {2011.1, 2013.6, 2015.9}) {
        CHECK(seasonal_beta(t, zeros, 0.0, 2011.0, 2016.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    }
    // the trend is centred on the midpoint of the fitting window
    CHECK(seasonal_beta(2013.5, zeros, -0.3, 2011.0, 2016.0, 2.0) == doctest::Approx(2.0));
    CHECK(seasonal_beta(2016.0, zeros, -0.3, 2011.0, 2016.0, 2.0) == doctest::Approx(2.0 * std::exp(-0.3)));
}
