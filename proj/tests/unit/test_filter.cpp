#include <doctest.h>

#include "support.hpp"

#include "pompkit/optimize.hpp"
#include "pompkit/particle_filter.hpp"

#include <numeric>

using namespace pompkit;

TEST_CASE("systematic resampling")
{
    const std::vector<double> w{1.0, 0.0, 3.0};
    const auto idx = systematic_resample(w, 8, 0.5);
    CHECK(std::count(idx.begin(), idx.end(), 0u) == 2);
    CHECK(std::count(idx.begin(), idx.end(), 1u) == 0);
    CHECK(std::count(idx.begin(), idx.end(), 2u) == 6);
    CHECK(std::is_sorted(idx.begin(), idx.end()));
    CHECK_THROWS_AS(systematic_resample(std::vector<double>{0.0, 0.0}, 3, 0.5), NumericalError);
    CHECK_THROWS_AS(systematic_resample(std::vector<double>{1.0, -1.0}, 3, 0.5), NumericalError);
}

TEST_CASE("property: systematic resampling copies each particle floor or ceil of its expected count")
{
    Rng gen(21, Stream::user, {0});
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 1 + gen() % 50;
        const std::size_t count = 1 + gen() % 200;
        std::vector<double> w(n);
        for (auto& v : w) {
            v = gen.uniform() < 0.3 ? 0.0 : gen.uniform();
        }
        w[gen() % n] += 0.1;
        const double total = std::accumulate(w.begin(), w.end(), 0.0);
        const auto idx = systematic_resample(w, count, gen.uniform());
        REQUIRE(idx.size() == count);
        for (std::size_t i = 0; i < n; ++i) {
            const double expected = static_cast<double>(count) * w[i] / total;
            const auto got = static_cast<double>(std::count(idx.begin(), idx.end(), i));
            REQUIRE(got >= std::floor(expected) - 1e-9);
            REQUIRE(got <= std::ceil(expected) + 1e-9);
        }
    }
}

TEST_CASE("effective sample size")
{
    CHECK(effective_sample_size(std::vector<double>(10, 0.3)) == doctest::Approx(10.0));
    CHECK(effective_sample_size(std::vector<double>{0.0, 0.0, 5.0}) == doctest::Approx(1.0));
    CHECK(effective_sample_size(std::vector<double>{1.0, 1.0, 2.0}) == doctest::Approx(16.0 / 6.0));
}

TEST_CASE("block partitions are validated")
{
    CHECK_NOTHROW(validate_blocks(unit_blocks(3), 3));
    CHECK_NOTHROW(validate_blocks(single_block(3), 3));
    CHECK_THROWS_AS(validate_blocks({{0, 1}, {1, 2}}, 3), ValidationError);
    CHECK_THROWS_AS(validate_blocks({{0, 1}}, 3), ValidationError);
    CHECK_THROWS_AS(validate_blocks({{0, 1}, {}, {2}}, 3), ValidationError);
    CHECK_THROWS_AS(validate_blocks({{0, 3}}, 3), ValidationError);
}

TEST_CASE("one particle on a deterministic model reproduces the skeleton likelihood")
{
    const DecayModel truth(2, false);
    const auto grid = testkit::toy_grid(25, 1.0);
    const auto data = testkit::simulate_data(truth, truth.default_parameters(), grid, 4);
    const SirModel sir(SirConfig{1, 50000.0, true});
    const auto sir_data = testkit::simulate_data(SirModel(SirConfig{}), SirModel(SirConfig{}).default_parameters(),
                                                 testkit::toy_grid(30), 5);
    FilterOptions fo;
    fo.particles = 1;
    fo.seed = 9;
    const auto pf = particle_filter(sir, sir.default_parameters(), sir_data, testkit::toy_grid(30), fo);
    CHECK(pf.loglik == doctest::Approx(skeleton_loglik(sir, sir.default_parameters(), sir_data, testkit::toy_grid(30)))
                           .epsilon(1e-12));

    const DecayModel det(2, true);
    fo.particles = 7;
    const auto pf2 = particle_filter(det, det.default_parameters(), data, grid, fo);
    CHECK(pf2.loglik == doctest::Approx(skeleton_loglik(det, det.default_parameters(), data, grid)).epsilon(1e-12));
}

TEST_CASE("serial and OpenMP execution give identical results")
{
    const SirModel model(SirConfig{3});
    const auto grid = testkit::toy_grid(40);
    const auto data = testkit::simulate_data(model, model.default_parameters(), grid, 31);
    FilterOptions fo;
    fo.particles = 300;
    fo.seed = 32;
    fo.sample_size = 20;
    for (const Blocks& blocks : {Blocks{}, unit_blocks(3)}) {
        fo.blocks = blocks;
        fo.execution = Execution::serial;
        const auto a = particle_filter(model, model.default_parameters(), data, grid, fo);
        for (int workers : {2, 3, 8}) {
            fo.execution = Execution::openmp;
            fo.workers = workers;
            const auto b = particle_filter(model, model.default_parameters(), data, grid, fo);
            CHECK(a.loglik == b.loglik);
            CHECK(a.cond_logliks == b.cond_logliks);
            CHECK(a.filter_sample == b.filter_sample);
        }
    }
}

TEST_CASE("filter output shapes")
{
    const SirModel model(SirConfig{2});
    const auto grid = testkit::toy_grid(15);
    const auto data = testkit::simulate_data(model, model.default_parameters(), grid, 41);
    FilterOptions fo;
    fo.particles = 100;
    fo.sample_size = 30;
    fo.blocks = unit_blocks(2);
    const auto r = particle_filter(model, model.default_parameters(), data, grid, fo);
    CHECK(r.blocks == 2);
    CHECK(r.sample_count() == 30);
    CHECK(r.sample(0).size() == model.layout().size());
    CHECK(r.block_cond_logliks.size() == 2 * 15);
    CHECK(r.ess.size() == 15);
    double sum = 0.0;
    for (double c : r.block_cond_logliks) {
        sum += c;
    }
    CHECK(sum == doctest::Approx(r.loglik));
    for (double e : r.ess) {
        CHECK(e >= 1.0 - 1e-9);
        CHECK(e <= 100.0 + 1e-9);
    }
}

TEST_CASE("missing observations contribute nothing")
{
    const SirModel model(SirConfig{});
    const auto grid = testkit::toy_grid(10);
    ObservationSeries data({"unit1"}, grid.obs_times);
    for (std::size_t n = 0; n < 10; ++n) {
        data(0, n) = kMissing;
    }
    FilterOptions fo;
    fo.particles = 50;
    CHECK(particle_filter(model, model.default_parameters(), data, grid, fo).loglik == 0.0);
}

TEST_CASE("impossible data report the failing time")
{
    const SirModel model(SirConfig{});
    ParameterSet p = model.default_parameters();
    p.set("beta", 0.0);
    p.set("I0", 0.0);
    const auto grid = testkit::toy_grid(10);
    ObservationSeries data({"unit1"}, grid.obs_times);
    for (std::size_t n = 0; n < 10; ++n) {
        data(0, n) = n == 6 ? 3.0 : 0.0;
    }
    FilterOptions fo;
    fo.particles = 50;
    const auto r = particle_filter(model, p, data, grid, fo);
    REQUIRE(r.failure_index.has_value());
    CHECK(*r.failure_index == 6);
    CHECK(std::isinf(r.loglik));
}

TEST_CASE("mismatched data are rejected")
{
    const SirModel model(SirConfig{2});
    const auto grid = testkit::toy_grid(10);
    ObservationSeries data({"a"}, grid.obs_times);
    FilterOptions fo;
    CHECK_THROWS_AS(particle_filter(model, model.default_parameters(), data, grid, fo), DataError);
    fo.particles = 0;
    ObservationSeries ok({"a", "b"}, grid.obs_times);
    CHECK_THROWS_AS(particle_filter(model, model.default_parameters(), ok, grid, fo), ValidationError);
}
