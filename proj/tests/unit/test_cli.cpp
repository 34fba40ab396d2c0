#include <doctest.h>

#include "support.hpp"

#include "pompkit/cli.hpp"
#include "pompkit/io.hpp"
#include "pompkit/optimize.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace pompkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Workspace {
    fs::path root;
    Workspace()
    {
        static int counter = 0;
        root = fs::temp_directory_path() / ("pompkit_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string path(const std::string& name) const { return (root / name).string(); }
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& command, const json& config)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = run_command(command, config, out, err);
    if (code != 0) {
        MESSAGE(err.str());
    }
    return code;
}

json base_config(const Workspace& ws, const std::string& out)
{
    CliOptions o;
    o.seed = 11;
    o.out = ws.path(out);
    o.sets = {"toy.deterministic=true", "simulate.weeks=30"};
    return resolve_config(o);
}

} // namespace

TEST_CASE("configuration precedence: defaults, then file, then flags")
{
    Workspace ws;
    write_json(ws.path("cfg.json"), json{{"seed", 5},
                                          {"workers", 3},
                                          {"data", {{"cases", "inputs/cases.csv"}}},
                                          {"filter", {{"particles", 77}}}});
    CliOptions o;
    o.config_path = ws.path("cfg.json");
    auto c = resolve_config(o);
    CHECK(c["seed"] == 5);
    CHECK(c["workers"] == 3);
    CHECK(c["filter"]["particles"] == 77);
    CHECK(c["filter"]["sample"] == default_config()["filter"]["sample"]);
    CHECK(c["data"]["cases"] == (ws.root / "inputs" / "cases.csv").lexically_normal().string());

    o.seed = 9;
    o.workers = 1;
    o.sets = {"filter.particles=12", "beta=3.5", "toy.units=3", "forecast.scenario=V2"};
    c = resolve_config(o);
    CHECK(c["seed"] == 9);
    CHECK(c["workers"] == 1);
    CHECK(c["filter"]["particles"] == 12);
    CHECK(c["overrides"]["beta"] == 3.5);
    CHECK(c["toy"]["units"] == 3);
    CHECK(c["forecast"]["scenario"] == "V2");

    o.sets = {"novalue"};
    CHECK_THROWS_AS(resolve_config(o), ValidationError);
}

TEST_CASE("simulate is reproducible from its seed")
{
    Workspace ws;
    CliOptions o;
    o.seed = 21;
    o.sets = {"simulate.weeks=40", "simulate.n_sims=3", "toy.units=2"};
    o.out = ws.path("a");
    REQUIRE(run("simulate", resolve_config(o)) == 0);
    o.out = ws.path("b");
    REQUIRE(run("simulate", resolve_config(o)) == 0);
    CHECK(slurp(ws.path("a/simulation.csv")) == slurp(ws.path("b/simulation.csv")));
    CHECK(slurp(ws.path("a/cases.csv")) == slurp(ws.path("b/cases.csv")));
    CHECK_FALSE(slurp(ws.path("a/simulation.csv")).empty());
    o.seed = 22;
    o.out = ws.path("c");
    REQUIRE(run("simulate", resolve_config(o)) == 0);
    CHECK(slurp(ws.path("a/cases.csv")) != slurp(ws.path("c/cases.csv")));
}

TEST_CASE("a one-particle filter on a deterministic toy gives the skeleton likelihood")
{
    Workspace ws;
    REQUIRE(run("simulate", base_config(ws, "sim")) == 0);
    auto c = base_config(ws, "pf");
    c["data"]["cases"] = ws.path("sim/cases.csv");
    c["filter"]["particles"] = 1;
    c["filter"]["sample"] = 1;
    REQUIRE(run("filter", c) == 0);
    const auto summary = read_json(ws.path("pf/summary.json"));

    const auto cases = load_cases(ws.path("sim/cases.csv"));
    const auto grid = testkit::toy_grid(cases.length());
    ObservationSeries y(cases.unit_names(), grid.obs_times);
    for (std::size_t n = 0; n < cases.length(); ++n) {
        y(0, n) = cases(0, n);
    }
    const SirModel model(SirConfig{1, 50000.0, true});
    CHECK(summary["loglik"].get<double>()
          == doctest::Approx(skeleton_loglik(model, model.default_parameters(), y, grid)).epsilon(1e-9));
}

TEST_CASE("mcap on the bundled profile surface")
{
    Workspace ws;
    CliOptions o;
    o.config_path = std::string(POMPKIT_DATA_DIR) + "/../configs/profile_mcap.json";
    o.out = ws.path("mcap");
    REQUIRE(run("mcap", resolve_config(o)) == 0);
    const auto s = read_json(ws.path("mcap/summary.json"));
    const double theta0 = -0.04;
    const double half = 1.959964 * 0.02;
    CHECK(std::abs(s["lower"].get<double>() - (theta0 - half)) <= 0.02 * 2.0 * half);
    CHECK(std::abs(s["upper"].get<double>() - (theta0 + half)) <= 0.02 * 2.0 * half);
    CHECK(fs::exists(ws.path("mcap/mcap_curve.csv")));
}

TEST_CASE("profile output feeds mcap")
{
    Workspace ws;
    REQUIRE(run("simulate", base_config(ws, "sim")) == 0);
    auto c = base_config(ws, "profile");
    c["data"]["cases"] = ws.path("sim/cases.csv");
    c["profile"]["parameter"] = "beta";
    c["profile"]["lo"] = 1.6;
    c["profile"]["hi"] = 2.4;
    c["profile"]["points"] = 9;
    c["profile"]["replicates"] = 1;
    REQUIRE(run("profile", c) == 0);
    const auto table = read_csv(ws.path("profile/profile.csv"));
    CHECK(table.rows.size() == 9);
    CHECK(table.header == std::vector<std::string>{"parameter", "value", "replicate", "loglik"});

    auto m = base_config(ws, "mcap");
    m["mcap"]["input"] = ws.path("profile/profile.csv");
    REQUIRE(run("mcap", m) == 0);
    const auto s = read_json(ws.path("mcap/summary.json"));
    CHECK(s["lower"].get<double>() <= 2.0);
    CHECK(s["upper"].get<double>() >= 2.0);
}

TEST_CASE("a run without a seed fails validation and says so in the manifest")
{
    Workspace ws;
    const std::string out = ws.path("noseed");
    const char* argv[] = {"pompkit", "simulate", "--out", out.c_str()};
    std::ostringstream o;
    std::ostringstream e;
    CHECK(run_cli(4, argv, o, e) == 2);
    CHECK(e.str().find("seed") != std::string::npos);
    const auto manifest = read_json(ws.path("noseed/manifest.json"));
    CHECK(manifest["status"] == "failed");
    CHECK(manifest["error"]["code"] == 2);
}

TEST_CASE("manifest contents")
{
    Workspace ws;
    const std::string out = ws.path("m");
    const char* argv[] = {"pompkit", "simulate", "--seed", "4", "--out", out.c_str(), "--set", "simulate.weeks=10"};
    std::ostringstream o;
    std::ostringstream e;
    REQUIRE(run_cli(8, argv, o, e) == 0);
    const auto manifest = read_json(ws.path("m/manifest.json"));
    for (const char* key : {"command", "version", "seed", "workers", "started", "wall_time_seconds", "config", "rerun",
                            "outputs", "warnings", "status", "partial"}) {
        CHECK_MESSAGE(manifest.contains(key), key);
    }
    CHECK(manifest["seed"] == 4);
    CHECK(manifest["version"] == kVersion);
    CHECK(manifest["status"] == "complete");
    CHECK(fs::exists(ws.path("m/config.json")));
    CHECK(fs::exists(ws.path("m/summary.json")));
}

TEST_CASE("bad inputs map to their exit codes")
{
    Workspace ws;
    auto c = base_config(ws, "bad");
    c["data"]["cases"] = ws.path("absent.csv");
    CHECK(run("filter", c) == 5);
    write_text(ws.path("neg.csv"), "date,department,cases\n2012-01-07,A,-3\n");
    c["data"]["cases"] = ws.path("neg.csv");
    CHECK(run("filter", c) == 3);
    c = base_config(ws, "bad2");
    c["model"] = "model9";
    CHECK(run("simulate", c) == 2);
}
