#include <doctest.h>

#include "support.hpp"

#include "pompkit/io.hpp"

#include <filesystem>
#include <unistd.h>

using namespace pompkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("pompkit_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& text) const
    {
        const auto p = (path / name).string();
        write_text(p, text);
        return p;
    }
};

} // namespace

TEST_CASE("case tables round trip")
{
    TempDir dir;
    std::vector<double> times;
    for (int w = 0; w < 6; ++w) {
        times.push_back(date_to_time("2012-03-03") + w * kWeek);
    }
    ObservationSeries y({"Centre", "Nord"}, times);
    for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t n = 0; n < 6; ++n) {
            y(u, n) = static_cast<double>(u * 100 + n * n);
        }
    }
    y(1, 3) = kMissing;
    const auto path = (dir.path / "cases.csv").string();
    write_cases(path, y);
    const auto back = load_cases(path);
    REQUIRE(back.units() == 2);
    REQUIRE(back.length() == 6);
    CHECK(back.unit_names() == y.unit_names());
    for (std::size_t u = 0; u < 2; ++u) {
        for (std::size_t n = 0; n < 6; ++n) {
            if (u == 1 && n == 3) {
                CHECK(is_missing(back(u, n)));
            }
            else {
                CHECK(back(u, n) == y(u, n));
            }
            CHECK(back.times()[n] == doctest::Approx(times[n]).epsilon(1e-12));
        }
    }
}

TEST_CASE("malformed case tables are rejected with a data error")
{
    TempDir dir;
    const std::string header = "date,department,cases\n";
    CHECK_THROWS_AS(load_cases(dir.file("dup.csv", header + "2012-01-07,A,1\n2012-01-07,A,2\n")), DataError);
    CHECK_THROWS_AS(load_cases(dir.file("gap.csv", header + "2012-01-07,A,1\n2012-01-21,A,2\n")), DataError);
    CHECK_THROWS_AS(load_cases(dir.file("neg.csv", header + "2012-01-07,A,-1\n2012-01-14,A,2\n")), DataError);
    CHECK_THROWS_AS(load_cases(dir.file("txt.csv", header + "2012-01-07,A,lots\n")), DataError);
    CHECK_THROWS_AS(load_cases(dir.file("col.csv", "date,place,cases\n2012-01-07,A,1\n")), DataError);
    CHECK_THROWS_AS(load_cases(dir.file("empty.csv", header)), DataError);
    CHECK_THROWS_AS(load_cases((dir.path / "absent.csv").string()), IoError);

    const auto na = load_cases(dir.file("na.csv", header + "2012-01-07,A,NA\n2012-01-14,A,2\n2012-01-14,B,0\n"));
    CHECK(is_missing(na(0, 0)));
    CHECK(is_missing(na(1, 0)));
    CHECK(na(0, 1) == 2.0);

    const std::vector<std::string> expected{"B", "A", "C"};
    CHECK_THROWS_AS(load_cases(dir.file("units.csv", header + "2012-01-07,A,1\n2012-01-07,B,1\n"), &expected),
                    DataError);
}

TEST_CASE("quoted csv fields")
{
    TempDir dir;
    const auto t = read_csv(dir.file("q.csv", "name,note\n\"Grand'Anse\",\"a, b\"\n"));
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][1] == "a, b");
    CHECK(t.column("note") == 1);
    CHECK_THROWS_AS(t.column("other"), DataError);
}

TEST_CASE("property: formatted numbers read back exactly")
{
    Rng rng(31, Stream::user, {0});
    for (int i = 0; i < 20000; ++i) {
        const double mag = std::pow(10.0, 40.0 * rng.uniform() - 20.0);
        const double v = (rng.uniform() < 0.5 ? -1.0 : 1.0) * mag * rng.uniform();
        REQUIRE(parse_number(format_number(v), "test") == v);
    }
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(0.25) == "0.25");
    CHECK_THROWS_AS(parse_number("1.5x", "test"), DataError);
}

TEST_CASE("parameter files round trip")
{
    TempDir dir;
    const SirModel model(SirConfig{3, 1e4, false, true, true});
    ParameterSet p = model.default_parameters();
    Rng rng(32, Stream::user, {0});
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& info = (*model.schema())[i];
        p.set(info.name, info.transform == Transform::logit ? rng.uniform() : 5.0 * rng.uniform());
    }
    const auto path = (dir.path / "params.json").string();
    save_parameters(path, p);
    const auto back = load_parameters(path, model.default_parameters());
    CHECK(back == p);

    ParameterSet q = model.default_parameters();
    apply_parameters(q, nlohmann::json{{"gamma", 0.5}}, "inline");
    CHECK(q.get("gamma") == 0.5);
    CHECK_THROWS_AS(apply_parameters(q, nlohmann::json{{"delta", 0.5}}, "inline"), ValidationError);
    CHECK_THROWS_AS(apply_parameters(q, nlohmann::json{{"gamma", "fast"}}, "inline"), ValidationError);
    CHECK_THROWS_AS(read_json(dir.file("bad.json", "{nope")), DataError);
}

TEST_CASE("bundled inputs load")
{
    const std::string data = POMPKIT_DATA_DIR;
    const auto geo = load_geography(data + "/geography.csv", data + "/distance.csv", data + "/river.csv");
    CHECK(geo.size() == 10);
    const auto cases = load_cases(data + "/cases.csv", &geo.names);
    CHECK(cases.length() == 400);
    const auto eff = load_efficacy(data + "/efficacy.csv");
    CHECK(eff.efficacy(10.0, 2) == EfficacyCurve::standard().efficacy(10.0, 2));
    const auto sc = load_scenarios(data + "/scenarios.csv", geo);
    CHECK(sc.count("V0") == 1);
    CHECK(sc.at("V4").campaigns.size() == 10);
    const auto rain = load_rainfall(data + "/rainfall.csv", geo.names);
    CHECK(rain.value(geo.names[0], date_to_time("2015-06-06")) <= 1.0);
}
