// Regenerates the bundled synthetic inputs under data/.
//   make_synthetic_data [out_dir] [seed]

#include "pompkit/haiti_models.hpp"
#include "pompkit/io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

using namespace pompkit;

namespace {

constexpr std::size_t kWeeks = 400;
constexpr std::uint64_t kDefaultSeed = 20101023;

std::string matrix_csv(const Geography& g, const std::vector<double>& m)
{
    std::ostringstream os;
    os << "department";
    for (const auto& n : g.names) {
        os << ',' << n;
    }
    os << '\n';
    for (std::size_t u = 0; u < g.size(); ++u) {
        os << g.names[u];
        for (std::size_t v = 0; v < g.size(); ++v) {
            os << ',' << format_number(m[u * g.size() + v]);
        }
        os << '\n';
    }
    return os.str();
}

/// Wet seasons peak in May and October; amounts in mm per week.
std::string rainfall_csv(const Geography& g, double from, double to, std::uint64_t seed, CovariateTable& table)
{
    std::vector<double> times;
    for (double t = from; t < to; t += kWeek) {
        times.push_back(t);
    }
    std::ostringstream os;
    os << "date,department,mm\n";
    std::vector<std::vector<double>> raw(g.size(), std::vector<double>(times.size()));
    for (std::size_t u = 0; u < g.size(); ++u) {
        Rng rng(seed, Stream::user, {100, u});
        std::gamma_distribution<double> noise(2.0, 0.5);
        for (std::size_t n = 0; n < times.size(); ++n) {
            const double phase = times[n] - std::floor(times[n]);
            const double season = 1.0 + 0.8 * std::cos(2.0 * M_PI * (phase - 0.37)) + 0.6 * std::cos(4.0 * M_PI * (phase - 0.37));
            raw[u][n] = std::round(std::max(0.0, 12.0 * season * noise(rng)) * 10.0) / 10.0;
        }
    }
    for (std::size_t n = 0; n < times.size(); ++n) {
        for (std::size_t u = 0; u < g.size(); ++u) {
            os << time_to_date(times[n]) << ',' << g.names[u] << ',' << format_number(raw[u][n]) << '\n';
        }
    }
    const auto std_values = standardize_rainfall(raw, g.names);
    table = CovariateTable(times, times.back() + kWeek);
    for (std::size_t u = 0; u < g.size(); ++u) {
        table.add_series(g.names[u], std_values[u]);
    }
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    try {
        const std::filesystem::path out = argc > 1 ? argv[1] : POMPKIT_DATA_DIR;
        const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : kDefaultSeed;
        std::filesystem::create_directories(out);
        const auto file = [&](const char* name) { return (out / name).string(); };

        const Geography geo = synthetic_haiti_geography();
        {
            std::ostringstream os;
            os << "department,population,density\n";
            for (std::size_t u = 0; u < geo.size(); ++u) {
                os << geo.names[u] << ',' << format_number(geo.population[u]) << ',' << format_number(geo.density[u])
                   << '\n';
            }
            write_text(file("geography.csv"), os.str());
        }
        write_text(file("distance.csv"), matrix_csv(geo, geo.distance));
        write_text(file("river.csv"), matrix_csv(geo, geo.river));

        const EfficacyCurve eff = EfficacyCurve::standard();
        {
            std::ostringstream os;
            os << "weeks_since,efficacy_1dose,efficacy_2dose\n";
            for (std::size_t i = 0; i < eff.weeks.size(); ++i) {
                os << format_number(eff.weeks[i]) << ',' << format_number(eff.one_dose[i]) << ','
                   << format_number(eff.two_dose[i]) << '\n';
            }
            write_text(file("efficacy.csv"), os.str());
        }

        const double first_week = date_to_time("2010-10-23");
        const double t0 = first_week - kWeek;
        CovariateTable rain;
        write_text(file("rainfall.csv"), rainfall_csv(geo, date_to_time("2010-01-02"), date_to_time("2031-01-01"), seed, rain));

        Model3Config mc;
        mc.geography = geo;
        mc.t0 = t0;
        mc.rainfall = rain;
        mc.hurricane_time = hurricane_matthew_time();
        // seed the outbreak in the Artibonite valley and its neighbours
        for (const auto& name : geo.names) {
            const double c = name == "Artibonite" ? 400.0 : (name == "Centre" || name == "Nord") ? 40.0 : 5.0;
            mc.init_cases.push_back({c, c, c, c});
        }
        const Model3 model(mc);
        const ParameterSet params = model.default_parameters();
        const TimeGrid grid = TimeGrid::weekly(t0, kWeeks);
        const auto sims = simulate(model, params, grid, 1, seed, 1);
        write_cases(file("cases.csv"), sims.front().observations);

        const double origin = grid.end();
        std::ostringstream sc;
        sc << "scenario,department,start_date,duration_weeks,doses_1,doses_2\n";
        for (const char* id : {"V1", "V2", "V3", "V4"}) {
            const ScenarioSpec s = builtin_scenario(id, geo, origin + kWeek);
            for (const auto& c : s.campaigns) {
                sc << id << ',' << c.department << ',' << time_to_date(c.start) << ',' << format_number(c.duration_weeks)
                   << ',' << format_number(std::round(c.doses_1)) << ',' << format_number(std::round(c.doses_2)) << '\n';
            }
        }
        write_text(file("scenarios.csv"), sc.str());

        // noiseless quadratic profile surface: centre -0.04, curvature scale 0.02
        {
            std::ostringstream os;
            os << "parameter,value,replicate,loglik\n";
            const double theta0 = -0.04;
            const double s = 0.02;
            for (int i = 0; i < 15; ++i) {
                const double v = -0.12 + 0.14 * i / 14.0;
                os << "zeta," << format_number(v) << ",1," << format_number(-(v - theta0) * (v - theta0) / (2 * s * s))
                   << '\n';
            }
            write_text(file("profile_surface.csv"), os.str());
        }

        nlohmann::json meta = {{"generator", "make_synthetic_data"},
                               {"seed", seed},
                               {"model", "model3"},
                               {"weeks", kWeeks},
                               {"first_week", time_to_date(first_week)},
                               {"last_week", time_to_date(origin)},
                               {"parameters", parameters_to_json(params)},
                               {"init_cases", mc.init_cases}};
        write_json(file("synthetic.json"), meta);
        std::cout << "wrote synthetic inputs to " << out.string() << " (seed " << seed << ")\n";
        return 0;
    }
    catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    }
}
