#include "pompkit/cli.hpp"

#include "pompkit/benchmarks.hpp"
#include "pompkit/forecast.hpp"
#include "pompkit/haiti_models.hpp"
#include "pompkit/io.hpp"
#include "pompkit/iterated_filter.hpp"
#include "pompkit/mcap.hpp"
#include "pompkit/optimize.hpp"
#include "pompkit/particle_filter.hpp"
#include "pompkit/toy_models.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace pompkit {

const std::vector<std::string>& cli_commands()
{
    static const std::vector<std::string> c{"simulate", "filter",  "fit-if2", "fit-ibpf", "fit-traj",
                                            "benchmark", "profile", "mcap",    "forecast"};
    return c;
}

json default_config()
{
    return json::parse(R"({
      "model": "toy:sir",
      "seed": null,
      "workers": 0,
      "execution": "openmp",
      "out": "pompkit_run",
      "t0": null,
      "euler_step": null,
      "data": {"cases": null, "rainfall": null, "geography": null, "distance": null, "river": null,
               "efficacy": null, "scenarios": null},
      "parameters": null,
      "overrides": {},
      "toy": {"units": 1, "population": 50000, "deterministic": false, "unit_beta": false, "unit_i0": false},
      "simulate": {"n_sims": 1, "weeks": 100},
      "filter": {"particles": 1000, "sample": 200, "blocks": "single"},
      "fit-if2": {"particles": 1000, "iterations": 50, "cooling_fraction": 0.5, "rw_sd": {}, "eval_particles": 0},
      "fit-ibpf": {"particles": 500, "iterations": 50, "cooling_fraction": 0.5, "rw_sd": {}, "eval_particles": 0,
                   "blocks": "units"},
      "fit-traj": {"free": [], "restarts": 10, "max_iterations": 20000},
      "benchmark": {"per_unit": true},
      "profile": {"parameter": null, "lo": null, "hi": null, "points": 11, "replicates": 3, "free": [],
                  "particles": 200, "iterations": 10, "cooling_fraction": 0.5, "rw_sd": {}},
      "mcap": {"input": null, "level": 0.95, "span": 0.75, "mc_variance": null},
      "forecast": {"scenario": "V0", "n_sims": 100, "horizon_weeks": 520, "window_weeks": 52, "particles": 500,
                   "blocks": "units", "source": "filter", "param_draws": null}
    })");
}

namespace {

std::string absolute_from(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    if (path.is_absolute()) {
        return path.lexically_normal().string();
    }
    return (base / path).lexically_normal().string();
}

json parse_value(const std::string& text)
{
    try {
        return json::parse(text);
    }
    catch (const json::parse_error&) {
        return text;
    }
}

/// Walks a dotted key, creating objects on the way.
json& at_path(json& root, const std::string& dotted)
{
    json* cur = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            throw ValidationError("malformed --set key '" + dotted + "'");
        }
        if (!cur->is_object()) {
            *cur = json::object();
        }
        cur = &(*cur)[key];
        if (dot == std::string::npos) {
            return *cur;
        }
        start = dot + 1;
    }
}

} // namespace

json resolve_config(const CliOptions& o)
{
    json cfg = default_config();
    if (o.config_path) {
        json file = read_json(*o.config_path);
        if (!file.is_object()) {
            throw ValidationError(*o.config_path + ": config must be a JSON object");
        }
        const fs::path base = fs::absolute(fs::path(*o.config_path)).parent_path();
        if (file.contains("data") && file["data"].is_object()) {
            for (auto& [k, v] : file["data"].items()) {
                if (v.is_string()) {
                    v = absolute_from(base, v.get<std::string>());
                }
            }
        }
        for (const char* key : {"parameters"}) {
            if (file.contains(key) && file[key].is_string()) {
                file[key] = absolute_from(base, file[key].get<std::string>());
            }
        }
        for (const char* block : {"mcap", "forecast"}) {
            for (const char* key : {"input", "param_draws"}) {
                if (file.contains(block) && file[block].contains(key) && file[block][key].is_string()) {
                    file[block][key] = absolute_from(base, file[block][key].get<std::string>());
                }
            }
        }
        cfg.merge_patch(file);
    }
    if (o.seed) {
        cfg["seed"] = *o.seed;
    }
    if (o.workers) {
        cfg["workers"] = *o.workers;
    }
    if (o.out) {
        cfg["out"] = *o.out;
    }
    if (o.params_path) {
        cfg["parameters"] = fs::absolute(*o.params_path).lexically_normal().string();
    }
    if (o.scenario) {
        cfg["forecast"]["scenario"] = *o.scenario;
    }
    if (o.input) {
        cfg["mcap"]["input"] = fs::absolute(*o.input).lexically_normal().string();
    }
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("--set expects name=value, got '" + s + "'");
        }
        const std::string key = s.substr(0, eq);
        const json value = parse_value(s.substr(eq + 1));
        if (key.find('.') == std::string::npos) {
            cfg["overrides"][key] = value;
        }
        else {
            at_path(cfg, key) = value;
        }
    }
    return cfg;
}

namespace {

// ---------------------------------------------------------------------------
// configuration access

struct Config {
    const json& j;

    const json& block(const std::string& name) const { return j.at(name); }

    template <class T>
    T get(const json& obj, const std::string& key, const std::string& where) const
    {
        if (!obj.contains(key) || obj.at(key).is_null()) {
            throw ValidationError("config value '" + where + "." + key + "' is required");
        }
        try {
            return obj.at(key).get<T>();
        }
        catch (const json::exception&) {
            throw ValidationError("config value '" + where + "." + key + "' has the wrong type");
        }
    }
    template <class T>
    T get(const std::string& blk, const std::string& key) const
    {
        return get<T>(block(blk), key, blk);
    }
    std::optional<std::string> path(const std::string& key) const
    {
        const auto& d = j.at("data");
        if (!d.contains(key) || d.at(key).is_null()) {
            return std::nullopt;
        }
        return d.at(key).get<std::string>();
    }
    std::string require_path(const std::string& key, const std::string& why) const
    {
        auto p = path(key);
        if (!p) {
            throw ValidationError("config data." + key + " is required " + why);
        }
        return *p;
    }
    std::uint64_t seed(const std::string& command) const
    {
        if (!j.contains("seed") || j.at("seed").is_null()) {
            throw ValidationError(command + " is stochastic: give --seed or a 'seed' in the config");
        }
        return j.at("seed").get<std::uint64_t>();
    }
    int workers() const { return j.value("workers", 0); }
    Execution execution() const
    {
        const auto e = j.value("execution", std::string("openmp"));
        if (e == "openmp") {
            return Execution::openmp;
        }
        if (e == "serial") {
            return Execution::serial;
        }
        throw ValidationError("execution must be 'openmp' or 'serial'");
    }
    std::string model() const { return j.at("model").get<std::string>(); }
};

// ---------------------------------------------------------------------------
// model assembly

struct Context {
    std::string model_id;
    std::optional<ObservationSeries> cases;  ///< calendar time in years
    std::optional<Geography> geo;
    std::optional<CovariateTable> rainfall;
    EfficacyCurve efficacy = EfficacyCurve::standard();
    std::map<std::string, ScenarioSpec> scenarios;
};

struct Workload {
    std::unique_ptr<PompModel> model;
    std::optional<ObservationSeries> data;  ///< model time, aligned with grid
    TimeGrid grid;
    double origin = 0.0;  ///< calendar year at model time 0
    double scale = 1.0;   ///< model time units per year
    double week = kWeek;  ///< one week in model time units

    double to_year(double t) const { return origin + t / scale; }
    std::string date(double t) const { return time_to_date(to_year(t)); }
};

bool is_toy(const std::string& m)
{
    return m == "toy:sir" || m == "toy:decay";
}

bool is_haiti(const std::string& m)
{
    return m == "model1" || m == "model2" || m == "model3";
}

Context load_context(const Config& c)
{
    Context ctx;
    ctx.model_id = c.model();
    if (!is_toy(ctx.model_id) && !is_haiti(ctx.model_id) && ctx.model_id != "benchmark") {
        throw ValidationError("unknown model '" + ctx.model_id + "' (model1, model2, model3, benchmark, toy:sir, toy:decay)");
    }
    if (c.path("geography")) {
        ctx.geo = load_geography(*c.path("geography"), c.require_path("distance", "with a geography file"),
                                 c.require_path("river", "with a geography file"));
    }
    else if (ctx.model_id == "model2" || ctx.model_id == "model3") {
        ctx.geo = synthetic_haiti_geography();
    }
    if (auto p = c.path("cases")) {
        if (ctx.geo && (ctx.model_id == "model2" || ctx.model_id == "model3")) {
            ctx.cases = load_cases(*p, &ctx.geo->names);
        }
        else {
            ctx.cases = load_cases(*p);
        }
    }
    if (auto p = c.path("rainfall")) {
        if (!ctx.geo) {
            throw ValidationError("rainfall needs the department list of a geography");
        }
        ctx.rainfall = load_rainfall(*p, ctx.geo->names);
    }
    if (auto p = c.path("efficacy")) {
        ctx.efficacy = load_efficacy(*p);
    }
    if (auto p = c.path("scenarios")) {
        if (!ctx.geo) {
            throw ValidationError("scenarios need a geography");
        }
        ctx.scenarios = load_scenarios(*p, *ctx.geo);
    }
    return ctx;
}

ObservationSeries national_sum(const ObservationSeries& s)
{
    ObservationSeries out({"Haiti"}, s.times());
    for (std::size_t n = 0; n < s.length(); ++n) {
        double sum = 0.0;
        bool any = false;
        for (std::size_t u = 0; u < s.units(); ++u) {
            if (!is_missing(s(u, n))) {
                sum += s(u, n);
                any = true;
            }
        }
        out(0, n) = any ? sum : kMissing;
    }
    return out;
}

/// Observations from column `skip` on, re-timed to model time.
ObservationSeries retime(const ObservationSeries& s, std::size_t skip, const std::vector<double>& times)
{
    ObservationSeries out(s.unit_names(), times);
    for (std::size_t u = 0; u < s.units(); ++u) {
        for (std::size_t n = 0; n < times.size(); ++n) {
            out(u, n) = s(u, n + skip);
        }
    }
    return out;
}

double value_or(const json& j, const char* key, double fallback)
{
    return j.contains(key) && !j.at(key).is_null() ? j.at(key).get<double>() : fallback;
}

Workload build_workload(const Config& c, const Context& ctx, const std::vector<Campaign>& campaigns,
                        std::size_t sim_weeks)
{
    Workload w;
    const std::string& m = ctx.model_id;
    const json& cfg = c.j;
    const bool has_t0 = cfg.contains("t0") && cfg.at("t0").is_string();
    const auto t0_or = [&](double fallback) {
        return has_t0 ? date_to_time(cfg.at("t0").get<std::string>()) : fallback;
    };

    if (is_toy(m)) {
        if (!campaigns.empty()) {
            throw ValidationError("toy models have no vaccination; use scenario V0");
        }
        const json& toy = cfg.at("toy");
        w.scale = kWeeksPerYear;
        w.week = 1.0;
        std::size_t units = toy.value("units", std::size_t{1});
        std::vector<double> times;
        if (ctx.cases) {
            units = ctx.cases->units();
            w.origin = ctx.cases->times().front() - kWeek;
            for (std::size_t n = 0; n < ctx.cases->length(); ++n) {
                times.push_back(static_cast<double>(n + 1));
            }
            w.data = retime(*ctx.cases, 0, times);
        }
        else {
            w.origin = t0_or(date_to_time("2020-01-04"));
            for (std::size_t n = 0; n < sim_weeks; ++n) {
                times.push_back(static_cast<double>(n + 1));
            }
        }
        const bool det = toy.value("deterministic", false);
        if (m == "toy:sir") {
            SirConfig sc;
            sc.units = units;
            sc.population = toy.value("population", 50000.0);
            sc.deterministic = det;
            sc.unit_beta = toy.value("unit_beta", false);
            sc.unit_i0 = toy.value("unit_i0", false);
            w.model = std::make_unique<SirModel>(sc);
        }
        else {
            w.model = std::make_unique<DecayModel>(units, det);
        }
        w.grid = TimeGrid{0.0, times, value_or(cfg, "euler_step", 1.0 / 7.0)};
        return w;
    }

    const double euler = value_or(cfg, "euler_step", kDefaultEulerStep);
    std::size_t skip = 0;
    std::vector<double> times;
    double t0 = 0.0;
    std::optional<ObservationSeries> source;

    if (m == "model1") {
        if (ctx.cases) {
            source = ctx.cases->units() == 1 ? *ctx.cases : national_sum(*ctx.cases);
            t0 = source->times().front() - kWeek;
        }
        else {
            t0 = t0_or(model1_default_t0());
        }
    }
    else {
        if (!ctx.cases) {
            throw ValidationError(m + " initializes from the first weeks of data: config data.cases is required");
        }
        source = *ctx.cases;
        skip = m == "model2" ? 1 : 4;
        if (source->length() <= skip) {
            throw DataError("cases file is too short for " + m + " initialization");
        }
        t0 = source->times()[skip - 1];
    }
    if (source) {
        times.assign(source->times().begin() + static_cast<std::ptrdiff_t>(skip), source->times().end());
        w.data = retime(*source, skip, times);
    }
    else {
        for (std::size_t n = 0; n < sim_weeks; ++n) {
            times.push_back(t0 + static_cast<double>(n + 1) * kWeek);
        }
    }
    w.grid = TimeGrid{t0, times, euler};

    if (m == "model1") {
        Model1Config mc;
        mc.t0 = t0;
        mc.tN = times.back();
        mc.phase_switch = model1_phase_switch();
        mc.efficacy = ctx.efficacy;
        ScenarioSpec sc;
        sc.campaigns = campaigns;
        mc.cohorts = model1_cohorts(sc);
        w.model = std::make_unique<Model1>(mc);
    }
    else if (m == "model2") {
        Model2Config mc;
        mc.geography = *ctx.geo;
        mc.t0 = t0;
        for (std::size_t u = 0; u < source->units(); ++u) {
            const double y = (*source)(u, 0);
            mc.first_cases.push_back(is_missing(y) ? 0.0 : y);
        }
        mc.campaigns = campaigns;
        w.model = std::make_unique<Model2>(mc);
    }
    else {
        if (!ctx.rainfall) {
            throw ValidationError("model3 needs rainfall: config data.rainfall is required");
        }
        Model3Config mc;
        mc.geography = *ctx.geo;
        mc.t0 = t0;
        mc.rainfall = *ctx.rainfall;
        mc.efficacy = ctx.efficacy;
        mc.campaigns = campaigns;
        mc.hurricane_time = hurricane_matthew_time();
        for (std::size_t u = 0; u < source->units(); ++u) {
            std::array<double, 4> init{};
            for (std::size_t k = 0; k < 4; ++k) {
                const double y = (*source)(u, k);
                init[k] = is_missing(y) ? 0.0 : y;
            }
            mc.init_cases.push_back(init);
        }
        w.model = std::make_unique<Model3>(mc);
    }
    return w;
}

ParameterSet resolve_parameters(const Config& c, const PompModel& model)
{
    ParameterSet p = model.default_parameters();
    const json& src = c.j.at("parameters");
    if (src.is_string()) {
        p = load_parameters(src.get<std::string>(), p);
    }
    else if (!src.is_null()) {
        apply_parameters(p, src, "config parameters");
    }
    if (c.j.contains("overrides") && !c.j.at("overrides").empty()) {
        apply_parameters(p, c.j.at("overrides"), "--set");
    }
    model.validate(p);
    return p;
}

Blocks blocks_from(const json& spec, std::size_t units, const std::string& where)
{
    if (spec.is_string()) {
        const auto s = spec.get<std::string>();
        if (s == "single") {
            return single_block(units);
        }
        if (s == "units") {
            return unit_blocks(units);
        }
        throw ValidationError(where + ".blocks must be 'single', 'units' or a list of unit-index lists");
    }
    Blocks b = spec.get<Blocks>();
    validate_blocks(b, units);
    return b;
}

std::map<std::string, double> rw_map(const json& j)
{
    std::map<std::string, double> out;
    for (const auto& [k, v] : j.items()) {
        out[k] = v.get<double>();
    }
    return out;
}

// ---------------------------------------------------------------------------
// output

class RunDir {
public:
    RunDir(const std::string& command, const json& config) : command_(command), config_(config)
    {
        dir_ = config.at("out").get<std::string>();
        fs::create_directories(dir_);
        start_ = std::chrono::steady_clock::now();
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        started_ = buf;
        write_json(path("config.json"), config);
    }

    std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

    void text(const std::string& name, const std::string& body)
    {
        write_text(path(name), body);
        outputs_.push_back(name);
    }

    void record(const std::string& name) { outputs_.push_back(name); }

    void warn(const std::string& w) { warnings_.push_back(w); }

    void finish(const json& summary, const std::optional<std::pair<ErrorCategory, std::string>>& error)
    {
        json s = summary;
        s["command"] = command_;
        s["model"] = config_.at("model");
        if (!error) {
            write_json(path("summary.json"), s);
            outputs_.push_back("summary.json");
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        json m;
        m["command"] = command_;
        m["version"] = kVersion;
        m["seed"] = config_.at("seed");
        m["workers"] = config_.at("workers");
        m["started"] = started_;
        m["wall_time_seconds"] = wall;
        m["config"] = config_;
        m["rerun"] = "pompkit " + command_ + " --config " + path("config.json");
        m["outputs"] = outputs_;
        m["warnings"] = warnings_;
        m["status"] = error ? "failed" : "complete";
        m["partial"] = error.has_value() && !outputs_.empty();
        if (error) {
            m["error"] = {{"category", std::string(category_name(error->first))},
                          {"code", static_cast<int>(error->first)},
                          {"message", error->second}};
        }
        write_json(path("manifest.json"), m);
    }

private:
    std::string command_;
    const json& config_;
    std::string dir_;
    std::string started_;
    std::chrono::steady_clock::time_point start_;
    std::vector<std::string> outputs_;
    std::vector<std::string> warnings_;
};

json estimates_json(const ParameterSet& p)
{
    json o = json::object();
    for (std::size_t i = 0; i < p.size(); ++i) {
        o[p.schema()[i].name] = p[i];
    }
    return o;
}

json number_or_null(double v)
{
    return std::isfinite(v) ? json(v) : json(nullptr);
}

void note_clamps(RunDir& run, const PompModel& model)
{
    if (model.clamp_events() > 0) {
        run.warn(std::to_string(model.clamp_events()) + " negative state values were clamped to zero");
    }
}

std::string comparability_note(const std::string& model)
{
    if (model == "model2" || model == "model3") {
        return "model2 and model3 condition on different initial weeks of data, so their AIC values should "
               "not be compared directly";
    }
    return {};
}

const ObservationSeries& need_data(const Workload& w, const std::string& command)
{
    if (!w.data) {
        throw ValidationError(command + " needs observations: config data.cases is required");
    }
    return *w.data;
}

// ---------------------------------------------------------------------------
// commands

json cmd_simulate(const Config& c, const Context& ctx, RunDir& run)
{
    const auto& b = c.block("simulate");
    const auto n_sims = c.get<std::size_t>("simulate", "n_sims");
    const auto weeks = c.get<std::size_t>("simulate", "weeks");
    Context sim_ctx = ctx;
    if (is_toy(ctx.model_id) || ctx.model_id == "model1") {
        // data only fixes the time grid when given
        if (!b.value("use_data_grid", true)) {
            sim_ctx.cases.reset();
        }
    }
    Workload w = build_workload(c, sim_ctx, {}, weeks);
    const ParameterSet p = resolve_parameters(c, *w.model);
    const auto sims = simulate(*w.model, p, w.grid, n_sims, c.seed("simulate"), c.workers());
    note_clamps(run, *w.model);

    std::ostringstream os;
    os << "sim,date,department,cases,infections\n";
    const std::size_t N = w.grid.size();
    for (std::size_t s = 0; s < sims.size(); ++s) {
        for (std::size_t n = 0; n < N; ++n) {
            const std::string date = w.date(w.grid.obs_times[n]);
            for (std::size_t u = 0; u < w.model->units(); ++u) {
                os << s + 1 << ',' << date << ',' << w.model->unit_names()[u] << ','
                   << format_number(sims[s].observations(u, n)) << ','
                   << format_number(sims[s].infections[u * N + n]) << '\n';
            }
        }
    }
    run.text("simulation.csv", os.str());

    ObservationSeries first(w.model->unit_names(), {});
    {
        std::vector<double> years;
        for (double t : w.grid.obs_times) {
            years.push_back(w.to_year(t));
        }
        first = ObservationSeries(w.model->unit_names(), years);
        for (std::size_t u = 0; u < first.units(); ++u) {
            for (std::size_t n = 0; n < N; ++n) {
                first(u, n) = sims[0].observations(u, n);
            }
        }
    }
    write_cases(run.path("cases.csv"), first);
    run.record("cases.csv");
    return {{"n_sims", n_sims}, {"weeks", N}, {"parameters", estimates_json(p)}};
}

PfResult run_pf(const Config& c, const Workload& w, const ParameterSet& p, std::size_t J, std::size_t K,
                const Blocks& blocks, std::uint64_t seed)
{
    FilterOptions fo;
    fo.particles = J;
    fo.seed = seed;
    fo.sample_size = K;
    fo.blocks = blocks;
    fo.execution = c.execution();
    fo.workers = c.workers();
    return particle_filter(*w.model, p, need_data(w, "filter"), w.grid, fo);
}

void write_filter_sample(RunDir& run, const PompModel& model, const PfResult& r)
{
    std::ostringstream os;
    const auto& names = model.layout().names;
    for (std::size_t i = 0; i < names.size(); ++i) {
        os << (i ? "," : "") << '"' << names[i] << '"';
    }
    os << '\n';
    for (std::size_t k = 0; k < r.sample_count(); ++k) {
        const auto row = r.sample(k);
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << (i ? "," : "") << format_number(row[i]);
        }
        os << '\n';
    }
    run.text("filter_sample.csv", os.str());
}

json cmd_filter(const Config& c, const Context& ctx, RunDir& run)
{
    Workload w = build_workload(c, ctx, {}, 0);
    const ParameterSet p = resolve_parameters(c, *w.model);
    const auto J = c.get<std::size_t>("filter", "particles");
    const auto K = c.get<std::size_t>("filter", "sample");
    const Blocks blocks = blocks_from(c.block("filter").at("blocks"), w.model->units(), "filter");
    const PfResult r = run_pf(c, w, p, J, K, blocks, c.seed("filter"));
    note_clamps(run, *w.model);

    std::ostringstream os;
    os << "date,cond_loglik,ess\n";
    for (std::size_t n = 0; n < r.cond_logliks.size(); ++n) {
        os << w.date(w.grid.obs_times[n]) << ',' << format_number(r.cond_logliks[n]) << ','
           << format_number(r.ess[n]) << '\n';
    }
    run.text("filter.csv", os.str());
    if (r.sample_count() > 0) {
        write_filter_sample(run, *w.model, r);
    }
    json s = {{"loglik", number_or_null(r.loglik)}, {"particles", J}, {"blocks", r.blocks}};
    if (r.failure_index) {
        s["failure_index"] = *r.failure_index;
        s["failure_date"] = w.date(w.grid.obs_times[*r.failure_index]);
        run.warn("filtering failed at " + w.date(w.grid.obs_times[*r.failure_index]));
    }
    return s;
}

json cmd_fit_iterated(const Config& c, const Context& ctx, RunDir& run, bool blocked)
{
    const std::string name = blocked ? "fit-ibpf" : "fit-if2";
    const auto& b = c.block(name);
    Workload w = build_workload(c, ctx, {}, 0);
    const ParameterSet start = resolve_parameters(c, *w.model);
    const auto& data = need_data(w, name);

    IbpfSettings s;
    s.particles = c.get<std::size_t>(name, "particles");
    s.iterations = c.get<std::size_t>(name, "iterations");
    s.cooling_fraction = c.get<double>(name, "cooling_fraction");
    s.rw_sd = rw_map(b.at("rw_sd"));
    s.eval_particles = b.value("eval_particles", std::size_t{0});
    s.execution = c.execution();
    s.workers = c.workers();
    const std::uint64_t seed = c.seed(name);
    If2Result r;
    if (blocked) {
        s.blocks = blocks_from(b.at("blocks"), w.model->units(), name);
        r = ibpf(*w.model, data, w.grid, start, s, seed);
    }
    else {
        r = if2(*w.model, data, w.grid, start, s, seed);
    }
    note_clamps(run, *w.model);

    std::ostringstream os;
    os << "iteration,loglik\n";
    for (std::size_t m = 0; m < r.trace.size(); ++m) {
        os << m << ',' << format_number(r.trace[m]) << '\n';
    }
    run.text("trace.csv", os.str());
    save_parameters(run.path("params.json"), r.estimate);
    run.record("params.json");

    std::ostringstream sw;
    const auto& schema = r.estimate.schema();
    for (std::size_t i = 0; i < schema.size(); ++i) {
        sw << (i ? "," : "") << schema[i].name;
    }
    sw << '\n';
    for (std::size_t j = 0; j < r.swarm_size(); ++j) {
        for (std::size_t i = 0; i < schema.size(); ++i) {
            sw << (i ? "," : "") << format_number(r.swarm[j * schema.size() + i]);
        }
        sw << '\n';
    }
    run.text("swarm.csv", sw.str());

    std::size_t k = 0;
    for (const auto& [nm, sd] : s.rw_sd) {
        k += sd > 0.0;
    }
    json out = {{"start_loglik", number_or_null(r.trace.front())},
                {"loglik", number_or_null(r.trace.back())},
                {"iterations", r.completed},
                {"aborted", r.aborted},
                {"estimated_parameters", k},
                {"aic", number_or_null(aic(r.trace.back(), k))},
                {"parameters", estimates_json(r.estimate)}};
    if (r.aborted) {
        run.warn("filtering failed at every particle; returning the last finite iterate");
    }
    if (auto note = comparability_note(ctx.model_id); !note.empty()) {
        out["note"] = note;
    }
    return out;
}

json cmd_fit_traj(const Config& c, const Context& ctx, RunDir& run)
{
    Workload w = build_workload(c, ctx, {}, 0);
    const ParameterSet start = resolve_parameters(c, *w.model);
    const auto free = c.block("fit-traj").at("free").get<std::vector<std::string>>();
    NelderMeadOptions nm;
    nm.max_restarts = c.block("fit-traj").value("restarts", std::size_t{10});
    nm.max_iterations = c.block("fit-traj").value("max_iterations", std::size_t{20000});
    const auto r = trajectory_match(*w.model, need_data(w, "fit-traj"), w.grid, start, free, nm);
    note_clamps(run, *w.model);
    save_parameters(run.path("params.json"), r.estimate);
    run.record("params.json");
    json out = {{"start_loglik", number_or_null(r.start_loglik)},
                {"loglik", number_or_null(r.loglik)},
                {"evaluations", r.evaluations},
                {"estimated_parameters", free.size()},
                {"aic", number_or_null(aic(r.loglik, free.size()))},
                {"parameters", estimates_json(r.estimate)}};
    if (auto note = comparability_note(ctx.model_id); !note.empty()) {
        out["note"] = note;
    }
    return out;
}

json cmd_benchmark(const Config& c, const Context& ctx, RunDir& run)
{
    if (!ctx.cases) {
        throw ValidationError("benchmark needs observations: config data.cases is required");
    }
    const bool per_unit = c.block("benchmark").value("per_unit", true);
    const auto fit = fit_benchmark(*ctx.cases, per_unit);
    std::ostringstream os;
    os << "unit,alpha,b,phi,loglik\n";
    for (std::size_t i = 0; i < fit.params.size(); ++i) {
        const auto& p = fit.params[i];
        os << fit.units[i] << ',' << format_number(p.alpha) << ',' << format_number(p.b) << ','
           << format_number(p.phi) << ',' << format_number(p.loglik) << '\n';
    }
    run.text("benchmark.csv", os.str());
    for (const auto& wmsg : fit.warnings) {
        run.warn(wmsg);
    }
    return {{"loglik", fit.loglik}, {"k", fit.k}, {"aic", fit.aic}, {"per_unit", per_unit}};
}

json cmd_profile(const Config& c, const Context& ctx, RunDir& run)
{
    const auto& b = c.block("profile");
    Workload w = build_workload(c, ctx, {}, 0);
    const ParameterSet base = resolve_parameters(c, *w.model);
    const auto& data = need_data(w, "profile");
    const auto param = c.get<std::string>("profile", "parameter");
    const auto grid = profile_grid(c.get<double>("profile", "lo"), c.get<double>("profile", "hi"),
                                   c.get<std::size_t>("profile", "points"));
    const auto free = b.at("free").get<std::vector<std::string>>();
    const bool deterministic = w.model->deterministic();
    const std::uint64_t seed = deterministic ? c.j.value("seed", std::uint64_t{1}) : c.seed("profile");
    const auto jobs = profile_design(base.schema(), param, grid, free, c.get<std::size_t>("profile", "replicates"), seed);

    std::ostringstream os;
    os << "parameter,value,replicate,loglik\n";
    for (const auto& job : jobs) {
        ParameterSet start = base;
        start.set(param, job.value);
        double ll;
        if (deterministic) {
            ll = trajectory_match(*w.model, data, w.grid, start, job.free).loglik;
        }
        else {
            If2Settings s;
            s.particles = c.get<std::size_t>("profile", "particles");
            s.iterations = c.get<std::size_t>("profile", "iterations");
            s.cooling_fraction = c.get<double>("profile", "cooling_fraction");
            for (const auto& [nm, sd] : rw_map(b.at("rw_sd"))) {
                if (nm != param && std::find(job.free.begin(), job.free.end(), nm) != job.free.end()) {
                    s.rw_sd[nm] = sd;
                }
            }
            s.execution = c.execution();
            s.workers = c.workers();
            const auto r = if2(*w.model, data, w.grid, start, s, job.seed);
            ll = r.trace.back();
        }
        os << param << ',' << format_number(job.value) << ',' << job.replicate + 1 << ',' << format_number(ll)
           << '\n';
    }
    note_clamps(run, *w.model);
    run.text("profile.csv", os.str());
    return {{"parameter", param}, {"jobs", jobs.size()}, {"points", grid.size()}};
}

json cmd_mcap(const Config& c, RunDir& run)
{
    const auto& b = c.block("mcap");
    const auto input = c.get<std::string>("mcap", "input");
    const CsvTable t = read_csv(input);
    const std::size_t cv = t.column("value");
    const std::size_t cl = t.column("loglik");
    std::vector<ProfilePoint> pts;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& ltxt = t.rows[r][cl];
        const double ll = (ltxt == "NA" || ltxt == "-inf") ? -std::numeric_limits<double>::infinity()
                                                           : parse_number(ltxt, t.where(r));
        pts.push_back({parse_number(t.rows[r][cv], t.where(r)), ll});
    }
    McapOptions o;
    o.level = c.get<double>("mcap", "level");
    o.span = c.get<double>("mcap", "span");
    if (b.contains("mc_variance") && !b.at("mc_variance").is_null()) {
        o.mc_variance = b.at("mc_variance").get<double>();
    }
    const auto curve = mcap_ci(pts, o);
    std::ostringstream os;
    os << "value,smoothed_loglik\n";
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        os << format_number(curve.grid[g]) << ',' << format_number(curve.smoothed[g]) << '\n';
    }
    run.text("mcap_curve.csv", os.str());
    if (curve.lower_open || curve.upper_open) {
        run.warn("confidence interval reaches the edge of the profiled range");
    }
    return {{"mle", curve.mle},       {"lower", curve.lower},   {"upper", curve.upper},
            {"lower_open", curve.lower_open}, {"upper_open", curve.upper_open}, {"cutoff", curve.cutoff},
            {"se_mc", curve.se_mc},   {"level", o.level},       {"span", o.span}};
}

ScenarioSpec scenario_for(const Context& ctx, const std::string& id, double start_year)
{
    if (id == "V0") {
        return ScenarioSpec{};
    }
    if (auto it = ctx.scenarios.find(id); it != ctx.scenarios.end()) {
        return it->second;
    }
    if (!ctx.geo) {
        throw ValidationError("scenario " + id + " needs a geography");
    }
    return builtin_scenario(id, *ctx.geo, start_year);
}

json cmd_forecast(const Config& c, const Context& ctx, RunDir& run)
{
    const auto& b = c.block("forecast");
    const auto id = c.get<std::string>("forecast", "scenario");
    const auto source = c.get<std::string>("forecast", "source");
    const std::uint64_t seed = c.seed("forecast");

    Workload hist = build_workload(c, ctx, {}, c.get<std::size_t>("simulate", "weeks"));
    const ParameterSet p = resolve_parameters(c, *hist.model);
    const double origin_time = source == "filter" ? hist.grid.end() : hist.grid.t0;
    ScenarioSpec scenario = scenario_for(ctx, id, hist.to_year(origin_time));
    scenario.horizon_weeks = static_cast<double>(c.get<std::size_t>("forecast", "horizon_weeks"));
    if (ctx.geo) {
        scenario.validate(*ctx.geo);
    }
    else if (!scenario.campaigns.empty()) {
        throw ValidationError("scenario " + id + " needs a geography");
    }
    Workload fw = build_workload(c, ctx, scenario.campaigns, c.get<std::size_t>("simulate", "weeks"));

    std::vector<ParameterSet> draws{p};
    if (b.contains("param_draws") && b.at("param_draws").is_string()) {
        const CsvTable t = read_csv(b.at("param_draws").get<std::string>());
        const std::size_t cl = t.column("loglik");
        std::vector<ParameterSet> cand;
        std::vector<double> ll;
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            ParameterSet q = p;
            for (std::size_t i = 0; i < t.header.size(); ++i) {
                if (i != cl && q.schema().contains(t.header[i])) {
                    q.set(t.header[i], parse_number(t.rows[r][i], t.where(r)));
                }
            }
            cand.push_back(q);
            ll.push_back(parse_number(t.rows[r][cl], t.where(r)));
        }
        draws = sample_params_by_likelihood(cand, ll, c.get<std::size_t>("forecast", "n_sims"),
                                            Rng::derive(seed, Stream::user, {0}));
    }

    ForecastOptions fo;
    fo.n_sims = c.get<std::size_t>("forecast", "n_sims");
    fo.seed = seed;
    fo.horizon_weeks = c.get<std::size_t>("forecast", "horizon_weeks");
    fo.window_weeks = c.get<std::size_t>("forecast", "window_weeks");
    fo.week = fw.week;
    fo.euler_step = fw.grid.euler_step;
    fo.workers = c.workers();

    ForecastResult r;
    json extra = json::object();
    if (source == "filter") {
        const PfResult pf = run_pf(c, hist, p, c.get<std::size_t>("forecast", "particles"),
                                   c.get<std::size_t>("forecast", "particles"),
                                   blocks_from(b.at("blocks"), hist.model->units(), "forecast"),
                                   Rng::derive(seed, Stream::user, {1}));
        if (pf.failure_index) {
            throw NumericalError("filtering failed at " + hist.date(hist.grid.obs_times[*pf.failure_index]) +
                                 "; no filtering distribution to forecast from (try more forecast.particles)");
        }
        extra["filter_loglik"] = pf.loglik;
        r = forecast_from_filter(*fw.model, draws, hist.model->layout(), pf.filter_sample, hist.grid.end(), fo, id);
    }
    else if (source == "initial") {
        r = forecast_from_initial(*fw.model, draws, fw.grid.t0, fo, id);
    }
    else {
        throw ValidationError("forecast.source must be 'filter' or 'initial'");
    }
    note_clamps(run, *fw.model);
    if (r.weeks < fo.window_weeks) {
        throw ValidationError("forecast horizon is shorter than the elimination window");
    }

    std::ostringstream os;
    os << "sim,week,date,infections,cases\n";
    for (std::size_t s = 0; s < r.sims; ++s) {
        for (std::size_t wk = 0; wk < r.weeks; ++wk) {
            double inf = 0.0;
            double cases = 0.0;
            for (std::size_t u = 0; u < r.units; ++u) {
                inf += r.infection(s, u, wk);
                cases += r.cases[(s * r.units + u) * r.weeks + wk];
            }
            os << s + 1 << ',' << wk + 1 << ',' << fw.date(r.times[wk]) << ',' << format_number(inf) << ','
               << format_number(cases) << '\n';
        }
    }
    run.text("forecast.csv", os.str());
    std::ostringstream el;
    el << "sim,eliminated\n";
    for (std::size_t s = 0; s < r.sims; ++s) {
        el << s + 1 << ',' << int(r.eliminated[s]) << '\n';
    }
    run.text("elimination.csv", el.str());

    if (ctx.model_id == "model2") {
        TimeGrid g = fw.grid;
        for (std::size_t wk = 0; wk < fo.horizon_weeks; ++wk) {
            g.obs_times.push_back(hist.grid.end() + static_cast<double>(wk + 1) * kWeek);
        }
        const auto pr = trajectory_projection(static_cast<const Model2&>(*fw.model), p, g);
        std::ostringstream po;
        po << "date,department,infections,mean,lower,upper\n";
        for (std::size_t u = 0; u < pr.units; ++u) {
            for (std::size_t wk = 0; wk < pr.weeks; ++wk) {
                const std::size_t at = u * pr.weeks + wk;
                po << fw.date(pr.times[wk]) << ',' << fw.model->unit_names()[u] << ','
                   << format_number(pr.infections[at]) << ',' << format_number(pr.mean[at]) << ','
                   << format_number(pr.lower[at]) << ',' << format_number(pr.upper[at]) << '\n';
            }
        }
        run.text("projection.csv", po.str());
    }

    json out = {{"scenario", id},
                {"source", r.source},
                {"n_sims", r.sims},
                {"horizon_weeks", r.weeks},
                {"window_weeks", fo.window_weeks},
                {"elimination_probability", r.probability},
                {"total_doses", scenario.total_doses()}};
    out.update(extra);
    return out;
}

} // namespace

int run_command(const std::string& command, const json& config, std::ostream& out, std::ostream& err)
{
    const auto& cmds = cli_commands();
    if (std::find(cmds.begin(), cmds.end(), command) == cmds.end()) {
        err << "error: unknown command '" << command << "'\n";
        return static_cast<int>(ErrorCategory::validation);
    }
    std::unique_ptr<RunDir> run;
    std::optional<std::pair<ErrorCategory, std::string>> error;
    json summary;
    try {
        run = std::make_unique<RunDir>(command, config);
        const Config c{config};
        if (command == "mcap") {
            summary = cmd_mcap(c, *run);
        }
        else {
            const Context ctx = load_context(c);
            if (ctx.model_id == "benchmark" && command != "benchmark") {
                throw ValidationError("model 'benchmark' only supports the benchmark command");
            }
            if (command == "simulate") {
                summary = cmd_simulate(c, ctx, *run);
            }
            else if (command == "filter") {
                summary = cmd_filter(c, ctx, *run);
            }
            else if (command == "fit-if2") {
                summary = cmd_fit_iterated(c, ctx, *run, false);
            }
            else if (command == "fit-ibpf") {
                summary = cmd_fit_iterated(c, ctx, *run, true);
            }
            else if (command == "fit-traj") {
                summary = cmd_fit_traj(c, ctx, *run);
            }
            else if (command == "benchmark") {
                summary = cmd_benchmark(c, ctx, *run);
            }
            else if (command == "profile") {
                summary = cmd_profile(c, ctx, *run);
            }
            else {
                summary = cmd_forecast(c, ctx, *run);
            }
        }
    }
    catch (const Error& e) {
        error = std::make_pair(e.category(), std::string(e.what()));
    }
    catch (const json::exception& e) {
        error = std::make_pair(ErrorCategory::validation, std::string("config: ") + e.what());
    }
    catch (const fs::filesystem_error& e) {
        error = std::make_pair(ErrorCategory::io, std::string(e.what()));
    }
    catch (const std::exception& e) {
        error = std::make_pair(ErrorCategory::internal, std::string(e.what()));
    }
    if (run) {
        try {
            run->finish(summary, error);
        }
        catch (const std::exception& e) {
            err << "error: could not write the manifest: " << e.what() << '\n';
            return static_cast<int>(ErrorCategory::io);
        }
    }
    if (error) {
        err << "error [" << category_name(error->first) << "]: " << error->second << '\n';
        return static_cast<int>(error->first);
    }
    out << summary.dump(2) << '\n';
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Simulation and likelihood-based inference for partially observed Markov process models"};
    app.set_version_flag("--version", std::string("pompkit ") + kVersion);
    app.require_subcommand(1);
    CliOptions o;
    std::string config_path, out_dir, params_path, scenario, input;
    std::uint64_t seed = 0;
    int workers = 0;
    for (const auto& name : cli_commands()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--workers", workers, "Worker threads (0: all cores)");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--set", o.sets, "Override: parameter=value or block.key=value")->take_all();
        sub->add_option("--params", params_path, "Parameter file (JSON)");
        if (name == "forecast") {
            sub->add_option("--scenario", scenario, "Vaccination scenario: V0..V4 or a scenarios-file id");
        }
        if (name == "mcap") {
            sub->add_option("--input", input, "Profile table with value and loglik columns");
        }
    }
    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : static_cast<int>(ErrorCategory::validation);
    }
    auto* sub = app.get_subcommands().front();
    o.command = sub->get_name();
    auto given = [&](const char* flag) { return sub->count(flag) > 0; };
    if (given("--config")) {
        o.config_path = config_path;
    }
    if (given("--seed")) {
        o.seed = seed;
    }
    if (given("--workers")) {
        o.workers = workers;
    }
    if (given("--out")) {
        o.out = out_dir;
    }
    if (given("--params")) {
        o.params_path = params_path;
    }
    if (o.command == "forecast" && given("--scenario")) {
        o.scenario = scenario;
    }
    if (o.command == "mcap" && given("--input")) {
        o.input = input;
    }
    json cfg;
    try {
        cfg = resolve_config(o);
    }
    catch (const Error& e) {
        err << "error [" << category_name(e.category()) << "]: " << e.what() << '\n';
        return static_cast<int>(e.category());
    }
    return run_command(o.command, cfg, out, err);
}

} // namespace pompkit
