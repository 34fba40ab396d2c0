#include "pompkit/model.hpp"

#include "pompkit/parallel.hpp"

namespace pompkit {

std::size_t StateLayout::add(std::string name, int unit_index, bool is_accumulator, bool is_person)
{
    if (find(name)) {
        throw ValidationError("duplicate state component '" + name + "'");
    }
    names.push_back(std::move(name));
    unit.push_back(unit_index);
    accumulator.push_back(is_accumulator);
    person.push_back(is_person);
    return names.size() - 1;
}

std::optional<std::size_t> StateLayout::find(std::string_view name) const
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

std::size_t StateLayout::index_of(std::string_view name) const
{
    auto i = find(name);
    if (!i) {
        throw ValidationError("unknown state component '" + std::string(name) + "'");
    }
    return *i;
}

double StateLayout::unit_population(std::span<const double> x, int unit_index) const
{
    double total = 0.0;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (person[i] && unit[i] == unit_index) {
            total += x[i];
        }
    }
    return total;
}

ParameterSet PompModel::default_parameters() const
{
    auto s = schema();
    std::vector<double> v;
    v.reserve(s->size());
    for (const auto& e : s->entries()) {
        v.push_back(e.default_value);
    }
    return ParameterSet(s, std::move(v));
}

void PompModel::validate(const ParameterSet& p) const
{
    if (p.schema_ptr() != schema()) {
        const auto& mine = *schema();
        if (p.size() != mine.size()) {
            throw ValidationError("parameter set does not match model '" + name() + "'");
        }
        for (std::size_t i = 0; i < mine.size(); ++i) {
            if (p.schema()[i].name != mine[i].name) {
                throw ValidationError("parameter set does not match model '" + name() + "': expected '" + mine[i].name +
                                      "' at position " + std::to_string(i));
            }
        }
    }
    p.validate();
}

void reset_accumulators(const StateLayout& layout, std::span<double> x)
{
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (layout.accumulator[i]) {
            x[i] = 0.0;
        }
    }
}

void advance(const PompModel& model, std::span<double> x, double from, double to, double dt, const ParamView& theta,
             Rng& rng)
{
    const std::size_t k = substeps(from, to, dt);
    const double h = (to - from) / static_cast<double>(k);
    for (std::size_t s = 0; s < k; ++s) {
        model.step(x, from + static_cast<double>(s) * h, h, theta, rng);
    }
}

std::vector<Simulation> simulate(const PompModel& model, const ParameterSet& params, const TimeGrid& grid,
                                 std::size_t n_sims, std::uint64_t seed, int workers)
{
    if (n_sims == 0) {
        throw ValidationError("simulate: n_sims must be positive");
    }
    grid.validate();
    model.validate(params);
    model.check_covariates(grid.t0, grid.end());

    const auto& layout = model.layout();
    const std::size_t d = layout.size();
    const std::size_t n_obs = grid.size();
    const std::size_t u_count = model.units();
    const ParamView theta(params.values());

    std::vector<Simulation> out(n_sims);
    parallel_for(n_sims, Execution::openmp, workers, [&](std::size_t s) {
        Simulation& sim = out[s];
        sim.states.assign((n_obs + 1) * d, 0.0);
        sim.observations = ObservationSeries(model.unit_names(), grid.obs_times);
        sim.infections.assign(u_count * n_obs, 0.0);

        std::vector<double> x(d, 0.0);
        Rng init(seed, Stream::init, {s});
        model.initialize(x, theta, init);
        std::copy(x.begin(), x.end(), sim.states.begin());

        double t = grid.t0;
        for (std::size_t n = 0; n < n_obs; ++n) {
            reset_accumulators(layout, x);
            Rng proc(seed, Stream::process, {s, n});
            advance(model, x, t, grid.obs_times[n], grid.euler_step, theta, proc);
            t = grid.obs_times[n];
            std::copy(x.begin(), x.end(), sim.states.begin() + static_cast<std::ptrdiff_t>((n + 1) * d));
            Rng meas(seed, Stream::measure, {s, n});
            for (std::size_t u = 0; u < u_count; ++u) {
                sim.observations(u, n) = model.rmeasure(x, u, theta.unit(u), t, meas);
                sim.infections[u * n_obs + n] = model.new_infections(x, u);
            }
        }
    });
    return out;
}

} // namespace pompkit
