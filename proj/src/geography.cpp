#include "pompkit/geography.hpp"

#include "pompkit/core.hpp"

#include <cmath>

namespace pompkit {

std::size_t Geography::index_of(std::string_view name) const
{
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    throw DataError("unknown department '" + std::string(name) + "'");
}

void Geography::validate() const
{
    const std::size_t n = names.size();
    if (n == 0) {
        throw DataError("geography has no departments");
    }
    if (population.size() != n || density.size() != n || distance.size() != n * n || river.size() != n * n) {
        throw DataError("geography tables do not all cover " + std::to_string(n) + " departments");
    }
    for (std::size_t u = 0; u < n; ++u) {
        if (!(population[u] > 0.0)) {
            throw DataError("population of " + names[u] + " must be positive");
        }
        if (!(density[u] > 0.0)) {
            throw DataError("density of " + names[u] + " must be positive");
        }
        for (std::size_t v = 0; v < n; ++v) {
            const double d = distance[u * n + v];
            const double r = river[u * n + v];
            if (u == v) {
                if (d != 0.0 || r != 0.0) {
                    throw DataError("distance and river matrices need a zero diagonal (" + names[u] + ")");
                }
            }
            else if (!(d > 0.0)) {
                throw DataError("distance " + names[u] + " -> " + names[v] + " must be positive");
            }
            if (!(r >= 0.0)) {
                throw DataError("river flow " + names[u] + " -> " + names[v] + " must be nonnegative");
            }
        }
    }
}

std::vector<double> Geography::gravity(double v_rate) const
{
    const std::size_t n = size();
    std::vector<double> t(n * n, 0.0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u != v) {
                const double d = dist(u, v);
                t[u * n + v] = v_rate * population[u] * population[v] / (d * d);
            }
        }
    }
    return t;
}

Geography Geography::subset(const std::vector<std::size_t>& keep) const
{
    Geography g;
    const std::size_t n = size();
    for (auto u : keep) {
        g.names.push_back(names.at(u));
        g.population.push_back(population.at(u));
        g.density.push_back(density.at(u));
    }
    for (auto u : keep) {
        for (auto v : keep) {
            g.distance.push_back(distance[u * n + v]);
            g.river.push_back(river[u * n + v]);
        }
    }
    return g;
}

const std::vector<std::string>& haiti_departments()
{
    static const std::vector<std::string> names{"Artibonite", "Centre", "Grand'Anse", "Nippes", "Nord",
                                                "Nord-Est",   "Nord-Ouest", "Ouest",   "Sud",    "Sud-Est"};
    return names;
}

Geography synthetic_haiti_geography()
{
    Geography g;
    g.names = haiti_departments();
    g.population = {1727524, 746236, 468301, 342525, 1067177, 393967, 728807, 4029705, 774976, 632601};
    g.density = {353, 214, 245, 270, 505, 243, 347, 809, 292, 311};

    // approximate centroids (longitude, latitude)
    const double lon[] = {-72.5, -71.9, -74.1, -73.3, -72.3, -71.9, -72.9, -72.3, -73.7, -72.3};
    const double lat[] = {19.3, 19.0, 18.5, 18.4, 19.6, 19.5, 19.8, 18.6, 18.3, 18.3};
    const std::size_t n = g.names.size();
    g.distance.assign(n * n, 0.0);
    constexpr double kKmPerDegLat = 111.0;
    const double kKmPerDegLon = 111.0 * std::cos(19.0 * M_PI / 180.0);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v) {
                continue;
            }
            const double dx = (lon[u] - lon[v]) * kKmPerDegLon;
            const double dy = (lat[u] - lat[v]) * kKmPerDegLat;
            // road distances run longer than straight lines
            g.distance[u * n + v] = 1.4 * std::hypot(dx, dy);
        }
    }

    // water flows downhill from the central plateau toward the coast
    g.river.assign(n * n, 0.0);
    auto flow = [&](const char* from, const char* to, double w) { g.river[g.index_of(from) * n + g.index_of(to)] = w; };
    flow("Centre", "Artibonite", 1.0);
    flow("Centre", "Ouest", 0.3);
    flow("Nord-Est", "Nord", 0.2);
    flow("Nord", "Nord-Ouest", 0.1);
    flow("Nippes", "Grand'Anse", 0.1);
    flow("Sud-Est", "Ouest", 0.1);
    flow("Artibonite", "Nord-Ouest", 0.05);
    return g;
}

} // namespace pompkit
