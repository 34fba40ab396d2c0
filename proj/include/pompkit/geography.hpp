#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pompkit {

/// Department populations, densities, and U x U coupling matrices (row-major).
struct Geography {
    std::vector<std::string> names;
    std::vector<double> population;   ///< persons
    std::vector<double> density;      ///< persons / km^2
    std::vector<double> distance;     ///< km, zero diagonal
    std::vector<double> river;        ///< dimensionless, zero diagonal

    std::size_t size() const { return names.size(); }
    double dist(std::size_t u, std::size_t v) const { return distance[u * size() + v]; }
    double river_flow(std::size_t u, std::size_t v) const { return river[u * size() + v]; }
    std::size_t index_of(std::string_view name) const;   ///< throws DataError

    /// Throws DataError on nonpositive populations, bad distances, or shape mismatch.
    void validate() const;

    /// T_uv = v_rate * Pop_u * Pop_v / D_uv^2 with zero diagonal.
    std::vector<double> gravity(double v_rate) const;

    /// Keeps the listed departments in the given order.
    Geography subset(const std::vector<std::size_t>& keep) const;
};

/// The ten Haitian departments in alphabetical order.
const std::vector<std::string>& haiti_departments();

/// Approximate populations and densities with distances between approximate
/// department centroids and a synthetic downstream river matrix.
Geography synthetic_haiti_geography();

} // namespace pompkit
