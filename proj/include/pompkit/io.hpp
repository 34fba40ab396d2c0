#pragma once

#include "pompkit/core.hpp"
#include "pompkit/geography.hpp"
#include "pompkit/vaccination.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace pompkit {

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  ///< 1-based file line of each row

    /// Throws DataError naming the file when the column is absent.
    std::size_t column(std::string_view name) const;
    std::string where(std::size_t row) const { return path + " row " + std::to_string(lines[row]); }
};

/// Comma-separated with a header row; double-quoted fields may contain commas.
CsvTable read_csv(const std::string& path);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);
double parse_number(const std::string& text, const std::string& where);

/// `date,department,cases`, weekly. With `expected_units` the department set must
/// match exactly and rows follow that order; otherwise departments are sorted.
/// Absent (date, department) rows and `NA` are missing.
ObservationSeries load_cases(const std::string& path, const std::vector<std::string>* expected_units = nullptr);
void write_cases(const std::string& path, const ObservationSeries& data);

/// `date,department,mm`, weekly and complete; each department standardized by its maximum.
CovariateTable load_rainfall(const std::string& path, const std::vector<std::string>& units);

/// U x U matrix with department names on the header row and first column; rows
/// and columns are reordered to `names`.
std::vector<double> load_matrix(const std::string& path, const std::vector<std::string>& names);

/// `department,population,density` plus distance and river matrices.
Geography load_geography(const std::string& geo_path, const std::string& distance_path,
                         const std::string& river_path);

/// `weeks_since,efficacy_1dose,efficacy_2dose`.
EfficacyCurve load_efficacy(const std::string& path);

/// `scenario,department,start_date,duration_weeks,doses_1,doses_2`. V0 is always present.
std::map<std::string, ScenarioSpec> load_scenarios(const std::string& path, const Geography& geo);

/// JSON parameter file: an array of {name, value, transform, unit, units} records
/// or a plain object of name -> value. Values are on the natural scale.
nlohmann::json parameters_to_json(const ParameterSet& p);
void apply_parameters(ParameterSet& p, const nlohmann::json& j, const std::string& source);
ParameterSet load_parameters(const std::string& path, ParameterSet defaults);
void save_parameters(const std::string& path, const ParameterSet& p);

nlohmann::json read_json(const std::string& path);
void write_json(const std::string& path, const nlohmann::json& j);
void write_text(const std::string& path, const std::string& text);

} // namespace pompkit
