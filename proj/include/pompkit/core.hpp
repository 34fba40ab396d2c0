#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pompkit {

// ---------------------------------------------------------------------------
// Errors

enum class ErrorCategory { validation = 2, data = 3, numerical = 4, io = 5, internal = 10 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what) : std::runtime_error(what), category_(category) {}
    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorCategory::numerical, what) {}
};

std::string_view category_name(ErrorCategory c);

// ---------------------------------------------------------------------------
// Time units. Internal time is in years; rates are per year.

inline constexpr double kDaysPerYear = 365.25;
inline constexpr double kWeeksPerYear = kDaysPerYear / 7.0;
inline constexpr double kWeek = 7.0 / kDaysPerYear;
inline constexpr double kDefaultEulerStep = 1.0 / 365.0;

/// Rate conversions into per-year.
constexpr double per_day(double rate) { return rate * kDaysPerYear; }
constexpr double per_week(double rate) { return rate * kWeeksPerYear; }
/// Per-year rate back to per-day / per-week.
constexpr double to_per_day(double rate_per_year) { return rate_per_year / kDaysPerYear; }
constexpr double to_per_week(double rate_per_year) { return rate_per_year / kWeeksPerYear; }

/// Calendar date (ISO-8601, proleptic Gregorian) to decimal time in years,
/// measured linearly from 2000-01-01 so a week is exactly kWeek apart.
double date_to_time(std::string_view iso_date);
std::string time_to_date(double t);

// ---------------------------------------------------------------------------

struct TimeGrid {
    double t0 = 0.0;
    std::vector<double> obs_times;
    double euler_step = kDefaultEulerStep;

    void validate() const;
    std::size_t size() const { return obs_times.size(); }
    double end() const { return obs_times.empty() ? t0 : obs_times.back(); }

    /// Weekly grid with n observations starting one week after t0.
    static TimeGrid weekly(double t0, std::size_t n, double euler_step = kDefaultEulerStep, double week = kWeek);
};

/// Number of equal substeps used to cover [from, to] with steps no longer than dt.
std::size_t substeps(double from, double to, double dt);

// ---------------------------------------------------------------------------
// Parameters

enum class Transform { identity, log, logit };

std::string_view transform_name(Transform t);
Transform parse_transform(std::string_view s);
double to_estimation(Transform t, double natural);
double to_natural(Transform t, double estimation);

inline constexpr int kShared = -1;

struct ParameterInfo {
    std::string name;
    Transform transform = Transform::identity;
    int unit = kShared;   ///< kShared, or the unit this parameter belongs to
    double default_value = 0.0;
    std::string units;        ///< unit of the stored value, e.g. "day^-1"
    double year_factor = 1.0; ///< multiply the stored value by this to get per-year units
};

class ParameterSchema {
public:
    ParameterSchema() = default;
    explicit ParameterSchema(std::vector<ParameterInfo> entries);

    std::size_t size() const { return entries_.size(); }
    const ParameterInfo& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<ParameterInfo>& entries() const { return entries_; }

    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t index_of(std::string_view name) const;   ///< throws ValidationError
    bool contains(std::string_view name) const { return find(name).has_value(); }

private:
    std::vector<ParameterInfo> entries_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Named natural-scale parameter values bound to a schema.
class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(std::shared_ptr<const ParameterSchema> schema);
    ParameterSet(std::shared_ptr<const ParameterSchema> schema, std::vector<double> values);

    const ParameterSchema& schema() const { return *schema_; }
    std::shared_ptr<const ParameterSchema> schema_ptr() const { return schema_; }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    double get(std::string_view name) const { return values_[schema_->index_of(name)]; }
    void set(std::string_view name, double value) { values_[schema_->index_of(name)] = value; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    std::vector<double> estimation_values() const;
    void set_from_estimation(std::span<const double> est);

    /// Transform-domain check: log >= 0, logit in [0,1], all finite.
    void validate() const;
    /// Throws ValidationError when the value maps to an infinite estimation-scale value.
    void check_estimable(std::string_view name) const;

    bool operator==(const ParameterSet& other) const { return values_ == other.values_; }

private:
    std::shared_ptr<const ParameterSchema> schema_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Observations

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double y) { return std::isnan(y); }

/// U x N matrix of reported counts; NaN marks a missing entry.
class ObservationSeries {
public:
    ObservationSeries() = default;
    ObservationSeries(std::vector<std::string> unit_names, std::vector<double> times);

    std::size_t units() const { return unit_names_.size(); }
    std::size_t length() const { return times_.size(); }
    const std::vector<std::string>& unit_names() const { return unit_names_; }
    const std::vector<double>& times() const { return times_; }

    double operator()(std::size_t unit, std::size_t n) const { return values_[unit * times_.size() + n]; }
    double& operator()(std::size_t unit, std::size_t n) { return values_[unit * times_.size() + n]; }
    std::span<const double> row(std::size_t unit) const
    {
        return std::span<const double>(values_).subspan(unit * times_.size(), times_.size());
    }

    /// Columns [first, first+count) as a new series.
    ObservationSeries slice(std::size_t first, std::size_t count) const;
    void validate() const;

    bool operator==(const ObservationSeries& other) const;

private:
    std::vector<std::string> unit_names_;
    std::vector<double> times_;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Covariates

/// Piecewise-constant time series: series value i holds on [times[i], times[i+1]),
/// the last one up to end().
class CovariateTable {
public:
    CovariateTable() = default;
    CovariateTable(std::vector<double> breakpoints, double end);

    std::size_t add_series(const std::string& name, std::vector<double> values);
    bool has_series(std::string_view name) const;
    std::size_t series_index(std::string_view name) const;
    const std::vector<std::string>& series_names() const { return names_; }
    const std::vector<double>& series(std::size_t i) const { return values_[i]; }

    /// Value at time t; throws DataError when t is outside coverage.
    double value(std::size_t series, double t) const;
    double value(std::string_view name, double t) const { return value(series_index(name), t); }

    double begin() const { return times_.empty() ? 0.0 : times_.front(); }
    double end() const { return end_; }
    const std::vector<double>& breakpoints() const { return times_; }
    bool empty() const { return times_.empty(); }

    /// Throws DataError naming the uncovered interval unless [from, to] is covered.
    void check_coverage(double from, double to) const;

private:
    std::vector<double> times_;
    double end_ = 0.0;
    std::vector<std::string> names_;
    std::vector<std::vector<double>> values_;
};

/// Per-unit division by the unit's maximum; the result lies in [0, 1].
std::vector<std::vector<double>> standardize_rainfall(const std::vector<std::vector<double>>& raw,
                                                      const std::vector<std::string>& unit_names);

} // namespace pompkit
