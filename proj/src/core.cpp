#include "pompkit/core.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace pompkit {

std::string_view category_name(ErrorCategory c)
{
    switch (c) {
    case ErrorCategory::validation:
        return "validation";
    case ErrorCategory::data:
        return "data";
    case ErrorCategory::numerical:
        return "numerical";
    case ErrorCategory::io:
        return "io";
    case ErrorCategory::internal:
        return "internal";
    }
    return "internal";
}

// ---------------------------------------------------------------------------
// Dates

namespace {

// days_from_civil / civil_from_days (H. Hinnant's algorithms)
long long days_from_civil(long long y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, long long& y, unsigned& m, unsigned& d)
{
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

const long long kEpochDays = days_from_civil(2000, 1, 1);

} // namespace

double date_to_time(std::string_view s)
{
    int y = 0;
    unsigned m = 0, d = 0;
    auto bad = [&] { return DataError("invalid ISO-8601 date '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        throw bad();
    }
    if (std::from_chars(s.data(), s.data() + 4, y).ec != std::errc{} ||
        std::from_chars(s.data() + 5, s.data() + 7, m).ec != std::errc{} ||
        std::from_chars(s.data() + 8, s.data() + 10, d).ec != std::errc{}) {
        throw bad();
    }
    if (m < 1 || m > 12 || d < 1 || d > 31) {
        throw bad();
    }
    const long long days = days_from_civil(y, m, d) - kEpochDays;
    return 2000.0 + static_cast<double>(days) / kDaysPerYear;
}

std::string time_to_date(double t)
{
    const auto days = static_cast<long long>(std::llround((t - 2000.0) * kDaysPerYear)) + kEpochDays;
    long long y = 0;
    unsigned m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", y, m, d);
    return buf;
}

// ---------------------------------------------------------------------------
// TimeGrid

void TimeGrid::validate() const
{
    if (obs_times.empty()) {
        throw ValidationError("time grid has no observation times");
    }
    if (!(euler_step > 0.0)) {
        throw ValidationError("euler_step must be positive");
    }
    if (!(t0 < obs_times.front())) {
        throw ValidationError("t0 must precede the first observation time");
    }
    double min_gap = obs_times.front() - t0;
    for (std::size_t i = 1; i < obs_times.size(); ++i) {
        const double gap = obs_times[i] - obs_times[i - 1];
        if (!(gap > 0.0)) {
            throw ValidationError("observation times must be strictly increasing (index " + std::to_string(i) + ")");
        }
        min_gap = std::min(min_gap, gap);
    }
    if (euler_step > min_gap * (1.0 + 1e-12)) {
        throw ValidationError("euler_step exceeds the smallest observation spacing");
    }
}

TimeGrid TimeGrid::weekly(double t0, std::size_t n, double euler_step, double week)
{
    TimeGrid g;
    g.t0 = t0;
    g.euler_step = euler_step;
    g.obs_times.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.obs_times[i] = t0 + week * static_cast<double>(i + 1);
    }
    return g;
}

std::size_t substeps(double from, double to, double dt)
{
    const double span = to - from;
    if (span <= 0.0) {
        return 0;
    }
    const double k = std::ceil(span / dt - 1e-9);
    return std::max<std::size_t>(1, static_cast<std::size_t>(k));
}

// ---------------------------------------------------------------------------
// Parameters

std::string_view transform_name(Transform t)
{
    switch (t) {
    case Transform::identity:
        return "identity";
    case Transform::log:
        return "log";
    case Transform::logit:
        return "logit";
    }
    return "identity";
}

Transform parse_transform(std::string_view s)
{
    if (s == "identity" || s == "none" || s.empty()) {
        return Transform::identity;
    }
    if (s == "log") {
        return Transform::log;
    }
    if (s == "logit") {
        return Transform::logit;
    }
    throw ValidationError("unknown transform '" + std::string(s) + "'");
}

double to_estimation(Transform t, double x)
{
    switch (t) {
    case Transform::identity:
        return x;
    case Transform::log:
        return std::log(x);
    case Transform::logit:
        return std::log(x / (1.0 - x));
    }
    return x;
}

double to_natural(Transform t, double z)
{
    switch (t) {
    case Transform::identity:
        return z;
    case Transform::log:
        return std::exp(z);
    case Transform::logit:
        return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

ParameterSchema::ParameterSchema(std::vector<ParameterInfo> entries) : entries_(std::move(entries))
{
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!index_.emplace(entries_[i].name, i).second) {
            throw ValidationError("duplicate parameter name '" + entries_[i].name + "'");
        }
    }
}

std::optional<std::size_t> ParameterSchema::find(std::string_view name) const
{
    auto it = index_.find(name);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t ParameterSchema::index_of(std::string_view name) const
{
    auto i = find(name);
    if (!i) {
        throw ValidationError("unknown parameter '" + std::string(name) + "'");
    }
    return *i;
}

ParameterSet::ParameterSet(std::shared_ptr<const ParameterSchema> schema) : schema_(std::move(schema))
{
    values_.reserve(schema_->size());
    for (const auto& e : schema_->entries()) {
        values_.push_back(e.default_value);
    }
}

ParameterSet::ParameterSet(std::shared_ptr<const ParameterSchema> schema, std::vector<double> values)
    : schema_(std::move(schema)), values_(std::move(values))
{
    if (values_.size() != schema_->size()) {
        throw ValidationError("parameter vector length does not match schema");
    }
}

std::vector<double> ParameterSet::estimation_values() const
{
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) {
        out[i] = to_estimation((*schema_)[i].transform, values_[i]);
    }
    return out;
}

void ParameterSet::set_from_estimation(std::span<const double> est)
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] = to_natural((*schema_)[i].transform, est[i]);
    }
}

void ParameterSet::validate() const
{
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const auto& info = (*schema_)[i];
        const double v = values_[i];
        if (!std::isfinite(v)) {
            throw ValidationError("parameter '" + info.name + "' is not finite");
        }
        // boundary values are allowed; they cannot be estimated (see check_estimable)
        if (info.transform == Transform::log && !(v >= 0.0)) {
            throw ValidationError("parameter '" + info.name + "' must be nonnegative (got " + std::to_string(v) + ")");
        }
        if (info.transform == Transform::logit && !(v >= 0.0 && v <= 1.0)) {
            throw ValidationError("parameter '" + info.name + "' must lie in [0,1] (got " + std::to_string(v) + ")");
        }
    }
}

void ParameterSet::check_estimable(std::string_view name) const
{
    const std::size_t i = schema_->index_of(name);
    if (!std::isfinite(to_estimation((*schema_)[i].transform, values_[i]))) {
        throw ValidationError("parameter '" + std::string(name) + "' sits on the boundary of its domain (" +
                              std::to_string(values_[i]) + ") and cannot be estimated");
    }
}

// ---------------------------------------------------------------------------
// ObservationSeries

ObservationSeries::ObservationSeries(std::vector<std::string> unit_names, std::vector<double> times)
    : unit_names_(std::move(unit_names)), times_(std::move(times)), values_(unit_names_.size() * times_.size(), kMissing)
{
}

ObservationSeries ObservationSeries::slice(std::size_t first, std::size_t count) const
{
    if (first + count > length()) {
        throw ValidationError("observation slice out of range");
    }
    ObservationSeries out(unit_names_, std::vector<double>(times_.begin() + first, times_.begin() + first + count));
    for (std::size_t u = 0; u < units(); ++u) {
        for (std::size_t n = 0; n < count; ++n) {
            out(u, n) = (*this)(u, first + n);
        }
    }
    return out;
}

void ObservationSeries::validate() const
{
    for (std::size_t u = 0; u < units(); ++u) {
        for (std::size_t n = 0; n < length(); ++n) {
            const double y = (*this)(u, n);
            if (is_missing(y)) {
                continue;
            }
            if (y < 0.0 || y != std::floor(y)) {
                throw DataError("observation for unit '" + unit_names_[u] + "' at index " + std::to_string(n) +
                                " is not a nonnegative integer");
            }
        }
    }
}

bool ObservationSeries::operator==(const ObservationSeries& other) const
{
    if (unit_names_ != other.unit_names_ || times_ != other.times_ || values_.size() != other.values_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const bool ma = is_missing(values_[i]);
        const bool mb = is_missing(other.values_[i]);
        if (ma != mb || (!ma && values_[i] != other.values_[i])) {
            return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// CovariateTable

CovariateTable::CovariateTable(std::vector<double> breakpoints, double end) : times_(std::move(breakpoints)), end_(end)
{
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ValidationError("covariate breakpoints must be strictly increasing");
        }
    }
    if (!times_.empty() && !(end_ > times_.back())) {
        throw ValidationError("covariate coverage end must follow the last breakpoint");
    }
}

std::size_t CovariateTable::add_series(const std::string& name, std::vector<double> values)
{
    if (values.size() != times_.size()) {
        throw ValidationError("covariate series '" + name + "' length does not match breakpoints");
    }
    if (has_series(name)) {
        throw ValidationError("duplicate covariate series '" + name + "'");
    }
    names_.push_back(name);
    values_.push_back(std::move(values));
    return names_.size() - 1;
}

bool CovariateTable::has_series(std::string_view name) const
{
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::size_t CovariateTable::series_index(std::string_view name) const
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
        throw DataError("missing covariate series '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
}

double CovariateTable::value(std::size_t series, double t) const
{
    // small tolerance so steps landing on the coverage edge through rounding still resolve
    constexpr double eps = 1e-9;
    if (times_.empty() || t < times_.front() - eps || t > end_ + eps) {
        std::ostringstream os;
        os << "covariate '" << names_.at(series) << "' has no value at t=" << t << " (coverage ["
           << (times_.empty() ? 0.0 : times_.front()) << ", " << end_ << "])";
        throw DataError(os.str());
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t + eps);
    const std::size_t i = it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
    return values_[series][i];
}

void CovariateTable::check_coverage(double from, double to) const
{
    if (names_.empty()) {
        return;
    }
    constexpr double eps = 1e-9;
    std::ostringstream os;
    if (times_.empty()) {
        os << "covariates are empty; cannot cover [" << from << ", " << to << "]";
        throw DataError(os.str());
    }
    if (from < times_.front() - eps) {
        os << "covariates do not cover [" << from << ", " << times_.front() << ") (" << time_to_date(from) << " to "
           << time_to_date(times_.front()) << ")";
        throw DataError(os.str());
    }
    if (to > end_ + eps) {
        os << "covariates do not cover (" << end_ << ", " << to << "] (" << time_to_date(end_) << " to "
           << time_to_date(to) << ")";
        throw DataError(os.str());
    }
}

std::vector<std::vector<double>> standardize_rainfall(const std::vector<std::vector<double>>& raw,
                                                      const std::vector<std::string>& unit_names)
{
    std::vector<std::vector<double>> out;
    out.reserve(raw.size());
    for (std::size_t u = 0; u < raw.size(); ++u) {
        const std::string name = u < unit_names.size() ? unit_names[u] : std::to_string(u + 1);
        double mx = 0.0;
        for (double v : raw[u]) {
            if (!(v >= 0.0)) {
                throw DataError("rainfall for unit '" + name + "' has a negative or missing value");
            }
            mx = std::max(mx, v);
        }
        if (!(mx > 0.0)) {
            throw DataError("rainfall for unit '" + name + "' is zero throughout; cannot standardize");
        }
        std::vector<double> s(raw[u].size());
        for (std::size_t i = 0; i < s.size(); ++i) {
            s[i] = raw[u][i] / mx;
        }
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace pompkit
