#include "pompkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace pompkit {

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) {
            return i;
        }
    }
    throw DataError(path + ": missing column '" + std::string(name) + "'");
}

namespace {

std::vector<std::string> split_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            }
            else if (c == '"') {
                quoted = false;
            }
            else {
                field += c;
            }
        }
        else if (c == '"') {
            quoted = true;
        }
        else if (c == ',') {
            out.push_back(field);
            field.clear();
        }
        else {
            field += c;
        }
    }
    out.push_back(field);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

std::ifstream open_in(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    return in;
}

bool is_na(const std::string& s)
{
    return s == "NA" || s.empty();
}

} // namespace

CsvTable read_csv(const std::string& path)
{
    auto in = open_in(path);
    CsvTable t;
    t.path = path;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_line(line);
        if (t.header.empty()) {
            t.header = std::move(fields);
            continue;
        }
        if (fields.size() != t.header.size()) {
            throw DataError(path + " row " + std::to_string(lineno) + ": expected " +
                            std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
        }
        t.rows.push_back(std::move(fields));
        t.lines.push_back(lineno);
    }
    if (t.header.empty()) {
        throw DataError(path + ": empty file");
    }
    return t;
}

std::string format_number(double v)
{
    if (is_missing(v)) {
        return "NA";
    }
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_number(const std::string& text, const std::string& where)
{
    double v = 0.0;
    const char* b = text.data();
    const char* e = b + text.size();
    if (!text.empty() && *b == '+') {
        ++b;
    }
    const auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e) {
        throw DataError(where + ": '" + text + "' is not a number");
    }
    return v;
}

ObservationSeries load_cases(const std::string& path, const std::vector<std::string>* expected_units)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_date = t.column("date");
    const std::size_t c_dept = t.column("department");
    const std::size_t c_cases = t.column("cases");
    if (t.rows.empty()) {
        throw DataError(path + ": no data rows");
    }

    std::set<std::string> dates;
    std::set<std::string> depts;
    std::map<std::pair<std::string, std::string>, std::size_t> seen;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        date_to_time(row[c_date]);  // format check
        const auto key = std::make_pair(row[c_date], row[c_dept]);
        if (auto it = seen.find(key); it != seen.end()) {
            throw DataError(path + ": duplicate entry for " + row[c_date] + " / " + row[c_dept] + " at rows " +
                            std::to_string(t.lines[it->second]) + " and " + std::to_string(t.lines[r]));
        }
        seen[key] = r;
        dates.insert(row[c_date]);
        depts.insert(row[c_dept]);
    }

    std::vector<std::string> units;
    if (expected_units) {
        const std::set<std::string> want(expected_units->begin(), expected_units->end());
        if (want != depts) {
            std::string msg = path + ": department set does not match the configured units;";
            for (const auto& d : depts) {
                if (!want.count(d)) {
                    msg += " unexpected '" + d + "'";
                }
            }
            for (const auto& d : want) {
                if (!depts.count(d)) {
                    msg += " missing '" + d + "'";
                }
            }
            throw DataError(msg);
        }
        units = *expected_units;
    }
    else {
        units.assign(depts.begin(), depts.end());
    }

    std::vector<double> times;
    for (const auto& d : dates) {
        times.push_back(date_to_time(d));
    }
    std::sort(times.begin(), times.end());
    std::string gaps;
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - kWeek) > 1e-9) {
            gaps += (gaps.empty() ? "" : ", ") + time_to_date(times[i - 1]) + " to " + time_to_date(times[i]);
        }
    }
    if (!gaps.empty()) {
        throw DataError(path + ": observations are not weekly; gaps between " + gaps);
    }

    ObservationSeries out(units, times);
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (std::size_t n = 0; n < times.size(); ++n) {
            out(u, n) = kMissing;
        }
    }
    std::map<std::string, std::size_t> unit_index;
    for (std::size_t u = 0; u < units.size(); ++u) {
        unit_index[units[u]] = u;
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const double tt = date_to_time(row[c_date]);
        const auto n = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), tt - 1e-9) - times.begin());
        const auto& txt = row[c_cases];
        if (is_na(txt)) {
            continue;
        }
        const double v = parse_number(txt, t.where(r));
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw DataError(t.where(r) + ": case count " + txt + " must be a nonnegative number");
        }
        out(unit_index.at(row[c_dept]), n) = v;
    }
    return out;
}

void write_cases(const std::string& path, const ObservationSeries& data)
{
    std::ostringstream os;
    os << "date,department,cases\n";
    for (std::size_t n = 0; n < data.length(); ++n) {
        const std::string date = time_to_date(data.times()[n]);
        for (std::size_t u = 0; u < data.units(); ++u) {
            os << date << ',' << data.unit_names()[u] << ',' << format_number(data(u, n)) << '\n';
        }
    }
    write_text(path, os.str());
}

CovariateTable load_rainfall(const std::string& path, const std::vector<std::string>& units)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_date = t.column("date");
    const std::size_t c_dept = t.column("department");
    const std::size_t c_mm = t.column("mm");

    std::set<double> time_set;
    for (const auto& row : t.rows) {
        time_set.insert(date_to_time(row[c_date]));
    }
    const std::vector<double> times(time_set.begin(), time_set.end());
    if (times.empty()) {
        throw DataError(path + ": no rainfall rows");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - kWeek) > 1e-9) {
            throw DataError(path + ": rainfall is not weekly between " + time_to_date(times[i - 1]) + " and " +
                            time_to_date(times[i]));
        }
    }
    std::map<std::string, std::size_t> index;
    for (std::size_t u = 0; u < units.size(); ++u) {
        index[units[u]] = u;
    }
    std::vector<std::vector<double>> raw(units.size(), std::vector<double>(times.size(), kMissing));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const auto it = index.find(row[c_dept]);
        if (it == index.end()) {
            continue;
        }
        const double tt = date_to_time(row[c_date]);
        const auto n = static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), tt - 1e-9) - times.begin());
        raw[it->second][n] = is_na(row[c_mm]) ? kMissing : parse_number(row[c_mm], t.where(r));
    }
    for (std::size_t u = 0; u < units.size(); ++u) {
        for (std::size_t n = 0; n < times.size(); ++n) {
            if (is_missing(raw[u][n])) {
                throw DataError(path + ": rainfall for " + units[u] + " missing on " + time_to_date(times[n]));
            }
        }
    }
    const auto std_rain = standardize_rainfall(raw, units);
    CovariateTable table(times, times.back() + kWeek);
    for (std::size_t u = 0; u < units.size(); ++u) {
        table.add_series(units[u], std_rain[u]);
    }
    return table;
}

std::vector<double> load_matrix(const std::string& path, const std::vector<std::string>& names)
{
    const CsvTable t = read_csv(path);
    const std::size_t n = names.size();
    if (t.header.size() != n + 1 || t.rows.size() != n) {
        throw DataError(path + ": expected a " + std::to_string(n) + " x " + std::to_string(n) +
                        " matrix with a header row and a name column");
    }
    std::map<std::string, std::size_t> col;
    for (std::size_t j = 1; j < t.header.size(); ++j) {
        col[t.header[j]] = j;
    }
    std::map<std::string, std::size_t> row;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        row[t.rows[r][0]] = r;
    }
    std::vector<double> m(n * n);
    for (std::size_t a = 0; a < n; ++a) {
        if (!row.count(names[a]) || !col.count(names[a])) {
            throw DataError(path + ": no row or column for " + names[a]);
        }
        const std::size_t r = row[names[a]];
        for (std::size_t b = 0; b < n; ++b) {
            m[a * n + b] = parse_number(t.rows[r][col[names[b]]], t.where(r));
        }
    }
    return m;
}

Geography load_geography(const std::string& geo_path, const std::string& distance_path,
                         const std::string& river_path)
{
    const CsvTable t = read_csv(geo_path);
    const std::size_t c_dept = t.column("department");
    const std::size_t c_pop = t.column("population");
    const std::size_t c_den = t.column("density");
    Geography g;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        g.names.push_back(t.rows[r][c_dept]);
        g.population.push_back(parse_number(t.rows[r][c_pop], t.where(r)));
        g.density.push_back(parse_number(t.rows[r][c_den], t.where(r)));
    }
    g.distance = load_matrix(distance_path, g.names);
    g.river = load_matrix(river_path, g.names);
    g.validate();
    return g;
}

EfficacyCurve load_efficacy(const std::string& path)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_w = t.column("weeks_since");
    const std::size_t c_1 = t.column("efficacy_1dose");
    const std::size_t c_2 = t.column("efficacy_2dose");
    EfficacyCurve e;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        e.weeks.push_back(parse_number(t.rows[r][c_w], t.where(r)));
        e.one_dose.push_back(parse_number(t.rows[r][c_1], t.where(r)));
        e.two_dose.push_back(parse_number(t.rows[r][c_2], t.where(r)));
    }
    e.validate();
    return e;
}

std::map<std::string, ScenarioSpec> load_scenarios(const std::string& path, const Geography& geo)
{
    const CsvTable t = read_csv(path);
    const std::size_t c_s = t.column("scenario");
    const std::size_t c_d = t.column("department");
    const std::size_t c_start = t.column("start_date");
    const std::size_t c_dur = t.column("duration_weeks");
    const std::size_t c_1 = t.column("doses_1");
    const std::size_t c_2 = t.column("doses_2");
    std::map<std::string, ScenarioSpec> out;
    out["V0"].id = "V0";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        auto& sc = out[row[c_s]];
        sc.id = row[c_s];
        Campaign c;
        c.department = row[c_d];
        c.start = date_to_time(row[c_start]);
        c.duration_weeks = parse_number(row[c_dur], t.where(r));
        c.doses_1 = parse_number(row[c_1], t.where(r));
        c.doses_2 = parse_number(row[c_2], t.where(r));
        sc.campaigns.push_back(c);
    }
    for (const auto& [id, sc] : out) {
        sc.validate(geo);
    }
    return out;
}

nlohmann::json parameters_to_json(const ParameterSet& p)
{
    nlohmann::json arr = nlohmann::json::array();
    const auto& s = p.schema();
    for (std::size_t i = 0; i < p.size(); ++i) {
        nlohmann::json e;
        e["name"] = s[i].name;
        e["value"] = p[i];
        e["transform"] = std::string(transform_name(s[i].transform));
        e["units"] = s[i].units;
        e["scope"] = s[i].unit == kShared ? std::string("shared") : "unit " + std::to_string(s[i].unit);
        arr.push_back(e);
    }
    return arr;
}

void apply_parameters(ParameterSet& p, const nlohmann::json& j, const std::string& source)
{
    auto set_one = [&](const std::string& name, const nlohmann::json& v) {
        if (!p.schema().contains(name)) {
            throw ValidationError(source + ": unknown parameter '" + name + "'");
        }
        if (!v.is_number()) {
            throw ValidationError(source + ": value of '" + name + "' is not a number");
        }
        p.set(name, v.get<double>());
    };
    if (j.is_array()) {
        for (const auto& e : j) {
            if (!e.contains("name") || !e.contains("value")) {
                throw ValidationError(source + ": parameter records need 'name' and 'value'");
            }
            set_one(e.at("name").get<std::string>(), e.at("value"));
        }
    }
    else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            set_one(k, v);
        }
    }
    else {
        throw ValidationError(source + ": parameters must be an array of records or an object");
    }
}

ParameterSet load_parameters(const std::string& path, ParameterSet defaults)
{
    const auto j = read_json(path);
    apply_parameters(defaults, j.contains("parameters") ? j.at("parameters") : j, path);
    return defaults;
}

void save_parameters(const std::string& path, const ParameterSet& p)
{
    write_json(path, parameters_to_json(p));
}

nlohmann::json read_json(const std::string& path)
{
    auto in = open_in(path);
    try {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const nlohmann::json& j)
{
    write_text(path, j.dump(2) + "\n");
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << text;
    if (!out) {
        throw IoError("write failed for " + path);
    }
}

} // namespace pompkit
