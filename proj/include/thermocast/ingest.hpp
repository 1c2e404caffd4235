#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/time.hpp"

namespace thermocast {

// Station metadata taken from the named header rows of a meteoblue-style
// export. LAT, LON and UTC OFFSET are mandatory; the rest default.
struct SeriesMetadata {
    double latitude = 0.0;   // decimal degrees
    double longitude = 0.0;  // decimal degrees
    double altitude = 0.0;   // meters above sea level
    std::string city;
    int utc_offset = 0;      // whole hours
    std::string variable_name = "Temperature";
    std::string unit = "°C";
};

// One data row. The non-temperature fields are parsed and validated but
// nothing downstream consumes them.
struct RawRecord {
    int year = 1970;
    int month = 1;
    int day = 1;
    int hour = 0;
    int minute = 0;
    double temperature = 0.0;     // °C
    double precipitation = 0.0;   // mm
    double wind_speed = 0.0;      // km/h
    double wind_direction = 0.0;  // degrees

    UtcTime timestamp(int utc_offset_hours) const {
        return to_utc({year, unsigned(month), unsigned(day), hour, minute}, utc_offset_hours);
    }
};

// Hourly readings with no gaps: values[i] is the reading at start + i hours.
struct TemperatureSeries {
    UtcTime start{};
    std::vector<double> values;  // °C
    SeriesMetadata metadata;

    static constexpr std::chrono::hours step{1};
    UtcTime time_at(std::size_t i) const { return start + std::chrono::hours{static_cast<long>(i)}; }
};

struct ParsedDocument {
    SeriesMetadata metadata;
    std::vector<RawRecord> records;
};

namespace detail {

inline constexpr std::array<const char*, 9> kDataColumns = {
    "Year", "Month", "Day", "Hour", "Minute", "Temperature", "Precipitation", "Wind Speed", "Wind Direction"};

inline std::size_t count_char(std::string_view s, char c) {
    std::size_t n = 0;
    for (char x : s) n += (x == c);
    return n;
}

inline double parse_header_number(std::string_view row_name, std::string_view cell) {
    const auto v = parse_number<double>(cell);
    if (!v || !std::isfinite(*v))
        fail("header row ", row_name, ": malformed numeric cell '", std::string(cell), "'");
    return *v;
}

} // namespace detail

// Physical sanity window for surface temperatures.
inline constexpr double kMinPlausibleTemperatureC = -90.0;
inline constexpr double kMaxPlausibleTemperatureC = 60.0;

// Parses a meteoblue-style CSV export: named header rows (LAT, LON, ...,
// UTC OFFSET), one column-header row starting with "Year", then data rows of
// 9 columns. The cell delimiter (comma or semicolon) is auto-detected from
// the column-header row.
inline ParsedDocument parse_meteoblue_csv(std::string_view text) {
    const auto lines = detail::split_lines(text);

    std::size_t column_header_line = lines.size();
    char delim = ',';
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.rfind("Year", 0) == 0 && line.size() > 4 && (line[4] == ',' || line[4] == ';')) {
            column_header_line = i;
            delim = detail::count_char(line, ';') > detail::count_char(line, ',') ? ';' : ',';
            break;
        }
    }
    if (column_header_line == lines.size())
        detail::fail("missing column-header row (expected a row starting with 'Year')");

    SeriesMetadata metadata;
    bool have_lat = false, have_lon = false, have_offset = false;
    for (std::size_t i = 0; i < column_header_line; ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty()) continue;
        const auto cells = detail::split(line, delim);
        const auto name = detail::trim(cells[0]);
        const auto value = cells.size() > 1 ? detail::trim(cells[1]) : std::string_view{};
        if (name == "LAT") {
            metadata.latitude = detail::parse_header_number(name, value);
            have_lat = true;
        } else if (name == "LON") {
            metadata.longitude = detail::parse_header_number(name, value);
            have_lon = true;
        } else if (name == "ALT") {
            metadata.altitude = detail::parse_header_number(name, value);
        } else if (name == "CITY") {
            metadata.city = std::string(value);
        } else if (name == "NAME") {
            metadata.variable_name = std::string(value);
        } else if (name == "UNIT") {
            metadata.unit = std::string(value);
        } else if (name == "UTC OFFSET") {
            const auto v = detail::parse_number<int>(value);
            if (!v) detail::fail("header row UTC OFFSET: malformed numeric cell '", std::string(value), "'");
            metadata.utc_offset = *v;
            have_offset = true;
        }
        // DOMAIN, LOGIC, AGGREGATION and unknown rows are present in exports
        // but carry nothing this pipeline needs.
    }
    if (!have_lat) detail::fail("missing mandatory header row: LAT");
    if (!have_lon) detail::fail("missing mandatory header row: LON");
    if (!have_offset) detail::fail("missing mandatory header row: UTC OFFSET");
    if (metadata.latitude < -90.0 || metadata.latitude > 90.0)
        detail::fail("latitude out of range [-90, 90]: ", fmt_double(metadata.latitude));
    if (metadata.longitude < -180.0 || metadata.longitude > 180.0)
        detail::fail("longitude out of range [-180, 180]: ", fmt_double(metadata.longitude));
    if (metadata.utc_offset < -12 || metadata.utc_offset > 14)
        detail::fail("UTC offset out of range [-12, 14]: ", metadata.utc_offset);

    std::vector<RawRecord> records;
    for (std::size_t i = column_header_line + 1; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty()) continue;
        auto cells = detail::split(line, delim);
        while (cells.size() > detail::kDataColumns.size() && detail::trim(cells.back()).empty()) cells.pop_back();
        if (cells.size() != detail::kDataColumns.size())
            detail::fail("line ", i + 1, ": expected ", detail::kDataColumns.size(), " columns, got ", cells.size());

        const auto real_cell = [&](std::size_t col) {
            const auto cell = detail::trim(cells[col]);
            const auto v = detail::parse_number<double>(cell);
            if (!v || !std::isfinite(*v))
                detail::fail("line ", i + 1, ", column '", detail::kDataColumns[col],
                             "': malformed numeric cell '", std::string(cell), "'");
            return *v;
        };
        const auto int_cell = [&](std::size_t col, int lo, int hi) {
            const auto cell = detail::trim(cells[col]);
            const auto v = detail::parse_number<int>(cell);
            if (!v)
                detail::fail("line ", i + 1, ", column '", detail::kDataColumns[col],
                             "': malformed numeric cell '", std::string(cell), "'");
            if (*v < lo || *v > hi)
                detail::fail("line ", i + 1, ", column '", detail::kDataColumns[col], "': value ", *v,
                             " outside [", lo, ", ", hi, "]");
            return *v;
        };

        RawRecord r;
        r.year = int_cell(0, 1, 9999);
        r.month = int_cell(1, 1, 12);
        r.day = int_cell(2, 1, 31);
        r.hour = int_cell(3, 0, 23);
        r.minute = int_cell(4, 0, 59);
        r.temperature = real_cell(5);
        r.precipitation = real_cell(6);
        r.wind_speed = real_cell(7);
        r.wind_direction = real_cell(8);
        if (!is_valid_date(r.year, unsigned(r.month), unsigned(r.day)))
            detail::fail("line ", i + 1, ": invalid calendar date ", r.year, "-", r.month, "-", r.day);
        if (r.temperature < kMinPlausibleTemperatureC || r.temperature > kMaxPlausibleTemperatureC)
            detail::fail("line ", i + 1, ": temperature ", fmt_double(r.temperature), " °C outside [",
                         fmt_double(kMinPlausibleTemperatureC), ", ", fmt_double(kMaxPlausibleTemperatureC), "]");
        records.push_back(r);
    }
    if (records.empty()) detail::fail("zero data rows");
    return {std::move(metadata), std::move(records)};
}

// A break in hourly continuity between records index-1 and index.
struct Discontinuity {
    std::size_t index = 0;
    std::chrono::seconds delta{0};  // signed time from the previous record; 1 h means contiguous
};

inline std::vector<Discontinuity> scan_continuity(const std::vector<RawRecord>& records, int utc_offset) {
    std::vector<Discontinuity> breaks;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const auto delta = records[i].timestamp(utc_offset) - records[i - 1].timestamp(utc_offset);
        if (delta != std::chrono::hours{1}) breaks.push_back({i, delta});
    }
    return breaks;
}

inline TemperatureSeries extract_temperature_series(const std::vector<RawRecord>& records,
                                                    const SeriesMetadata& metadata) {
    if (records.empty()) detail::fail("no records to extract");
    const auto breaks = scan_continuity(records, metadata.utc_offset);
    if (!breaks.empty()) {
        const auto& b = breaks.front();
        if (b.delta <= std::chrono::seconds{0})
            detail::fail("non-monotone timestamps at record index ", b.index);
        detail::fail("hour gap at record index ", b.index, ": ",
                     fmt_double(std::chrono::duration<double, std::ratio<3600>>(b.delta).count()),
                     " h between consecutive records");
    }
    TemperatureSeries series;
    series.metadata = metadata;
    series.start = records.front().timestamp(metadata.utc_offset);
    series.values.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!std::isfinite(records[i].temperature))
            detail::fail("non-finite temperature at record index ", i);
        series.values.push_back(records[i].temperature);
    }
    return series;
}

// Writes the documented 9-column shape back out. Only the temperature column
// carries data; values round-trip bit-for-bit through parse + extract.
inline std::string write_meteoblue_csv(const TemperatureSeries& series) {
    const auto& md = series.metadata;
    std::ostringstream os;
    os << "LAT," << fmt_double(md.latitude) << "\n";
    os << "LON," << fmt_double(md.longitude) << "\n";
    os << "ALT," << fmt_double(md.altitude) << "\n";
    os << "CITY," << md.city << "\n";
    os << "NAME," << md.variable_name << "\n";
    os << "UNIT," << md.unit << "\n";
    os << "UTC OFFSET," << md.utc_offset << "\n";
    os << "Year,Month,Day,Hour,Minute,Temperature,Precipitation,Wind Speed,Wind Direction\n";
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const CivilTime c = to_civil(series.time_at(i), md.utc_offset);
        os << c.year << ',' << c.month << ',' << c.day << ',' << c.hour << ',' << c.minute << ','
           << fmt_double(series.values[i]) << ",0,0,0\n";
    }
    return os.str();
}

} // namespace thermocast
