#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/dataset.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/rnn.hpp"
#include "thermocast/time.hpp"

namespace thermocast {

// Each autoregressive step sees at most the most recent day of values.
inline constexpr std::size_t kForecastContextHours = 24;

struct ForecastReport {
    int horizon = 0;
    std::vector<double> predicted;  // °C, one per hour
    std::vector<double> actual;     // °C; empty until evaluated
    UtcTime start{};                // timestamp of predicted[0]
    std::optional<double> mape;
    std::optional<double> accuracy_percent;

    bool has_actual() const { return !actual.empty(); }
};

// Final-step output of an eval-mode pass over the (scaled) context.
inline double predict_next(const RnnParams& params, std::span<const double> scaled_context) {
    if (scaled_context.empty()) detail::fail("predict_next: empty context");
    return forward_eval(params, scaled_context).outputs.back();
}

// Feeds each prediction back as the next input, horizon times, windowing the
// context to its most recent 24 entries before every step. Scaled values
// never leave this function; the report is in °C.
inline ForecastReport rolling_forecast(const RnnParams& params, const Scaler& scaler,
                                       std::span<const double> context_celsius, int horizon,
                                       UtcTime start = {}) {
    if (horizon < 1) detail::fail("rolling_forecast: horizon must be >= 1, got ", horizon);
    if (context_celsius.empty()) detail::fail("rolling_forecast: empty context");

    std::vector<double> scaled;
    scaled.reserve(context_celsius.size() + static_cast<std::size_t>(horizon));
    for (const double v : context_celsius) scaled.push_back(scale(scaler, v));

    ForecastReport report;
    report.horizon = horizon;
    report.start = start;
    report.predicted.reserve(static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) {
        const std::size_t window = std::min(scaled.size(), kForecastContextHours);
        const std::span<const double> context(scaled.data() + (scaled.size() - window), window);
        const double next = predict_next(params, context);
        if (!std::isfinite(next))
            detail::fail("rolling_forecast: non-finite prediction at step ", k, " (divergent model)");
        scaled.push_back(next);
        report.predicted.push_back(invert_scale(scaler, next));
    }
    return report;
}

inline ForecastReport evaluate_forecast(const ForecastReport& report, std::span<const double> actual_celsius) {
    if (actual_celsius.size() != static_cast<std::size_t>(report.horizon))
        detail::fail("evaluate_forecast: ", actual_celsius.size(), " actuals for horizon ", report.horizon);
    ForecastReport out = report;
    out.actual.assign(actual_celsius.begin(), actual_celsius.end());
    out.mape = paper_mape(out.predicted, out.actual);
    out.accuracy_percent = 100.0 * (1.0 - *out.mape);
    return out;
}

// Report CSV: `timestamp,predicted_c` plus an `actual_c` column when actuals
// are attached.
inline std::string write_report_csv(const ForecastReport& report) {
    const bool with_actual = report.has_actual();
    std::ostringstream os;
    os << (with_actual ? "timestamp,predicted_c,actual_c\n" : "timestamp,predicted_c\n");
    for (int k = 0; k < report.horizon; ++k) {
        os << format_iso(report.start + std::chrono::hours{k}) << ',' << fmt_double(report.predicted[k]);
        if (with_actual) os << ',' << fmt_double(report.actual[k]);
        os << '\n';
    }
    return os.str();
}

inline ForecastReport parse_report_csv(std::string_view text) {
    const auto lines = detail::split_lines(text);
    std::size_t i = 0;
    while (i < lines.size() && detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) detail::fail("report csv: empty document");
    const auto header = detail::trim(lines[i]);
    bool with_actual = false;
    if (header == "timestamp,predicted_c,actual_c") with_actual = true;
    else if (header != "timestamp,predicted_c")
        detail::fail("report csv: unexpected header '", std::string(header), "'");

    ForecastReport report;
    bool first_row = true;
    for (++i; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        const std::size_t expected = with_actual ? 3 : 2;
        if (cells.size() != expected)
            detail::fail("report csv line ", i + 1, ": expected ", expected, " columns, got ", cells.size());
        if (first_row) {
            report.start = parse_iso(detail::trim(cells[0]));
            first_row = false;
        }
        const auto value = [&](std::size_t col) {
            const auto v = detail::parse_number<double>(detail::trim(cells[col]));
            if (!v) detail::fail("report csv line ", i + 1, ": malformed numeric cell '",
                                 std::string(detail::trim(cells[col])), "'");
            return *v;
        };
        report.predicted.push_back(value(1));
        if (with_actual) report.actual.push_back(value(2));
    }
    if (report.predicted.empty()) detail::fail("report csv: no data rows");
    report.horizon = static_cast<int>(report.predicted.size());
    return report;
}

} // namespace thermocast
