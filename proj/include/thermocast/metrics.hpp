#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "thermocast/common.hpp"

namespace thermocast {

// Aggregate forecast error over n points.
struct MetricSummary {
    double mape = 0.0;              // mean |(P_i - T_i) / T_i|, dimensionless
    double accuracy_percent = 0.0;  // 100 * (1 - mape)
    double mae_c = 0.0;             // mean |P_i - T_i| in °C
    std::size_t n = 0;
};

// Relative error is meaningless when the actual temperature sits near 0 °C;
// below this threshold the metric refuses to divide.
inline constexpr double kMapeDenominatorGuardC = 0.5;

namespace detail {
inline void check_metric_lengths(std::span<const double> predicted, std::span<const double> actual) {
    if (predicted.size() != actual.size())
        fail("length mismatch: ", predicted.size(), " predicted vs ", actual.size(), " actual");
    if (predicted.empty()) fail("need at least one point");
}
} // namespace detail

// Mean absolute relative error (1/n) * sum |(P_i - T_i) / T_i|. A percentage
// style error despite the historical "MAE" label; both are reported.
inline double paper_mape(std::span<const double> predicted, std::span<const double> actual) {
    detail::check_metric_lengths(predicted, actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (std::abs(actual[i]) < kMapeDenominatorGuardC)
            detail::fail("denominator guard violated at index ", i, ": |actual| = ", fmt_double(std::abs(actual[i])),
                         " °C < ", fmt_double(kMapeDenominatorGuardC), " °C");
        sum += std::abs((predicted[i] - actual[i]) / actual[i]);
    }
    return sum / static_cast<double>(predicted.size());
}

inline double accuracy_percent(std::span<const double> predicted, std::span<const double> actual) {
    return 100.0 * (1.0 - paper_mape(predicted, actual));
}

inline double mae_celsius(std::span<const double> predicted, std::span<const double> actual) {
    detail::check_metric_lengths(predicted, actual);
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(predicted[i] - actual[i]);
    return sum / static_cast<double>(predicted.size());
}

inline MetricSummary summarize(std::span<const double> predicted, std::span<const double> actual) {
    MetricSummary s;
    s.mape = paper_mape(predicted, actual);
    s.accuracy_percent = 100.0 * (1.0 - s.mape);
    s.mae_c = mae_celsius(predicted, actual);
    s.n = predicted.size();
    return s;
}

} // namespace thermocast
