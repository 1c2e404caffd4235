#pragma once

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/config.hpp"
#include "thermocast/dataset.hpp"
#include "thermocast/forecast.hpp"
#include "thermocast/ingest.hpp"
#include "thermocast/metrics.hpp"
#include "thermocast/model_io.hpp"
#include "thermocast/plot.hpp"
#include "thermocast/rnn.hpp"

namespace thermocast {

namespace detail {

template <typename Fn>
int run_command(std::ostream& err, Fn&& fn) {
    try {
        fn();
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

inline TemperatureSeries load_series(const RunConfig& config) {
    if (config.input_path.empty()) fail("--input is required");
    const ParsedDocument doc = parse_meteoblue_csv(read_text_file(config.input_path));
    return extract_temperature_series(doc.records, doc.metadata);
}

} // namespace detail

inline int cmd_ingest(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&] {
        if (config.input_path.empty()) detail::fail("--input is required");
        const ParsedDocument doc = parse_meteoblue_csv(read_text_file(config.input_path));
        const SeriesMetadata& md = doc.metadata;
        out << "station: " << (md.city.empty() ? "(unknown)" : md.city) << " (lat " << fmt_double(md.latitude)
            << ", lon " << fmt_double(md.longitude) << ", alt " << fmt_double(md.altitude) << " m, UTC"
            << (md.utc_offset >= 0 ? "+" : "") << md.utc_offset << ")\n";
        out << "records: " << doc.records.size() << "\n";
        out << "range: " << format_iso(doc.records.front().timestamp(md.utc_offset)) << " .. "
            << format_iso(doc.records.back().timestamp(md.utc_offset)) << "\n";
        const auto breaks = scan_continuity(doc.records, md.utc_offset);
        if (breaks.empty()) {
            out << "gaps: none\n";
        } else {
            out << "gaps: " << breaks.size() << "\n";
            const std::size_t shown = std::min<std::size_t>(breaks.size(), 5);
            for (std::size_t i = 0; i < shown; ++i)
                out << "  record " << breaks[i].index << ": "
                    << fmt_double(std::chrono::duration<double, std::ratio<3600>>(breaks[i].delta).count())
                    << " h step\n";
            if (breaks.size() > shown) out << "  ... " << breaks.size() - shown << " more\n";
        }
        double lo = doc.records.front().temperature, hi = lo;
        for (const RawRecord& r : doc.records) {
            lo = std::min(lo, r.temperature);
            hi = std::max(hi, r.temperature);
        }
        out << "temperature: min " << fmt_double(lo) << " °C, max " << fmt_double(hi) << " °C\n";
    });
}

inline int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&] {
        if (config.model_path.empty()) detail::fail("--model is required");
        TemperatureSeries series;
        try {
            series = detail::load_series(config);
        } catch (const Error& e) {
            detail::fail("ingest: ", e.what());
        }

        SplitDataset split;
        Scaler scaler;
        std::size_t dropped = 0;
        try {
            BlockingResult grouped = group_blocks(make_pairs(series));
            dropped = grouped.dropped_pairs;
            split = split_dataset(std::move(grouped.blocks), config.split_ratio);
            scaler = fit_scaler(split.train);
        } catch (const Error& e) {
            detail::fail("dataset: ", e.what());
        }

        TrainReport report;
        try {
            report = train(scale_dataset(scaler, split), config.train_config());
        } catch (const Error& e) {
            detail::fail("train: ", e.what());
        }

        save_model({report.params, scaler, config.train_config()}, config.model_path);
        out << "blocks: " << split.train.size() << " train, " << split.test.size()
            << " test (dropped pairs: " << dropped << ")\n";
        out << "epoch 1 mean loss: " << fmt_double(report.epoch_losses.front()) << "\n";
        out << "epoch " << config.epochs << " mean loss: " << fmt_double(report.epoch_losses.back()) << "\n";
        out << "wall time: " << fmt_fixed(report.wall_seconds, 2) << " s\n";
        out << "model written: " << config.model_path << "\n";
    });
}

// Rolls a forecast over every test block (or just the first with
// --single-window): context is the 24 actual hours preceding the block,
// horizon is capped by the hours remaining in the test range, and the metric
// summary aggregates all forecast points.
inline int cmd_evaluate(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&] {
        if (config.model_path.empty()) detail::fail("--model is required");
        const ModelFile model = load_model(config.model_path);
        const TemperatureSeries series = detail::load_series(config);
        BlockingResult grouped = group_blocks(make_pairs(series));
        const std::size_t n_blocks = grouped.blocks.size();
        const SplitDataset split = split_dataset(std::move(grouped.blocks), config.split_ratio);
        const std::size_t n_train = split.train.size();
        const std::size_t last_target = DayBlock::kHours * n_blocks;  // last series index any block predicts

        std::vector<double> all_predicted, all_actual;
        std::size_t windows = 0;
        for (std::size_t i = 0; i < split.test.size(); ++i) {
            const std::size_t block_start = DayBlock::kHours * (n_train + i);  // index of the block's first x
            const std::size_t remaining = last_target - block_start;
            const int horizon = static_cast<int>(std::min<std::size_t>(
                static_cast<std::size_t>(config.horizon), remaining));
            const std::span<const double> context(series.values.data() + (block_start - 23), 24);
            const ForecastReport fc = rolling_forecast(model.params, model.scaler, context, horizon,
                                                       series.time_at(block_start + 1));
            for (int k = 0; k < horizon; ++k) {
                all_predicted.push_back(fc.predicted[static_cast<std::size_t>(k)]);
                all_actual.push_back(series.values[block_start + 1 + static_cast<std::size_t>(k)]);
            }
            ++windows;
            if (config.single_window) break;
        }

        const MetricSummary summary = summarize(all_predicted, all_actual);
        out << "windows: " << windows << "\n";
        out << "points: " << summary.n << "\n";
        out << "paper_mape: " << fmt_double(summary.mape) << "\n";
        out << "accuracy_percent: " << fmt_double(summary.accuracy_percent) << "\n";
        out << "mae_c: " << fmt_double(summary.mae_c) << "\n";
    });
}

inline int cmd_forecast(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&] {
        if (config.model_path.empty()) detail::fail("--model is required");
        const ModelFile model = load_model(config.model_path);
        const TemperatureSeries series = detail::load_series(config);
        const std::size_t context_len =
            std::min<std::size_t>(static_cast<std::size_t>(config.context_hours), series.values.size());
        const std::span<const double> context(series.values.data() + (series.values.size() - context_len),
                                              context_len);
        const ForecastReport report = rolling_forecast(model.params, model.scaler, context, config.horizon,
                                                       series.time_at(series.values.size()));
        const std::string csv = write_report_csv(report);
        if (config.out_path.empty()) {
            out << csv;
        } else {
            write_text_file(config.out_path, csv);
            out << "report written: " << config.out_path << "\n";
        }
    });
}

inline int cmd_export_plot(const RunConfig& config, std::ostream& out, std::ostream& err) {
    return detail::run_command(err, [&] {
        if (config.input_path.empty()) detail::fail("--input is required (path to a report CSV)");
        if (config.out_path.empty()) detail::fail("--out is required");
        const ForecastReport report = parse_report_csv(read_text_file(config.input_path));
        write_text_file(config.out_path, render_line_chart(report));
        out << "chart written: " << config.out_path << "\n";
    });
}

} // namespace thermocast
