#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/rnn.hpp"

namespace thermocast {

// Settings for the command-line pipeline. Precedence per field:
// command-line flag > config-file value > the defaults below.
struct RunConfig {
    std::string input_path;
    std::string model_path;
    std::string out_path;  // empty means stdout where a stream is accepted
    int hidden_size = 100;
    double learning_rate = 1e-3;
    double dropout_keep_prob = 0.5;
    int epochs = 1000;
    double split_ratio = 0.7;
    int horizon = 48;
    std::uint64_t seed = 0;
    int context_hours = 24;
    bool single_window = false;

    TrainConfig train_config() const {
        return {hidden_size, learning_rate, dropout_keep_prob, epochs, seed};
    }

    void validate() const {
        train_config().validate();
        if (!(split_ratio > 0.0 && split_ratio < 1.0))
            detail::fail("split_ratio must lie in (0, 1), got ", fmt_double(split_ratio));
        if (horizon < 1) detail::fail("horizon must be >= 1, got ", horizon);
        if (context_hours < 1) detail::fail("context_hours must be >= 1, got ", context_hours);
    }
};

// Flat `key = value` file; blank lines and lines starting with '#' are
// skipped. Keys are the RunConfig field names.
inline std::vector<std::pair<std::string, std::string>> parse_config_file(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> entries;
    const auto lines = detail::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = detail::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            detail::fail("config line ", i + 1, ": expected 'key = value', got '", std::string(line), "'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) detail::fail("config line ", i + 1, ": empty key");
        entries.emplace_back(std::string(key), std::string(value));
    }
    return entries;
}

inline void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value) {
    const auto as_int = [&] {
        const auto v = detail::parse_number<int>(value);
        if (!v) detail::fail("config key '", std::string(key), "': malformed integer '", std::string(value), "'");
        return *v;
    };
    const auto as_double = [&] {
        const auto v = detail::parse_number<double>(value);
        if (!v) detail::fail("config key '", std::string(key), "': malformed number '", std::string(value), "'");
        return *v;
    };
    const auto as_bool = [&] {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        detail::fail("config key '", std::string(key), "': expected true/false, got '", std::string(value), "'");
    };

    if (key == "input_path") config.input_path = std::string(value);
    else if (key == "model_path") config.model_path = std::string(value);
    else if (key == "out_path") config.out_path = std::string(value);
    else if (key == "hidden_size") config.hidden_size = as_int();
    else if (key == "learning_rate") config.learning_rate = as_double();
    else if (key == "dropout_keep_prob") config.dropout_keep_prob = as_double();
    else if (key == "epochs") config.epochs = as_int();
    else if (key == "split_ratio") config.split_ratio = as_double();
    else if (key == "horizon") config.horizon = as_int();
    else if (key == "seed") {
        const auto v = detail::parse_number<std::uint64_t>(value);
        if (!v) detail::fail("config key 'seed': malformed integer '", std::string(value), "'");
        config.seed = *v;
    }
    else if (key == "context_hours") config.context_hours = as_int();
    else if (key == "single_window") config.single_window = as_bool();
    else detail::fail("unknown config key '", std::string(key), "'");
}

// Values set on the command line; unset fields defer to the config file and
// then to the defaults.
struct CliOverrides {
    std::optional<std::string> input_path;
    std::optional<std::string> model_path;
    std::optional<std::string> out_path;
    std::optional<int> hidden_size;
    std::optional<double> learning_rate;
    std::optional<double> dropout_keep_prob;
    std::optional<int> epochs;
    std::optional<double> split_ratio;
    std::optional<int> horizon;
    std::optional<std::uint64_t> seed;
    std::optional<bool> single_window;
};

inline RunConfig resolve_config(const std::optional<std::string>& config_text, const CliOverrides& cli) {
    RunConfig config;
    if (config_text)
        for (const auto& [key, value] : parse_config_file(*config_text)) apply_config_entry(config, key, value);
    if (cli.input_path) config.input_path = *cli.input_path;
    if (cli.model_path) config.model_path = *cli.model_path;
    if (cli.out_path) config.out_path = *cli.out_path;
    if (cli.hidden_size) config.hidden_size = *cli.hidden_size;
    if (cli.learning_rate) config.learning_rate = *cli.learning_rate;
    if (cli.dropout_keep_prob) config.dropout_keep_prob = *cli.dropout_keep_prob;
    if (cli.epochs) config.epochs = *cli.epochs;
    if (cli.split_ratio) config.split_ratio = *cli.split_ratio;
    if (cli.horizon) config.horizon = *cli.horizon;
    if (cli.seed) config.seed = *cli.seed;
    if (cli.single_window) config.single_window = *cli.single_window;
    config.validate();
    return config;
}

} // namespace thermocast
