#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "thermocast/cli.hpp"
#include "thermocast/config.hpp"

namespace {

struct FlagValues {
    std::string config_path;
    std::string input, model, out;
    int hidden = 0, epochs = 0, horizon = 0;
    double lr = 0.0, keep_prob = 0.0, split = 0.0;
    std::uint64_t seed = 0;
    bool single_window = false;
};

void add_options(CLI::App* cmd, FlagValues& f) {
    cmd->add_option("--config", f.config_path, "flat `key = value` config file");
    cmd->add_option("--input", f.input, "input file (meteoblue CSV; report CSV for export-plot)");
    cmd->add_option("--model", f.model, "model file path");
    cmd->add_option("--epochs", f.epochs, "training epochs (default 1000)");
    cmd->add_option("--hidden", f.hidden, "hidden units (default 100)");
    cmd->add_option("--lr", f.lr, "learning rate (default 0.001)");
    cmd->add_option("--keep-prob", f.keep_prob, "dropout keep probability (default 0.5)");
    cmd->add_option("--split", f.split, "train fraction of blocks (default 0.7)");
    cmd->add_option("--horizon", f.horizon, "forecast hours (default 48)");
    cmd->add_option("--seed", f.seed, "rng seed (default 0)");
    cmd->add_flag("--single-window", f.single_window, "evaluate only the first test window");
    cmd->add_option("--out", f.out, "output file (default stdout where applicable)");
}

thermocast::RunConfig resolve(CLI::App* cmd, const FlagValues& f) {
    thermocast::CliOverrides overrides;
    if (cmd->count("--input")) overrides.input_path = f.input;
    if (cmd->count("--model")) overrides.model_path = f.model;
    if (cmd->count("--out")) overrides.out_path = f.out;
    if (cmd->count("--hidden")) overrides.hidden_size = f.hidden;
    if (cmd->count("--lr")) overrides.learning_rate = f.lr;
    if (cmd->count("--keep-prob")) overrides.dropout_keep_prob = f.keep_prob;
    if (cmd->count("--epochs")) overrides.epochs = f.epochs;
    if (cmd->count("--split")) overrides.split_ratio = f.split;
    if (cmd->count("--horizon")) overrides.horizon = f.horizon;
    if (cmd->count("--seed")) overrides.seed = f.seed;
    if (cmd->count("--single-window")) overrides.single_window = true;
    std::optional<std::string> config_text;
    if (cmd->count("--config")) config_text = thermocast::read_text_file(f.config_path);
    return thermocast::resolve_config(config_text, overrides);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hourly temperature forecasting: ingest, train, evaluate, forecast, export-plot"};
    app.require_subcommand(1);
    FlagValues f;
    CLI::App* ingest = app.add_subcommand("ingest", "summarize a meteoblue CSV export");
    CLI::App* train = app.add_subcommand("train", "train a model and write it to --model");
    CLI::App* evaluate = app.add_subcommand("evaluate", "score rolling forecasts over the test split");
    CLI::App* forecast = app.add_subcommand("forecast", "write a forecast report CSV");
    CLI::App* export_plot = app.add_subcommand("export-plot", "render a report CSV as an SVG chart");
    for (CLI::App* cmd : {ingest, train, evaluate, forecast, export_plot}) add_options(cmd, f);

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) return thermocast::cmd_ingest(resolve(ingest, f), std::cout, std::cerr);
        if (train->parsed()) return thermocast::cmd_train(resolve(train, f), std::cout, std::cerr);
        if (evaluate->parsed()) return thermocast::cmd_evaluate(resolve(evaluate, f), std::cout, std::cerr);
        if (forecast->parsed()) return thermocast::cmd_forecast(resolve(forecast, f), std::cout, std::cerr);
        if (export_plot->parsed()) return thermocast::cmd_export_plot(resolve(export_plot, f), std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
