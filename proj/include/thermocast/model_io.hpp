#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "thermocast/common.hpp"
#include "thermocast/dataset.hpp"
#include "thermocast/rnn.hpp"

namespace thermocast {

inline constexpr const char* kModelFormatName = "thermocast-model";
inline constexpr int kModelFormatVersion = 1;

// A trained model plus everything needed to use it: the fitted scaler and the
// config it was trained with. Serialized as JSON with all weight matrices as
// explicit row-major arrays; doubles round-trip bit-exactly.
struct ModelFile {
    RnnParams params;
    Scaler scaler{0.0, 1.0};
    TrainConfig config;
};

inline std::string serialize_model(const ModelFile& model) {
    const RnnParams& p = model.params;
    const int h = p.hidden_size;
    if (p.w_ih.size() != h || p.w_hh.rows() != h || p.w_hh.cols() != h || p.w_ho.size() != h || p.b_h.size() != h)
        detail::fail("serialize_model: parameter shapes inconsistent with hidden_size ", h);
    if (!p.w_ih.allFinite() || !p.w_hh.allFinite() || !p.w_ho.allFinite() || !p.b_h.allFinite() ||
        !std::isfinite(p.b_o))
        detail::fail("serialize_model: non-finite parameter entry");
    if (!(model.scaler.max > model.scaler.min)) detail::fail("serialize_model: degenerate scaler");

    const auto as_array = [](const auto& v) {
        std::vector<double> out(static_cast<std::size_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = v(i);
        return out;
    };
    std::vector<double> w_hh_rows;
    w_hh_rows.reserve(static_cast<std::size_t>(h) * static_cast<std::size_t>(h));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < h; ++c) w_hh_rows.push_back(p.w_hh(r, c));

    nlohmann::json j;
    j["format"] = kModelFormatName;
    j["version"] = kModelFormatVersion;
    j["hidden_size"] = h;
    j["weights"]["w_ih"] = as_array(p.w_ih);
    j["weights"]["w_hh"] = w_hh_rows;
    j["weights"]["w_ho"] = as_array(p.w_ho);
    j["weights"]["b_h"] = as_array(p.b_h);
    j["weights"]["b_o"] = p.b_o;
    j["scaler"]["min"] = model.scaler.min;
    j["scaler"]["max"] = model.scaler.max;
    j["train_config"]["hidden_size"] = model.config.hidden_size;
    j["train_config"]["learning_rate"] = model.config.learning_rate;
    j["train_config"]["dropout_keep_prob"] = model.config.dropout_keep_prob;
    j["train_config"]["epochs"] = model.config.epochs;
    j["train_config"]["seed"] = model.config.seed;
    j["train_config"]["loss"] = "mse";
    return j.dump(2) + "\n";
}

inline ModelFile deserialize_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        detail::fail("model file: not valid JSON: ", e.what());
    }
    try {
        if (!j.contains("format") || j.at("format").get<std::string>() != kModelFormatName)
            detail::fail("model file: not a ", kModelFormatName, " document");
        const int version = j.at("version").get<int>();
        if (version != kModelFormatVersion)
            detail::fail("model file: unsupported version ", version, " (expected ", kModelFormatVersion, ")");
        const int h = j.at("hidden_size").get<int>();
        if (h < 1) detail::fail("model file: hidden_size must be >= 1, got ", h);

        const auto read_array = [&](const char* name, std::size_t expected) {
            const auto values = j.at("weights").at(name).get<std::vector<double>>();
            if (values.size() != expected)
                detail::fail("model file: ", name, " has ", values.size(), " values, expected ", expected);
            return values;
        };
        const std::size_t hs = static_cast<std::size_t>(h);
        const auto w_ih = read_array("w_ih", hs);
        const auto w_hh = read_array("w_hh", hs * hs);
        const auto w_ho = read_array("w_ho", hs);
        const auto b_h = read_array("b_h", hs);

        ModelFile model;
        model.params.hidden_size = h;
        model.params.w_ih.resize(h);
        model.params.w_hh.resize(h, h);
        model.params.w_ho.resize(h);
        model.params.b_h.resize(h);
        for (int i = 0; i < h; ++i) model.params.w_ih(i) = w_ih[static_cast<std::size_t>(i)];
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < h; ++c)
                model.params.w_hh(r, c) = w_hh[static_cast<std::size_t>(r) * hs + static_cast<std::size_t>(c)];
        for (int i = 0; i < h; ++i) model.params.w_ho(i) = w_ho[static_cast<std::size_t>(i)];
        for (int i = 0; i < h; ++i) model.params.b_h(i) = b_h[static_cast<std::size_t>(i)];
        model.params.b_o = j.at("weights").at("b_o").get<double>();

        model.scaler.min = j.at("scaler").at("min").get<double>();
        model.scaler.max = j.at("scaler").at("max").get<double>();
        if (!(model.scaler.max > model.scaler.min)) detail::fail("model file: degenerate scaler range");

        const auto& tc = j.at("train_config");
        model.config.hidden_size = tc.at("hidden_size").get<int>();
        model.config.learning_rate = tc.at("learning_rate").get<double>();
        model.config.dropout_keep_prob = tc.at("dropout_keep_prob").get<double>();
        model.config.epochs = tc.at("epochs").get<int>();
        model.config.seed = tc.at("seed").get<std::uint64_t>();
        if (tc.at("loss").get<std::string>() != "mse")
            detail::fail("model file: unsupported loss '", tc.at("loss").get<std::string>(), "'");
        model.config.validate();
        if (model.config.hidden_size != h)
            detail::fail("model file: train_config.hidden_size ", model.config.hidden_size,
                         " disagrees with hidden_size ", h);
        return model;
    } catch (const nlohmann::json::exception& e) {
        detail::fail("model file: ", e.what());
    }
}

inline void save_model(const ModelFile& model, const std::filesystem::path& path) {
    write_text_file(path, serialize_model(model));
}

inline ModelFile load_model(const std::filesystem::path& path) {
    return deserialize_model(read_text_file(path));
}

} // namespace thermocast
