#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "thermocast/common.hpp"
#include "thermocast/ingest.hpp"

namespace thermocast {

// One-step sample: predict y, the reading one hour after x.
struct SamplePair {
    double x = 0.0;
    double y = 0.0;
};

// 24 consecutive one-step pairs; the training sequence unit. Within a block
// pairs[i].y == pairs[i+1].x.
struct DayBlock {
    static constexpr std::size_t kHours = 24;
    std::array<SamplePair, kHours> pairs{};
};

struct BlockingResult {
    std::vector<DayBlock> blocks;
    std::size_t dropped_pairs = 0;  // trailing remainder shorter than one block
};

// Chronological partition: every train block precedes every test block.
struct SplitDataset {
    std::vector<DayBlock> train;
    std::vector<DayBlock> test;
    double split_ratio = 0.7;
};

// Invertible min-max map from °C into [0, 1], fitted on training data only.
// Test-side values may fall outside [0, 1]; that is fine downstream.
struct Scaler {
    double min = 0.0;
    double max = 1.0;
};

inline double scale(const Scaler& s, double celsius) { return (celsius - s.min) / (s.max - s.min); }

inline double invert_scale(const Scaler& s, double scaled) { return s.min + scaled * (s.max - s.min); }

inline std::vector<SamplePair> make_pairs(const TemperatureSeries& series) {
    if (series.values.size() < 2)
        detail::fail("series too short to window: need at least 2 values, got ", series.values.size());
    std::vector<SamplePair> pairs(series.values.size() - 1);
    for (std::size_t i = 0; i + 1 < series.values.size(); ++i)
        pairs[i] = {series.values[i], series.values[i + 1]};
    return pairs;
}

inline BlockingResult group_blocks(const std::vector<SamplePair>& pairs) {
    BlockingResult out;
    const std::size_t n_blocks = pairs.size() / DayBlock::kHours;
    out.blocks.resize(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b)
        for (std::size_t s = 0; s < DayBlock::kHours; ++s)
            out.blocks[b].pairs[s] = pairs[b * DayBlock::kHours + s];
    out.dropped_pairs = pairs.size() - n_blocks * DayBlock::kHours;
    return out;
}

inline SplitDataset split_dataset(std::vector<DayBlock> blocks, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) detail::fail("split ratio must lie in (0, 1), got ", fmt_double(ratio));
    if (blocks.empty()) detail::fail("cannot split zero blocks");
    const std::size_t n = blocks.size();
    const auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (n_train == 0)
        detail::fail("split leaves the train side empty: ", n, " blocks at ratio ", fmt_double(ratio));
    if (n_train == n)
        detail::fail("split leaves the test side empty: ", n, " blocks at ratio ", fmt_double(ratio));
    SplitDataset out;
    out.split_ratio = ratio;
    out.test.assign(blocks.begin() + static_cast<std::ptrdiff_t>(n_train), blocks.end());
    blocks.resize(n_train);
    out.train = std::move(blocks);
    return out;
}

inline Scaler fit_scaler(const std::vector<DayBlock>& train) {
    if (train.empty()) detail::fail("cannot fit scaler on zero blocks");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const DayBlock& block : train) {
        for (const SamplePair& p : block.pairs) {
            lo = std::min(lo, std::min(p.x, p.y));
            hi = std::max(hi, std::max(p.x, p.y));
        }
    }
    if (!(hi > lo)) detail::fail("degenerate value range: min == max == ", fmt_double(lo));
    return {lo, hi};
}

inline DayBlock scale_block(const Scaler& s, const DayBlock& block) {
    DayBlock out;
    for (std::size_t i = 0; i < DayBlock::kHours; ++i)
        out.pairs[i] = {scale(s, block.pairs[i].x), scale(s, block.pairs[i].y)};
    return out;
}

inline SplitDataset scale_dataset(const Scaler& s, const SplitDataset& dataset) {
    SplitDataset out;
    out.split_ratio = dataset.split_ratio;
    out.train.reserve(dataset.train.size());
    out.test.reserve(dataset.test.size());
    for (const DayBlock& b : dataset.train) out.train.push_back(scale_block(s, b));
    for (const DayBlock& b : dataset.test) out.test.push_back(scale_block(s, b));
    return out;
}

} // namespace thermocast
