#pragma once

#include <cstdint>
#include <random>

namespace thermocast {

// mt19937_64 with a fixed 53-bit mapping to doubles, so a seed reproduces the
// same stream on every standard library.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1)
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

} // namespace thermocast
