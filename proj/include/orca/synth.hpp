#ifndef ORCA_SYNTH_HPP
#define ORCA_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "orca/buoy.hpp"
#include "orca/grid.hpp"

namespace orca {

struct SynthSpec {
    std::uint64_t seed = 1;
    std::size_t rows = 8;      // K
    std::size_t cols = 8;      // J
    std::size_t steps = 32;    // T
    std::size_t buoys = 3;     // M
    std::size_t features = 3;  // F, observed-SWH plus wind features
    double interval_hours = 3.0;
};

struct SynthResult {
    GridSpec grid;
    BuoyDataset dataset;
    GridField truth;      // propagating superposed waves, nonnegative
    GridField surrogate;  // truth smoothed by a 3x3 spatial box filter
};

// Desk-scale stand-in for the real buoy + numerical-model corpora:
// deterministic for a fixed seed, buoy SWH is truth at M distinct cells
// plus N(0, 0.05^2) noise, and the surrogate mimics the numerical model's
// over-smooth behavior.
SynthResult synth_generate(const SynthSpec& spec);

// The names given to the first `count` synthetic features; index 0 is the
// observed-SWH feature WVHT.
std::vector<std::string> synth_feature_names(std::size_t count);

} // namespace orca

#endif
