#include "orca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "orca/error.hpp"
#include "orca/rng.hpp"

namespace orca {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

struct WaveComponent {
    double amplitude;
    double spatial_freq;
    double dir_col;  // unit direction, column component
    double dir_row;
    double angular_speed;
    double phase;
};

} // namespace

std::vector<std::string> synth_feature_names(std::size_t count) {
    static const std::vector<std::string> pool = {"WVHT", "WSPD", "WDIR", "GST",
                                                  "APD",  "PRES", "ATMP", "WTMP"};
    if (count > pool.size()) {
        throw ContractError("synthetic generator supports at most " +
                            std::to_string(pool.size()) + " features");
    }
    return {pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(count)};
}

SynthResult synth_generate(const SynthSpec& spec) {
    if (spec.buoys == 0) {
        throw ContractError("at least one buoy is required");
    }
    if (spec.buoys > spec.rows * spec.cols) {
        throw CapacityError("cannot place " + std::to_string(spec.buoys) + " buoys on " +
                            std::to_string(spec.rows) + "x" + std::to_string(spec.cols) +
                            " cells");
    }
    if (spec.features < 2) {
        throw ContractError("need at least two features (observed SWH plus one wind feature)");
    }
    if (spec.steps == 0) {
        throw ContractError("need at least one time step");
    }

    // Anchor the synthetic region at the same northwest corner as the
    // study region; extent follows the requested cell counts.
    GridSpec grid;
    grid.rows = spec.rows;
    grid.cols = spec.cols;
    grid.cell_deg = 0.5;
    grid.lat_north = 32.0;
    grid.lon_west = -98.0;
    grid.lat_south = grid.lat_north - 0.5 * static_cast<double>(spec.rows - 1);
    grid.lon_east = grid.lon_west + 0.5 * static_cast<double>(spec.cols - 1);

    Rng wave_rng(derive_seed(spec.seed, 0));
    const std::size_t n_waves = 2 + wave_rng.below(3);  // 2..4 disturbances
    std::vector<WaveComponent> waves(n_waves);
    const double largest = static_cast<double>(std::max(spec.rows, spec.cols));
    for (auto& w : waves) {
        w.amplitude = wave_rng.uniform(0.3, 1.0);
        const double wavelength = wave_rng.uniform(4.0, std::max(6.0, largest));
        w.spatial_freq = kTwoPi / wavelength;
        const double theta = wave_rng.uniform(0.0, kTwoPi);
        w.dir_col = std::cos(theta);
        w.dir_row = std::sin(theta);
        w.angular_speed = wave_rng.uniform(0.2, 1.0);
        w.phase = wave_rng.uniform(0.0, kTwoPi);
    }

    // Truth field: superposed propagating disturbances, shifted so the
    // minimum sits at a small positive baseline.
    GridField truth;
    truth.rows = spec.rows;
    truth.cols = spec.cols;
    truth.steps = spec.steps;
    truth.role = FieldRole::truth;
    truth.values.assign(spec.rows * spec.cols * spec.steps, 0.0f);
    double lowest = 0.0;
    std::vector<double> raw(truth.values.size());
    for (std::size_t k = 0; k < spec.rows; ++k) {
        for (std::size_t j = 0; j < spec.cols; ++j) {
            for (std::size_t t = 0; t < spec.steps; ++t) {
                double v = 0.0;
                for (const auto& w : waves) {
                    const double along = w.dir_col * static_cast<double>(j) +
                                         w.dir_row * static_cast<double>(k);
                    v += w.amplitude * std::sin(w.spatial_freq * along -
                                                w.angular_speed * static_cast<double>(t) + w.phase);
                }
                raw[(k * spec.cols + j) * spec.steps + t] = v;
                lowest = std::min(lowest, v);
            }
        }
    }
    const double baseline = 0.25;
    const double offset = baseline - lowest;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        truth.values[i] = static_cast<float>(raw[i] + offset);
    }

    // Surrogate: 3x3 box filter with replicated edges, applied per step.
    GridField surrogate = truth;
    surrogate.role = FieldRole::surrogate;
    for (std::size_t k = 0; k < spec.rows; ++k) {
        for (std::size_t j = 0; j < spec.cols; ++j) {
            for (std::size_t t = 0; t < spec.steps; ++t) {
                double acc = 0.0;
                for (int dk = -1; dk <= 1; ++dk) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const std::size_t kk = static_cast<std::size_t>(std::clamp<long long>(
                            static_cast<long long>(k) + dk, 0,
                            static_cast<long long>(spec.rows) - 1));
                        const std::size_t jj = static_cast<std::size_t>(std::clamp<long long>(
                            static_cast<long long>(j) + dj, 0,
                            static_cast<long long>(spec.cols) - 1));
                        acc += truth.at(kk, jj, t);
                    }
                }
                surrogate.at(k, j, t) = static_cast<float>(acc / 9.0);
            }
        }
    }

    // Buoy placement: M distinct seeded cells.
    Rng place_rng(derive_seed(spec.seed, 1));
    std::set<std::size_t> taken;
    std::vector<GridCell> locations;
    while (locations.size() < spec.buoys) {
        const std::size_t flat = place_rng.below(static_cast<std::uint32_t>(spec.rows * spec.cols));
        if (taken.insert(flat).second) {
            locations.push_back(GridCell{flat / spec.cols, flat % spec.cols});
        }
    }

    // Observations: SWH is truth at the buoy cell plus noise; the other
    // features are plausible seeded companions (wind tracks the waves).
    const std::vector<std::string> names = synth_feature_names(spec.features);
    Rng obs_rng(derive_seed(spec.seed, 2));
    const std::size_t M = spec.buoys;
    const std::size_t T = spec.steps;
    const std::size_t F = spec.features;
    std::vector<float> values(F * M * T, 0.0f);
    std::vector<std::uint8_t> missing(F * M * T, 0);
    for (std::size_t m = 0; m < M; ++m) {
        const double base_dir = obs_rng.uniform(0.0, 360.0);
        for (std::size_t t = 0; t < T; ++t) {
            const double swh_true = truth.at(locations[m].row, locations[m].col, t);
            const double swh_obs = std::max(0.0, swh_true + obs_rng.normal(0.0, 0.05));
            values[(0 * M + m) * T + t] = static_cast<float>(swh_obs);
            for (std::size_t f = 1; f < F; ++f) {
                double v = 0.0;
                if (names[f] == "WSPD") {
                    v = std::max(0.0, 4.0 + 3.0 * swh_true + obs_rng.normal(0.0, 0.3));
                } else if (names[f] == "WDIR") {
                    v = std::fmod(base_dir + 15.0 * std::sin(0.15 * static_cast<double>(t)) +
                                      obs_rng.normal(0.0, 4.0) + 720.0,
                                  360.0);
                } else if (names[f] == "GST") {
                    v = std::max(0.0, 5.0 + 3.6 * swh_true + obs_rng.normal(0.0, 0.4));
                } else {
                    v = 10.0 + 2.0 * swh_true + obs_rng.normal(0.0, 0.5);
                }
                values[(f * M + m) * T + t] = static_cast<float>(v);
            }
        }
    }

    BuoyDataset dataset(names, "WVHT", std::move(values), std::move(missing), locations, T,
                        spec.interval_hours, grid);
    return SynthResult{grid, std::move(dataset), std::move(truth), std::move(surrogate)};
}

} // namespace orca
