#ifndef ORCA_BUOY_HPP
#define ORCA_BUOY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "orca/grid.hpp"

namespace orca {

// One parsed buoy file, already mapped onto the regular observation
// lattice. values/missing are F x T' row-major.
struct BuoyRecord {
    std::vector<std::string> feature_names;
    std::size_t steps = 0;
    std::vector<float> values;
    std::vector<std::uint8_t> missing;
    std::int64_t start_minutes = 0;  // lattice anchor, minutes since 1970-01-01

    float at(std::size_t f, std::size_t t) const { return values[f * steps + t]; }
    bool is_missing(std::size_t f, std::size_t t) const { return missing[f * steps + t] != 0; }
};

// Parses the artifact's buoy text format: two '#' header lines (names,
// units), then whitespace-delimited rows of YY MM DD hh mm followed by
// one value per feature. Rows are snapped to a lattice of
// `interval_hours` anchored at the first timestamp by nearest-timestamp
// selection. Sentinels 99.0 / 999.0 / 9999.0 mark missing values, which
// are filled by last-observation-carried-forward (leading gaps take the
// first observation).
BuoyRecord parse_buoy_text(const std::string& text, double interval_hours);

// Observations of F features from M buoys over T lattice steps.
class BuoyDataset {
public:
    // Checked constructor: locations must be in-grid, exactly one feature
    // must be the observed-SWH feature, and its non-missing values must be
    // nonnegative.
    BuoyDataset(std::vector<std::string> feature_names, std::string swh_feature_name,
                std::vector<float> values, std::vector<std::uint8_t> missing,
                std::vector<GridCell> locations, std::size_t steps, double interval_hours,
                const GridSpec& spec);

    // Assembles per-buoy records (identical features and step counts
    // required) into one dataset.
    static BuoyDataset from_records(const std::vector<BuoyRecord>& records,
                                    const std::vector<GridCell>& locations,
                                    const std::string& swh_feature_name, double interval_hours,
                                    const GridSpec& spec);

    std::size_t num_features() const { return feature_names_.size(); }
    std::size_t num_buoys() const { return locations_.size(); }
    std::size_t num_steps() const { return steps_; }
    std::size_t swh_feature() const { return swh_index_; }
    double interval_hours() const { return interval_hours_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<GridCell>& locations() const { return locations_; }

    float at(std::size_t f, std::size_t m, std::size_t t) const {
        return values_[(f * num_buoys() + m) * steps_ + t];
    }
    bool is_missing(std::size_t f, std::size_t m, std::size_t t) const {
        return missing_[(f * num_buoys() + m) * steps_ + t] != 0;
    }
    const std::vector<float>& values() const { return values_; }
    const std::vector<std::uint8_t>& missing() const { return missing_; }

private:
    std::vector<std::string> feature_names_;
    std::size_t swh_index_ = 0;
    std::vector<float> values_;          // F x M x T
    std::vector<std::uint8_t> missing_;  // F x M x T
    std::vector<GridCell> locations_;
    std::size_t steps_ = 0;
    double interval_hours_ = 3.0;
};

// The NDBC-style feature codes this artifact understands.
bool is_known_feature(const std::string& name);

// Long-form description for prompt text, e.g. WDIR -> "wind direction".
std::string feature_long_name(const std::string& code);

} // namespace orca

#endif
