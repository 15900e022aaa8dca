#ifndef ORCA_GRID_HPP
#define ORCA_GRID_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "orca/error.hpp"

namespace orca {

// Rectangular lat/lon lattice. Row 0 is the northernmost band, column 0
// the westernmost; cell (k, j) is centered at
//   lat = lat_north - k * cell_deg,  lon = lon_west + j * cell_deg.
// Longitudes are signed degrees east (west of Greenwich is negative).
struct GridSpec {
    std::size_t rows = 0;  // K
    std::size_t cols = 0;  // J
    double lat_north = 0.0;
    double lat_south = 0.0;
    double lon_west = 0.0;
    double lon_east = 0.0;
    double cell_deg = 0.0;

    // Derives rows/cols from the bounds and validates integrality.
    static GridSpec from_bounds(double lat_north, double lat_south, double lon_west,
                                double lon_east, double cell_deg);

    // Checks the row/col counts against the bounds.
    void validate() const;

    bool contains(double lat, double lon) const {
        return lat <= lat_north && lat >= lat_south && lon >= lon_west && lon <= lon_east;
    }
};

struct GridCell {
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const GridCell&) const = default;
};

// Nearest-cell-center assignment; exact half-way ties round toward
// row/col 0. Out-of-region coordinates are rejected.
GridCell cell_of(double lat, double lon, const GridSpec& spec);

enum class FieldRole { truth, surrogate, estimate };

std::string to_string(FieldRole role);
FieldRole field_role_from_string(const std::string& s);

// K x J x T field of SWH values in meters, row-major (k, j, t).
struct GridField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t steps = 0;
    FieldRole role = FieldRole::truth;
    std::vector<float> values;

    float at(std::size_t k, std::size_t j, std::size_t t) const {
        return values[(k * cols + j) * steps + t];
    }
    float& at(std::size_t k, std::size_t j, std::size_t t) {
        return values[(k * cols + j) * steps + t];
    }

    void validate_against(const GridSpec& spec) const {
        if (rows != spec.rows || cols != spec.cols) {
            throw FormatError("grid field is " + std::to_string(rows) + "x" + std::to_string(cols) +
                              " but the grid spec declares " + std::to_string(spec.rows) + "x" +
                              std::to_string(spec.cols));
        }
        if (values.size() != rows * cols * steps) {
            throw FormatError("grid field value count " + std::to_string(values.size()) +
                              " does not match " + std::to_string(rows) + "x" +
                              std::to_string(cols) + "x" + std::to_string(steps));
        }
    }
};

} // namespace orca

#endif
