#include "orca/grid.hpp"

#include <cmath>
#include <sstream>

namespace orca {

namespace {

// Number of lattice bands spanned, rejecting non-integral spans.
std::size_t band_count(const char* which, double span, double cell_deg) {
    const double q = span / cell_deg;
    const double rounded = std::round(q);
    if (std::abs(q - rounded) > 1e-6 * std::max(1.0, std::abs(q)) || rounded < 0.0) {
        std::ostringstream os;
        os << which << " span " << span << " is not an integral multiple of cell size " << cell_deg;
        throw RegionError(os.str());
    }
    return static_cast<std::size_t>(rounded) + 1;
}

} // namespace

GridSpec GridSpec::from_bounds(double lat_north, double lat_south, double lon_west,
                               double lon_east, double cell_deg) {
    if (cell_deg <= 0.0) {
        throw RegionError("cell size must be positive, got " + std::to_string(cell_deg));
    }
    if (lat_north < lat_south) {
        throw RegionError("lat_north must not lie south of lat_south");
    }
    if (lon_east < lon_west) {
        throw RegionError("lon_east must not lie west of lon_west");
    }
    GridSpec spec;
    spec.lat_north = lat_north;
    spec.lat_south = lat_south;
    spec.lon_west = lon_west;
    spec.lon_east = lon_east;
    spec.cell_deg = cell_deg;
    spec.rows = band_count("latitude", lat_north - lat_south, cell_deg);
    spec.cols = band_count("longitude", lon_east - lon_west, cell_deg);
    return spec;
}

void GridSpec::validate() const {
    if (rows < 1 || cols < 1) {
        throw RegionError("grid must have at least one row and one column");
    }
    if (cell_deg <= 0.0) {
        throw RegionError("cell size must be positive, got " + std::to_string(cell_deg));
    }
    const GridSpec derived = from_bounds(lat_north, lat_south, lon_west, lon_east, cell_deg);
    if (derived.rows != rows || derived.cols != cols) {
        throw RegionError("grid declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " cells but the bounds span " + std::to_string(derived.rows) + "x" +
                          std::to_string(derived.cols));
    }
}

GridCell cell_of(double lat, double lon, const GridSpec& spec) {
    if (lat > spec.lat_north || lat < spec.lat_south) {
        std::ostringstream os;
        os << "latitude " << lat << " outside [" << spec.lat_south << ", " << spec.lat_north << "]";
        throw RegionError(os.str());
    }
    if (lon < spec.lon_west || lon > spec.lon_east) {
        std::ostringstream os;
        os << "longitude " << lon << " outside [" << spec.lon_west << ", " << spec.lon_east << "]";
        throw RegionError(os.str());
    }
    // Nearest center with half-way ties toward index 0: ceil(q - 1/2).
    const double qr = (spec.lat_north - lat) / spec.cell_deg;
    const double qc = (lon - spec.lon_west) / spec.cell_deg;
    const long long r = static_cast<long long>(std::ceil(qr - 0.5));
    const long long c = static_cast<long long>(std::ceil(qc - 0.5));
    GridCell cell;
    cell.row = static_cast<std::size_t>(std::min<long long>(std::max<long long>(r, 0),
                                                            static_cast<long long>(spec.rows) - 1));
    cell.col = static_cast<std::size_t>(std::min<long long>(std::max<long long>(c, 0),
                                                            static_cast<long long>(spec.cols) - 1));
    return cell;
}

std::string to_string(FieldRole role) {
    switch (role) {
        case FieldRole::truth: return "truth";
        case FieldRole::surrogate: return "surrogate";
        case FieldRole::estimate: return "estimate";
    }
    return "truth";
}

FieldRole field_role_from_string(const std::string& s) {
    if (s == "truth") return FieldRole::truth;
    if (s == "surrogate") return FieldRole::surrogate;
    if (s == "estimate") return FieldRole::estimate;
    throw FormatError("unknown grid field role '" + s + "'");
}

} // namespace orca
