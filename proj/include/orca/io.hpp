#ifndef ORCA_IO_HPP
#define ORCA_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "orca/grid.hpp"

namespace orca {

// --- grid field format -------------------------------------------------
// One ASCII header line "GRIDFIELD v1 K J T role", then K*J*T
// little-endian 32-bit floats, row-major (k outer, j middle, t inner).

void write_grid_field(const std::string& path, const GridField& field);

// Reads and validates structure only (header counts vs payload size).
GridField read_grid_field(const std::string& path);

// Reads, then checks the field against the grid spec and required role.
GridField load_grid_field(const std::string& path, const GridSpec& spec, FieldRole role);

// --- weight file format ------------------------------------------------
// One ASCII header line "ORCAW v1", then per-array records: u32 name
// length, name bytes, u32 rank, u32 extents, then little-endian 32-bit
// float data. All integers little-endian.

struct NamedArrayF32 {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<float> data;
};

void write_weight_file(const std::string& path, const std::vector<NamedArrayF32>& arrays);
std::vector<NamedArrayF32> read_weight_file(const std::string& path);

// --- misc ----------------------------------------------------------------

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

std::uint64_t fnv1a(const void* data, std::size_t size);
std::uint64_t fnv1a_file(const std::string& path);

// Renders one K x J slice as a self-contained SVG heatmap: integer-scaled
// cell squares on a blue-to-red ramp, plus a legend bar and the printed
// min/max.
void write_heatmap_svg(const std::string& path, std::size_t rows, std::size_t cols,
                       const std::vector<float>& slice, const std::string& title,
                       std::size_t cell_px = 12);

} // namespace orca

#endif
