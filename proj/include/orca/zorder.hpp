#ifndef ORCA_ZORDER_HPP
#define ORCA_ZORDER_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "orca/grid.hpp"

namespace orca {

// Bits per interleaved code for a rows x cols grid: two coordinates at
// ceil(log2(max(rows, cols))) bits each.
std::size_t zorder_bit_depth(std::size_t rows, std::size_t cols);

// Morton code of (row, col): row and column bits interleaved
// most-significant-first, with the row bit ahead of the column bit at
// every level.
std::uint64_t zorder_code(std::size_t row, std::size_t col, std::size_t bits_per_coord);

// Inverse of zorder_code.
GridCell zorder_decode(std::uint64_t code, std::size_t bits_per_coord);

// Z rows for the buoy locations: each row holds the A code bits, MSB
// first, as 0/1 bytes.
std::vector<std::vector<std::uint8_t>> zorder_encode(const std::vector<GridCell>& locations,
                                                     const GridSpec& spec);

} // namespace orca

#endif
