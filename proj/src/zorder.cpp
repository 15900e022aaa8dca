#include "orca/zorder.hpp"

#include <string>

#include "orca/error.hpp"

namespace orca {

namespace {

// Spreads the low 32 bits of x so bit i lands at position 2i.
std::uint64_t spread_bits(std::uint64_t x) {
    x &= 0xFFFFFFFFull;
    x = (x | (x << 16)) & 0x0000FFFF0000FFFFull;
    x = (x | (x << 8)) & 0x00FF00FF00FF00FFull;
    x = (x | (x << 4)) & 0x0F0F0F0F0F0F0F0Full;
    x = (x | (x << 2)) & 0x3333333333333333ull;
    x = (x | (x << 1)) & 0x5555555555555555ull;
    return x;
}

std::uint64_t compact_bits(std::uint64_t x) {
    x &= 0x5555555555555555ull;
    x = (x | (x >> 1)) & 0x3333333333333333ull;
    x = (x | (x >> 2)) & 0x0F0F0F0F0F0F0F0Full;
    x = (x | (x >> 4)) & 0x00FF00FF00FF00FFull;
    x = (x | (x >> 8)) & 0x0000FFFF0000FFFFull;
    x = (x | (x >> 16)) & 0x00000000FFFFFFFFull;
    return x;
}

} // namespace

std::size_t zorder_bit_depth(std::size_t rows, std::size_t cols) {
    const std::size_t largest = rows > cols ? rows : cols;
    if (largest < 2) {
        throw ContractError("z-order encoding needs a grid with at least two bands");
    }
    std::size_t bits = 0;
    std::size_t capacity = 1;
    while (capacity < largest) {
        capacity <<= 1;
        ++bits;
    }
    return 2 * bits;
}

std::uint64_t zorder_code(std::size_t row, std::size_t col, std::size_t bits_per_coord) {
    // Row bit precedes the column bit at each level, so the row lands in
    // the odd (higher) position of every pair.
    const std::uint64_t interleaved =
        (spread_bits(static_cast<std::uint64_t>(row)) << 1) |
        spread_bits(static_cast<std::uint64_t>(col));
    (void)bits_per_coord;
    return interleaved;
}

GridCell zorder_decode(std::uint64_t code, std::size_t bits_per_coord) {
    (void)bits_per_coord;
    GridCell cell;
    cell.row = static_cast<std::size_t>(compact_bits(code >> 1));
    cell.col = static_cast<std::size_t>(compact_bits(code));
    return cell;
}

std::vector<std::vector<std::uint8_t>> zorder_encode(const std::vector<GridCell>& locations,
                                                     const GridSpec& spec) {
    const std::size_t depth = zorder_bit_depth(spec.rows, spec.cols);
    std::vector<std::vector<std::uint8_t>> z;
    z.reserve(locations.size());
    for (const GridCell& loc : locations) {
        if (loc.row >= spec.rows || loc.col >= spec.cols) {
            throw RegionError("buoy cell (" + std::to_string(loc.row) + ", " +
                              std::to_string(loc.col) + ") outside grid " +
                              std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
        }
        const std::uint64_t code = zorder_code(loc.row, loc.col, depth / 2);
        std::vector<std::uint8_t> bits(depth);
        for (std::size_t b = 0; b < depth; ++b) {
            bits[b] = static_cast<std::uint8_t>((code >> (depth - 1 - b)) & 1ull);
        }
        z.push_back(std::move(bits));
    }
    return z;
}

} // namespace orca
