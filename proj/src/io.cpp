#include "orca/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "orca/error.hpp"

namespace orca {

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xFF),
                          static_cast<unsigned char>((v >> 8) & 0xFF),
                          static_cast<unsigned char>((v >> 16) & 0xFF),
                          static_cast<unsigned char>((v >> 24) & 0xFF)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) {
        throw FormatError(std::string("truncated file while reading ") + what);
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

void put_f32_block(std::ostream& os, const std::vector<float>& vs) {
    for (float v : vs) {
        put_f32(os, v);
    }
}

std::vector<float> get_f32_block(std::istream& is, std::size_t count, const char* what) {
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = get_u32(is, what);
        std::memcpy(&out[i], &bits, 4);
    }
    return out;
}

void ensure_parent_dir(const std::string& path) {
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
    }
}

} // namespace

void write_grid_field(const std::string& path, const GridField& field) {
    if (field.values.size() != field.rows * field.cols * field.steps) {
        throw FormatError("grid field payload does not match its declared dimensions");
    }
    ensure_parent_dir(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    os << "GRIDFIELD v1 " << field.rows << ' ' << field.cols << ' ' << field.steps << ' '
       << to_string(field.role) << '\n';
    put_f32_block(os, field.values);
    if (!os) {
        throw IoError("short write to '" + path + "'");
    }
}

GridField read_grid_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string header;
    if (!std::getline(is, header)) {
        throw FormatError("'" + path + "' is missing its GRIDFIELD header");
    }
    std::istringstream hs(header);
    std::string magic, version, role_name;
    std::size_t rows = 0, cols = 0, steps = 0;
    hs >> magic >> version >> rows >> cols >> steps >> role_name;
    if (magic != "GRIDFIELD" || version != "v1" || !hs) {
        throw FormatError("'" + path + "' does not declare GRIDFIELD v1");
    }
    GridField field;
    field.rows = rows;
    field.cols = cols;
    field.steps = steps;
    field.role = field_role_from_string(role_name);
    field.values = get_f32_block(is, rows * cols * steps, "grid field payload");
    return field;
}

GridField load_grid_field(const std::string& path, const GridSpec& spec, FieldRole role) {
    GridField field = read_grid_field(path);
    field.validate_against(spec);
    if (field.role != role) {
        throw FormatError("'" + path + "' holds a " + to_string(field.role) +
                          " field, expected " + to_string(role));
    }
    return field;
}

void write_weight_file(const std::string& path, const std::vector<NamedArrayF32>& arrays) {
    ensure_parent_dir(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    os << "ORCAW v1\n";
    for (const auto& a : arrays) {
        std::size_t numel = 1;
        for (std::size_t e : a.shape) {
            numel *= e;
        }
        if (numel != a.data.size()) {
            throw FormatError("array '" + a.name + "' data does not match its shape");
        }
        put_u32(os, static_cast<std::uint32_t>(a.name.size()));
        os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        put_u32(os, static_cast<std::uint32_t>(a.shape.size()));
        for (std::size_t e : a.shape) {
            put_u32(os, static_cast<std::uint32_t>(e));
        }
        put_f32_block(os, a.data);
    }
    if (!os) {
        throw IoError("short write to '" + path + "'");
    }
}

std::vector<NamedArrayF32> read_weight_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::string header;
    if (!std::getline(is, header) || header != "ORCAW v1") {
        throw FormatError("'" + path + "' does not declare ORCAW v1");
    }
    std::vector<NamedArrayF32> arrays;
    while (is.peek() != std::char_traits<char>::eof()) {
        NamedArrayF32 a;
        const std::uint32_t name_len = get_u32(is, "array name length");
        a.name.resize(name_len);
        if (!is.read(a.name.data(), name_len)) {
            throw FormatError("truncated array name in '" + path + "'");
        }
        const std::uint32_t rank = get_u32(is, "array rank");
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const std::uint32_t e = get_u32(is, "array extent");
            a.shape.push_back(e);
            numel *= e;
        }
        a.data = get_f32_block(is, numel, a.name.c_str());
        arrays.push_back(std::move(a));
    }
    return arrays;
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw IoError("cannot open '" + path + "' for reading");
    }
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    os << content;
    if (!os) {
        throw IoError("short write to '" + path + "'");
    }
}

std::uint64_t fnv1a(const void* data, std::size_t size) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= p[i];
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::uint64_t fnv1a_file(const std::string& path) {
    const std::string bytes = read_text_file(path);
    return fnv1a(bytes.data(), bytes.size());
}

void write_heatmap_svg(const std::string& path, std::size_t rows, std::size_t cols,
                       const std::vector<float>& slice, const std::string& title,
                       std::size_t cell_px) {
    if (slice.size() != rows * cols) {
        throw ShapeError("heatmap slice has " + std::to_string(slice.size()) + " values for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " grid");
    }
    float lo = slice[0], hi = slice[0];
    for (float v : slice) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = (hi > lo) ? static_cast<double>(hi - lo) : 1.0;

    const std::size_t legend_w = 70;
    const std::size_t header_h = 24;
    const std::size_t width = cols * cell_px + legend_w + 10;
    const std::size_t height = std::max<std::size_t>(rows * cell_px, 90) + header_h + 10;

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\">\n";
    os << "  <defs><linearGradient id=\"ramp\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">"
          "<stop offset=\"0\" stop-color=\"#0000ff\"/>"
          "<stop offset=\"1\" stop-color=\"#ff0000\"/></linearGradient></defs>\n";
    os << "  <text x=\"4\" y=\"16\" font-family=\"monospace\" font-size=\"13\">" << title
       << "</text>\n";
    for (std::size_t k = 0; k < rows; ++k) {
        for (std::size_t j = 0; j < cols; ++j) {
            const double v = (static_cast<double>(slice[k * cols + j]) - lo) / span;
            const int r = static_cast<int>(std::lround(255.0 * v));
            const int b = static_cast<int>(std::lround(255.0 * (1.0 - v)));
            char color[8];
            std::snprintf(color, sizeof(color), "#%02x00%02x", r, b);
            os << "  <rect x=\"" << j * cell_px << "\" y=\"" << header_h + k * cell_px
               << "\" width=\"" << cell_px << "\" height=\"" << cell_px << "\" fill=\"" << color
               << "\"/>\n";
        }
    }
    const std::size_t bar_x = cols * cell_px + 14;
    const std::size_t bar_h = std::max<std::size_t>(rows * cell_px, 80);
    os << "  <rect x=\"" << bar_x << "\" y=\"" << header_h << "\" width=\"14\" height=\"" << bar_h
       << "\" fill=\"url(#ramp)\"/>\n";
    os << "  <text x=\"" << bar_x + 18 << "\" y=\"" << header_h + 10
       << "\" font-family=\"monospace\" font-size=\"11\">max " << hi << "</text>\n";
    os << "  <text x=\"" << bar_x + 18 << "\" y=\"" << header_h + bar_h
       << "\" font-family=\"monospace\" font-size=\"11\">min " << lo << "</text>\n";
    os << "</svg>\n";
    write_text_file(path, os.str());
}

} // namespace orca
