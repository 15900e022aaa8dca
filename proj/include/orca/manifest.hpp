#ifndef ORCA_MANIFEST_HPP
#define ORCA_MANIFEST_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "orca/buoy.hpp"
#include "orca/grid.hpp"

namespace orca {

// Text index of one generated or ingested dataset: grid geometry, buoy
// files with their coordinates, and the grid-field files. File paths are
// relative to the manifest's directory; checksums are FNV-1a 64 of the
// file bytes.
struct ManifestEntry {
    std::string station;
    std::string path;
    double lat = 0.0;
    double lon = 0.0;
    std::uint64_t checksum = 0;
};

struct ManifestField {
    std::string role;  // "truth" or "surrogate"
    std::string path;
    std::uint64_t checksum = 0;
};

struct Manifest {
    GridSpec grid;
    double interval_hours = 3.0;
    std::string swh_feature = "WVHT";
    std::vector<ManifestEntry> buoys;
    std::vector<ManifestField> fields;

    // Absolute-or-relative lookup helpers; empty when the role is absent.
    std::string field_path(const std::string& role) const;
};

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

// Parses every buoy file named by the manifest and assembles the dataset;
// buoy coordinates are mapped to grid cells by nearest center.
BuoyDataset load_dataset(const Manifest& manifest, const std::string& manifest_path);

// Resolves a manifest-relative path against the manifest file location.
std::string resolve_relative(const std::string& manifest_path, const std::string& entry_path);

} // namespace orca

#endif
