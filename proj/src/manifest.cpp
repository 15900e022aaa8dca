#include "orca/manifest.hpp"

#include <filesystem>
#include <iomanip>
#include <sstream>

#include "orca/error.hpp"
#include "orca/io.hpp"

namespace orca {

std::string Manifest::field_path(const std::string& role) const {
    for (const auto& f : fields) {
        if (f.role == role) {
            return f.path;
        }
    }
    return "";
}

std::string resolve_relative(const std::string& manifest_path, const std::string& entry_path) {
    const std::filesystem::path p(entry_path);
    if (p.is_absolute()) {
        return entry_path;
    }
    return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    std::ostringstream os;
    os << std::setprecision(12);
    os << "ORCAMANIFEST v1\n";
    os << "grid " << manifest.grid.rows << ' ' << manifest.grid.cols << ' '
       << manifest.grid.lat_north << ' ' << manifest.grid.lat_south << ' '
       << manifest.grid.lon_west << ' ' << manifest.grid.lon_east << ' '
       << manifest.grid.cell_deg << '\n';
    os << "interval_hours " << manifest.interval_hours << '\n';
    os << "swh_feature " << manifest.swh_feature << '\n';
    for (const auto& b : manifest.buoys) {
        os << "buoy " << b.station << ' ' << b.path << ' ' << b.lat << ' ' << b.lon << ' '
           << std::hex << b.checksum << std::dec << '\n';
    }
    for (const auto& f : manifest.fields) {
        os << "field " << f.role << ' ' << f.path << ' ' << std::hex << f.checksum << std::dec
           << '\n';
    }
    write_text_file(path, os.str());
}

Manifest read_manifest(const std::string& path) {
    std::istringstream is(read_text_file(path));
    std::string line;
    if (!std::getline(is, line) || line != "ORCAMANIFEST v1") {
        throw FormatError("'" + path + "' does not declare ORCAMANIFEST v1");
    }
    Manifest m;
    bool saw_grid = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "grid") {
            ls >> m.grid.rows >> m.grid.cols >> m.grid.lat_north >> m.grid.lat_south >>
                m.grid.lon_west >> m.grid.lon_east >> m.grid.cell_deg;
            if (!ls) {
                throw FormatError("malformed grid line in '" + path + "'");
            }
            m.grid.validate();
            saw_grid = true;
        } else if (tag == "interval_hours") {
            ls >> m.interval_hours;
        } else if (tag == "swh_feature") {
            ls >> m.swh_feature;
        } else if (tag == "buoy") {
            ManifestEntry e;
            ls >> e.station >> e.path >> e.lat >> e.lon >> std::hex >> e.checksum >> std::dec;
            if (!ls) {
                throw FormatError("malformed buoy line in '" + path + "'");
            }
            m.buoys.push_back(std::move(e));
        } else if (tag == "field") {
            ManifestField f;
            ls >> f.role >> f.path >> std::hex >> f.checksum >> std::dec;
            if (!ls) {
                throw FormatError("malformed field line in '" + path + "'");
            }
            m.fields.push_back(std::move(f));
        } else {
            throw FormatError("unknown manifest tag '" + tag + "' in '" + path + "'");
        }
    }
    if (!saw_grid || m.buoys.empty()) {
        throw FormatError("manifest '" + path + "' needs a grid line and at least one buoy");
    }
    return m;
}

BuoyDataset load_dataset(const Manifest& manifest, const std::string& manifest_path) {
    std::vector<BuoyRecord> records;
    std::vector<GridCell> locations;
    records.reserve(manifest.buoys.size());
    for (const auto& entry : manifest.buoys) {
        const std::string file = resolve_relative(manifest_path, entry.path);
        records.push_back(parse_buoy_text(read_text_file(file), manifest.interval_hours));
        locations.push_back(cell_of(entry.lat, entry.lon, manifest.grid));
    }
    return BuoyDataset::from_records(records, locations, manifest.swh_feature,
                                     manifest.interval_hours, manifest.grid);
}

} // namespace orca
