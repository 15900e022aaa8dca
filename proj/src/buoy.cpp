#include "orca/buoy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "orca/error.hpp"

namespace orca {

namespace {

const std::map<std::string, std::string>& feature_table() {
    static const std::map<std::string, std::string> table = {
        {"WDIR", "wind direction"},
        {"WSPD", "wind speed"},
        {"GST", "gust speed"},
        {"WVHT", "significant wave height"},
        {"DPD", "dominant wave period"},
        {"APD", "average wave period"},
        {"MWD", "mean wave direction"},
        {"PRES", "sea level pressure"},
        {"ATMP", "air temperature"},
        {"WTMP", "sea surface temperature"},
        {"DEWP", "dew point temperature"},
        {"VIS", "visibility"},
        {"PTDY", "pressure tendency"},
        {"TIDE", "water level"},
    };
    return table;
}

bool is_sentinel(double v) { return v == 99.0 || v == 999.0 || v == 9999.0; }

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        out.push_back(tok);
    }
    return out;
}

} // namespace

bool is_known_feature(const std::string& name) { return feature_table().count(name) > 0; }

std::string feature_long_name(const std::string& code) {
    auto it = feature_table().find(code);
    return it == feature_table().end() ? code : it->second;
}

BuoyRecord parse_buoy_text(const std::string& text, double interval_hours) {
    if (interval_hours <= 0.0) {
        throw ContractError("observation interval must be positive");
    }
    std::istringstream is(text);
    std::string line;

    // Header: two '#' lines, first carries column names.
    std::string name_line;
    int header_lines = 0;
    while (header_lines < 2 && std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        if (line[0] != '#') {
            throw SchemaError("expected two '#' header lines before data rows");
        }
        if (header_lines == 0) {
            name_line = line.substr(1);
        }
        ++header_lines;
    }
    if (header_lines < 2) {
        throw SchemaError("buoy text is missing its two-line header");
    }

    std::vector<std::string> columns = split_ws(name_line);
    if (columns.size() < 5) {
        throw SchemaError("header declares fewer than the five timestamp columns");
    }
    const std::vector<std::string> stamp = {"YY", "MM", "DD", "hh", "mm"};
    for (std::size_t i = 0; i < stamp.size(); ++i) {
        std::string got = columns[i];
        if (!got.empty() && got[0] == '#') {
            got = got.substr(1);
        }
        if (got != stamp[i]) {
            throw SchemaError("timestamp column " + std::to_string(i) + " is '" + got +
                              "', expected '" + stamp[i] + "'");
        }
    }
    std::vector<std::string> features(columns.begin() + 5, columns.end());
    for (const auto& f : features) {
        if (!is_known_feature(f)) {
            throw SchemaError("unknown column '" + f + "'");
        }
    }
    const std::size_t nfeat = features.size();

    // Data rows.
    std::vector<std::int64_t> row_minutes;
    std::vector<std::vector<double>> row_values;
    while (std::getline(is, line)) {
        const std::vector<std::string> toks = split_ws(line);
        if (toks.empty()) {
            continue;
        }
        if (toks.size() != 5 + nfeat) {
            throw SchemaError("data row has " + std::to_string(toks.size()) +
                              " fields, expected " + std::to_string(5 + nfeat));
        }
        const std::int64_t year = std::strtoll(toks[0].c_str(), nullptr, 10);
        const std::int64_t mon = std::strtoll(toks[1].c_str(), nullptr, 10);
        const std::int64_t day = std::strtoll(toks[2].c_str(), nullptr, 10);
        const std::int64_t hour = std::strtoll(toks[3].c_str(), nullptr, 10);
        const std::int64_t minute = std::strtoll(toks[4].c_str(), nullptr, 10);
        const std::int64_t minutes =
            days_from_civil(year, static_cast<unsigned>(mon), static_cast<unsigned>(day)) * 1440 +
            hour * 60 + minute;
        if (!row_minutes.empty() && minutes <= row_minutes.back()) {
            throw OrderingError("timestamps must be strictly increasing (row " +
                                std::to_string(row_minutes.size()) + ")");
        }
        row_minutes.push_back(minutes);
        std::vector<double> vals(nfeat);
        for (std::size_t f = 0; f < nfeat; ++f) {
            char* end = nullptr;
            vals[f] = std::strtod(toks[5 + f].c_str(), &end);
            if (end == toks[5 + f].c_str()) {
                throw SchemaError("non-numeric value '" + toks[5 + f] + "' in column " +
                                  features[f]);
            }
        }
        row_values.push_back(std::move(vals));
    }

    BuoyRecord rec;
    rec.feature_names = features;
    if (row_minutes.empty()) {
        return rec;  // empty fragment, zero rows
    }

    // Snap rows to the lattice anchored at the first timestamp.
    const std::int64_t step = static_cast<std::int64_t>(std::llround(interval_hours * 60.0));
    const std::int64_t span = row_minutes.back() - row_minutes.front();
    rec.steps = static_cast<std::size_t>(span / step) + 1;
    rec.start_minutes = row_minutes.front();
    rec.values.assign(nfeat * rec.steps, 0.0f);
    rec.missing.assign(nfeat * rec.steps, 1);

    std::size_t cursor = 0;
    for (std::size_t t = 0; t < rec.steps; ++t) {
        const std::int64_t target = rec.start_minutes + static_cast<std::int64_t>(t) * step;
        while (cursor + 1 < row_minutes.size() &&
               std::llabs(row_minutes[cursor + 1] - target) < std::llabs(row_minutes[cursor] - target)) {
            ++cursor;
        }
        for (std::size_t f = 0; f < nfeat; ++f) {
            const double v = row_values[cursor][f];
            if (!is_sentinel(v)) {
                rec.values[f * rec.steps + t] = static_cast<float>(v);
                rec.missing[f * rec.steps + t] = 0;
            }
        }
    }

    // Fill gaps: carry the last observation forward, seed leading gaps
    // with the first observation.
    for (std::size_t f = 0; f < nfeat; ++f) {
        std::size_t first_seen = rec.steps;
        for (std::size_t t = 0; t < rec.steps; ++t) {
            if (!rec.is_missing(f, t)) {
                first_seen = t;
                break;
            }
        }
        if (first_seen == rec.steps) {
            continue;  // feature never observed; stays masked at 0
        }
        for (std::size_t t = 0; t < first_seen; ++t) {
            rec.values[f * rec.steps + t] = rec.at(f, first_seen);
        }
        float last = rec.at(f, first_seen);
        for (std::size_t t = first_seen; t < rec.steps; ++t) {
            if (rec.is_missing(f, t)) {
                rec.values[f * rec.steps + t] = last;
            } else {
                last = rec.at(f, t);
            }
        }
    }
    return rec;
}

BuoyDataset::BuoyDataset(std::vector<std::string> feature_names, std::string swh_feature_name,
                         std::vector<float> values, std::vector<std::uint8_t> missing,
                         std::vector<GridCell> locations, std::size_t steps,
                         double interval_hours, const GridSpec& spec)
    : feature_names_(std::move(feature_names)),
      values_(std::move(values)),
      missing_(std::move(missing)),
      locations_(std::move(locations)),
      steps_(steps),
      interval_hours_(interval_hours) {
    const std::size_t f = feature_names_.size();
    const std::size_t m = locations_.size();
    if (values_.size() != f * m * steps_ || missing_.size() != values_.size()) {
        throw ShapeError("buoy dataset arrays do not match F=" + std::to_string(f) +
                         " M=" + std::to_string(m) + " T=" + std::to_string(steps_));
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < feature_names_.size(); ++i) {
        if (feature_names_[i] == swh_feature_name) {
            swh_index_ = i;
            ++hits;
        }
    }
    if (hits != 1) {
        throw ContractError("exactly one feature must be the observed-SWH feature '" +
                            swh_feature_name + "', found " + std::to_string(hits));
    }
    for (const GridCell& loc : locations_) {
        if (loc.row >= spec.rows || loc.col >= spec.cols) {
            throw RegionError("buoy cell (" + std::to_string(loc.row) + ", " +
                              std::to_string(loc.col) + ") outside grid " +
                              std::to_string(spec.rows) + "x" + std::to_string(spec.cols));
        }
    }
    for (std::size_t b = 0; b < m; ++b) {
        for (std::size_t t = 0; t < steps_; ++t) {
            if (!is_missing(swh_index_, b, t) && at(swh_index_, b, t) < 0.0f) {
                throw ContractError("observed SWH must be nonnegative, buoy " + std::to_string(b) +
                                    " step " + std::to_string(t) + " is " +
                                    std::to_string(at(swh_index_, b, t)));
            }
        }
    }
}

BuoyDataset BuoyDataset::from_records(const std::vector<BuoyRecord>& records,
                                      const std::vector<GridCell>& locations,
                                      const std::string& swh_feature_name, double interval_hours,
                                      const GridSpec& spec) {
    if (records.empty()) {
        throw ContractError("at least one buoy record is required");
    }
    if (records.size() != locations.size()) {
        throw ContractError("got " + std::to_string(records.size()) + " records but " +
                            std::to_string(locations.size()) + " locations");
    }
    const auto& names = records[0].feature_names;
    const std::size_t steps = records[0].steps;
    const std::int64_t anchor = records[0].start_minutes;
    for (const auto& r : records) {
        if (r.feature_names != names) {
            throw AlignmentError("buoy records disagree on feature columns");
        }
        if (r.steps != steps) {
            throw AlignmentError("buoy records disagree on step count (" + std::to_string(r.steps) +
                                 " vs " + std::to_string(steps) + ")");
        }
        if (r.start_minutes != anchor) {
            throw AlignmentError("buoy records disagree on the lattice anchor");
        }
    }
    const std::size_t nf = names.size();
    const std::size_t nm = records.size();
    std::vector<float> values(nf * nm * steps, 0.0f);
    std::vector<std::uint8_t> missing(nf * nm * steps, 0);
    for (std::size_t m = 0; m < nm; ++m) {
        for (std::size_t f = 0; f < nf; ++f) {
            for (std::size_t t = 0; t < steps; ++t) {
                values[(f * nm + m) * steps + t] = records[m].at(f, t);
                missing[(f * nm + m) * steps + t] = records[m].missing[f * records[m].steps + t];
            }
        }
    }
    return BuoyDataset(names, swh_feature_name, std::move(values), std::move(missing), locations,
                       steps, interval_hours, spec);
}

} // namespace orca
