#include "orca/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace orca {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) {
        return "";
    }
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::size_t to_count(const std::string& key, const std::string& value) {
    try {
        const long long v = std::stoll(value);
        if (v < 0) {
            throw ConfigError(key + " must be nonnegative, got " + value);
        }
        return static_cast<std::size_t>(v);
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError(key + " expects an integer, got '" + value + "'");
    }
}

double to_real(const std::string& key, const std::string& value) {
    try {
        return std::stod(value);
    } catch (...) {
        throw ConfigError(key + " expects a number, got '" + value + "'");
    }
}

bool to_flag(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError(key + " expects a boolean, got '" + value + "'");
}

} // namespace

std::vector<std::size_t> parse_index_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(to_count("time index", item));
        }
    }
    return out;
}

void RunConfig::apply(const std::string& key, const std::string& value) {
    if (key == "data.manifest") {
        manifest_path = value;
    } else if (key == "paths.weights") {
        weights_path = value;
    } else if (key == "paths.estimate") {
        estimate_path = value;
    } else if (key == "out.dir") {
        out_dir = value;
    } else if (key == "model.width") {
        width = to_count(key, value);
    } else if (key == "model.layers") {
        layers = to_count(key, value);
    } else if (key == "model.heads") {
        heads = to_count(key, value);
    } else if (key == "model.ffn_mult") {
        ffn_mult = to_count(key, value);
    } else if (key == "model.max_tokens") {
        max_tokens = to_count(key, value);
    } else if (key == "model.soft_prompt_len") {
        soft_prompt_len = to_count(key, value);
    } else if (key == "model.patch_len") {
        patch_len = to_count(key, value);
    } else if (key == "model.patch_stride") {
        patch_stride = to_count(key, value);
    } else if (key == "model.window") {
        window = to_count(key, value);
    } else if (key == "model.prompt") {
        prompt = prompt_variant_from_string(value);
    } else if (key == "model.location_token") {
        location_token = to_flag(key, value);
    } else if (key == "train.lr") {
        lr = to_real(key, value);
    } else if (key == "train.alpha") {
        alpha = to_real(key, value);
    } else if (key == "train.epochs") {
        epochs = to_count(key, value);
    } else if (key == "train.windows_per_epoch") {
        windows_per_epoch = to_count(key, value);
    } else if (key == "train.patience") {
        patience = to_count(key, value);
    } else if (key == "seed") {
        seed = to_count(key, value);
    } else if (key == "synth.rows") {
        synth_rows = to_count(key, value);
    } else if (key == "synth.cols") {
        synth_cols = to_count(key, value);
    } else if (key == "synth.steps") {
        synth_steps = to_count(key, value);
    } else if (key == "synth.buoys") {
        synth_buoys = to_count(key, value);
    } else if (key == "synth.features") {
        synth_features = to_count(key, value);
    } else if (key == "estimate.times") {
        heatmap_times = parse_index_list(value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open configuration file '" + path + "'");
    }
    RunConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + " of '" + path +
                              "' is not a key=value pair");
        }
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::validate() const {
    if (lr <= 0.0) {
        throw ConfigError("train.lr must be positive");
    }
    if (alpha < 0.0) {
        throw ConfigError("train.alpha must be nonnegative");
    }
    if (epochs < 1) {
        throw ConfigError("train.epochs must be at least 1");
    }
    if (width == 0 || heads == 0 || width % heads != 0) {
        throw ConfigError("model.width must be a positive multiple of model.heads");
    }
    if (soft_prompt_len == 0) {
        throw ConfigError("model.soft_prompt_len must be positive");
    }
    if (patch_stride == 0 || patch_len == 0) {
        throw ConfigError("model.patch_len and model.patch_stride must be positive");
    }
    if (patch_stride > patch_len) {
        throw ConfigError("model.patch_stride must not exceed model.patch_len");
    }
    if (window == 0) {
        throw ConfigError("model.window must be positive");
    }
}

} // namespace orca
