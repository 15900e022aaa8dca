#ifndef ORCA_CONFIG_HPP
#define ORCA_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "orca/error.hpp"
#include "orca/prompt_text.hpp"

namespace orca {

// The run configuration: a flat key=value file, with a handful of CLI
// flag overrides applied on top by the command layer.
struct RunConfig {
    // paths
    std::string manifest_path;  // data.manifest
    std::string weights_path;   // paths.weights
    std::string estimate_path;  // paths.estimate
    std::string out_dir = "out";

    // model geometry
    std::size_t width = 64;  // D
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t ffn_mult = 4;
    std::size_t max_tokens = 0;      // 0 = sized to the active token count
    std::size_t soft_prompt_len = 8; // R
    std::size_t patch_len = 16;      // L
    std::size_t patch_stride = 8;    // W
    std::size_t window = 32;         // training window length T_w
    PromptVariant prompt = PromptVariant::full;
    bool location_token = true;

    // training
    double lr = 0.001;
    double alpha = 0.3;
    std::size_t epochs = 50;
    std::size_t windows_per_epoch = 8;
    std::size_t patience = 10;
    std::uint64_t seed = 1;

    // synthetic data dimensions (synth subcommand)
    std::size_t synth_rows = 8;
    std::size_t synth_cols = 8;
    std::size_t synth_steps = 32;
    std::size_t synth_buoys = 3;
    std::size_t synth_features = 3;

    // estimate subcommand
    std::vector<std::size_t> heatmap_times = {0};

    static RunConfig from_file(const std::string& path);
    void apply(const std::string& key, const std::string& value);
    void validate() const;
};

std::vector<std::size_t> parse_index_list(const std::string& text);

} // namespace orca

#endif
