#ifndef ORCA_PIPELINE_HPP
#define ORCA_PIPELINE_HPP

#include <optional>
#include <string>
#include <vector>

#include "orca/backbone.hpp"
#include "orca/buoy.hpp"
#include "orca/config.hpp"
#include "orca/grid.hpp"
#include "orca/io.hpp"
#include "orca/params.hpp"
#include "orca/prompt_encoding.hpp"
#include "orca/prompt_text.hpp"
#include "orca/rng.hpp"
#include "orca/st_encoding.hpp"
#include "orca/tensor.hpp"

namespace orca {

// One observation window cut from the dataset: F x M x T_w values with
// their missing flags, remembering where it starts.
struct ObsWindow {
    std::size_t features = 0;
    std::size_t buoys = 0;
    std::size_t steps = 0;
    std::size_t start = 0;

    std::vector<float> values;
    std::vector<std::uint8_t> missing;

    float at(std::size_t f, std::size_t m, std::size_t t) const {
        return values[(f * buoys + m) * steps + t];
    }
    bool is_missing(std::size_t f, std::size_t m, std::size_t t) const {
        return missing[(f * buoys + m) * steps + t] != 0;
    }
};

inline ObsWindow extract_window(const BuoyDataset& ds, std::size_t start, std::size_t len) {
    if (start + len > ds.num_steps()) {
        throw ContractError("window [" + std::to_string(start) + ", " +
                            std::to_string(start + len) + ") exceeds the dataset's " +
                            std::to_string(ds.num_steps()) + " steps");
    }
    ObsWindow w;
    w.features = ds.num_features();
    w.buoys = ds.num_buoys();
    w.steps = len;
    w.start = start;
    w.values.resize(w.features * w.buoys * len);
    w.missing.resize(w.values.size());
    for (std::size_t f = 0; f < w.features; ++f) {
        for (std::size_t m = 0; m < w.buoys; ++m) {
            for (std::size_t t = 0; t < len; ++t) {
                w.values[(f * w.buoys + m) * len + t] = ds.at(f, m, start + t);
                w.missing[(f * w.buoys + m) * len + t] = ds.is_missing(f, m, start + t) ? 1 : 0;
            }
        }
    }
    return w;
}

// The full estimation model: prompt encoding, spatio-temporal encoding,
// frozen transformer surrogate, and the grid projection head, all built
// over one parameter registry.
template <typename T>
class OrcaModel {
public:
    OrcaModel(const RunConfig& cfg, const GridSpec& grid, const BuoyDataset& dataset,
              std::optional<PromptTemplate> custom_template = std::nullopt)
        : grid_(grid),
          width_(cfg.width),
          soft_prompt_len_(cfg.soft_prompt_len),
          patch_len_(cfg.patch_len),
          patch_stride_(cfg.patch_stride),
          window_(cfg.window),
          variant_(cfg.prompt),
          location_token_(cfg.location_token),
          buoys_(dataset.num_buoys()),
          features_(dataset.num_features()),
          swh_feature_(dataset.swh_feature()) {
        cfg.validate();
        if (window_ > dataset.num_steps()) {
            throw ContractError("window length " + std::to_string(window_) +
                                " exceeds the dataset's " + std::to_string(dataset.num_steps()) +
                                " steps");
        }

        // Prompt: render, tokenize, and freeze the vocabulary. The
        // vocabulary always comes from the full rendering so every
        // variant shares the same embedding table.
        PromptTemplate tmpl = custom_template ? *custom_template : PromptTemplate::standard(variant_);
        tmpl.variant = variant_;
        DatasetMeta meta;
        meta.num_features = features_;
        meta.num_buoys = buoys_;
        meta.num_steps = window_;
        meta.feature_names = dataset.feature_names();
        PromptTemplate full_tmpl = tmpl;
        full_tmpl.variant = PromptVariant::full;
        vocab_ = Vocabulary::build(tokenize(render_prompt(full_tmpl, meta).text));
        rendered_ = render_prompt(tmpl, meta);
        for (const auto& tok : tokenize(rendered_.text)) {
            token_ids_.push_back(vocab_.id_of(tok));
        }

        // Spatial code bits for the buoy cells.
        zbits_ = zorder_encode(dataset.locations(), grid_);
        bit_depth_ = zbits_.empty() ? 0 : zbits_[0].size();

        patch_count_ = patch_count(window_, patch_len_, patch_stride_);
        tokens_ = soft_prompt_len_ + token_ids_.size() + (location_token_ ? 1 : 0) + patch_count_;

        backbone_cfg_.layers = cfg.layers;
        backbone_cfg_.heads = cfg.heads;
        backbone_cfg_.width = cfg.width;
        backbone_cfg_.ffn_mult = cfg.ffn_mult;
        backbone_cfg_.max_tokens = cfg.max_tokens == 0 ? tokens_ : cfg.max_tokens;
        backbone_cfg_.seed = cfg.seed;
        backbone_cfg_.validate();

        init_params(cfg.seed);
    }

    // --- introspection -------------------------------------------------
    std::size_t token_count() const { return tokens_; }           // I
    std::size_t prompt_tokens() const { return token_ids_.size(); }  // E
    std::size_t soft_prompt_len() const { return soft_prompt_len_; } // R
    std::size_t patch_tokens() const { return patch_count_; }     // S
    std::size_t window_len() const { return window_; }            // T_w
    std::size_t width() const { return width_; }                  // D
    bool has_location_token() const { return location_token_; }
    const GridSpec& grid() const { return grid_; }
    const RenderedPrompt& rendered_prompt() const { return rendered_; }
    const BackboneConfig& backbone_config() const { return backbone_cfg_; }
    ParamSet<T>& params() { return params_; }
    const ParamSet<T>& params() const { return params_; }

    // Overwrites seeded arrays from an external ORCAW v1 weights file.
    void load_external_weights(const std::string& path) {
        params_.load_arrays(read_weight_file(path));
    }

    // --- forward pieces -------------------------------------------------

    Tensor<T> encode_prompt() {
        SoftPromptNet<T> net{params_.at("adapter.q"),   params_.at("prompt.lstm.wx"),
                             params_.at("prompt.lstm.wh"), params_.at("prompt.lstm.b"),
                             params_.at("adapter.w1"),  params_.at("adapter.b1"),
                             params_.at("adapter.w2"),  params_.at("adapter.b2")};
        auto h_q = encode_soft_prompt(net);
        if (token_ids_.empty()) {
            return build_prompt_repr<T>(h_q, nullptr);
        }
        auto p = tokenize_and_embed(token_ids_, params_.at("embed.table"));
        return build_prompt_repr<T>(h_q, &p);
    }

    Tensor<T> encode_location() {
        auto z = zorder_tensor<T>(zbits_);
        return spatial_embed(z, params_.at("adapter.w3"), params_.at("adapter.b3"));
    }

    BackboneWeights<T> backbone_weights() {
        BackboneWeights<T> w;
        w.pos = params_.at("backbone.pos");
        w.heads = backbone_cfg_.heads;
        for (std::size_t l = 0; l < backbone_cfg_.layers; ++l) {
            const std::string p = "backbone.h" + std::to_string(l) + ".";
            typename BackboneWeights<T>::Layer layer{
                params_.at(p + "ln1.gain"), params_.at(p + "ln1.bias"),
                params_.at(p + "attn.wq"),  params_.at(p + "attn.bq"),
                params_.at(p + "attn.wk"),  params_.at(p + "attn.bk"),
                params_.at(p + "attn.wv"),  params_.at(p + "attn.bv"),
                params_.at(p + "attn.wo"),  params_.at(p + "attn.bo"),
                params_.at(p + "ln2.gain"), params_.at(p + "ln2.bias"),
                params_.at(p + "ffn.w1"),   params_.at(p + "ffn.b1"),
                params_.at(p + "ffn.w2"),   params_.at(p + "ffn.b2")};
            w.layers.push_back(std::move(layer));
        }
        if (backbone_cfg_.layers > 0) {
            w.lnf_gain = params_.at("backbone.lnf.gain");
            w.lnf_bias = params_.at("backbone.lnf.bias");
        }
        return w;
    }

    // Full estimation pass over one observation window: returns the
    // K x J x T_w grid estimate, connected to every trainable array.
    Tensor<T> forward(const ObsWindow& window) {
        if (window.steps != window_ || window.features != features_ || window.buoys != buoys_) {
            throw ShapeError("forward: window is F=" + std::to_string(window.features) +
                             " M=" + std::to_string(window.buoys) + " T=" +
                             std::to_string(window.steps) + ", model expects F=" +
                             std::to_string(features_) + " M=" + std::to_string(buoys_) +
                             " T=" + std::to_string(window_));
        }
        auto h_prompt = encode_prompt();
        std::optional<Tensor<T>> h_loc;
        if (location_token_) {
            h_loc = encode_location();
        }
        const PatchSet patches =
            make_patches(window.values, features_, buoys_, window_, patch_len_, patch_stride_);
        auto h_temp = temporal_embed(patches, params_.at("adapter.w4"), params_.at("adapter.b4"));
        auto h_input = assemble_input(h_prompt, h_loc, h_temp);
        auto h_llm = backbone_forward(h_input, backbone_weights());
        return pool_and_project(h_llm, params_.at("adapter.w5"), params_.at("adapter.b5"),
                                grid_.rows, grid_.cols, window_);
    }

private:
    void init_params(std::uint64_t seed) {
        Rng rng(derive_seed(seed, 7));
        const std::size_t D = width_;
        auto normal = [&](Shape shape, double stddev, bool trainable) {
            std::vector<T> vals(shape_numel(shape));
            for (auto& v : vals) {
                v = static_cast<T>(rng.normal(0.0, stddev));
            }
            return Tensor<T>::leaf(std::move(shape), std::move(vals), trainable);
        };
        auto fan_in = [&](Shape shape, bool trainable) {
            const double stddev = 1.0 / std::sqrt(static_cast<double>(shape.back()));
            return normal(std::move(shape), stddev, trainable);
        };
        auto zeros = [&](Shape shape, bool trainable) {
            return Tensor<T>::zeros(std::move(shape), trainable);
        };
        auto ones = [&](Shape shape) {
            return Tensor<T>::full(std::move(shape), T(1), false);
        };

        params_.add("embed.table", normal({vocab_.size(), D}, 0.1, false), false);
        params_.add("backbone.pos", normal({backbone_cfg_.max_tokens, D}, 0.02, true), true);
        for (std::size_t l = 0; l < backbone_cfg_.layers; ++l) {
            const std::string p = "backbone.h" + std::to_string(l) + ".";
            params_.add(p + "ln1.gain", ones({D}), false);
            params_.add(p + "ln1.bias", zeros({D}, false), false);
            params_.add(p + "attn.wq", fan_in({D, D}, false), false);
            params_.add(p + "attn.bq", zeros({D}, false), false);
            params_.add(p + "attn.wk", fan_in({D, D}, false), false);
            params_.add(p + "attn.bk", zeros({D}, false), false);
            params_.add(p + "attn.wv", fan_in({D, D}, false), false);
            params_.add(p + "attn.bv", zeros({D}, false), false);
            params_.add(p + "attn.wo", fan_in({D, D}, false), false);
            params_.add(p + "attn.bo", zeros({D}, false), false);
            params_.add(p + "ln2.gain", ones({D}), false);
            params_.add(p + "ln2.bias", zeros({D}, false), false);
            params_.add(p + "ffn.w1", fan_in({backbone_cfg_.ffn_mult * D, D}, false), false);
            params_.add(p + "ffn.b1", zeros({backbone_cfg_.ffn_mult * D}, false), false);
            params_.add(p + "ffn.w2", fan_in({D, backbone_cfg_.ffn_mult * D}, false), false);
            params_.add(p + "ffn.b2", zeros({D}, false), false);
        }
        if (backbone_cfg_.layers > 0) {
            params_.add("backbone.lnf.gain", ones({D}), false);
            params_.add("backbone.lnf.bias", zeros({D}, false), false);
        }
        params_.add("prompt.lstm.wx", fan_in({4 * D, D}, false), false);
        params_.add("prompt.lstm.wh", fan_in({4 * D, D}, false), false);
        params_.add("prompt.lstm.b", zeros({4 * D}, false), false);

        params_.add("adapter.q", normal({soft_prompt_len_, D}, 0.1, true), true);
        params_.add("adapter.w1", fan_in({D, D}, true), true);
        params_.add("adapter.b1", zeros({D}, true), true);
        params_.add("adapter.w2", fan_in({D, D}, true), true);
        params_.add("adapter.b2", zeros({D}, true), true);
        params_.add("adapter.w3", fan_in({D, bit_depth_}, true), true);
        params_.add("adapter.b3", zeros({D}, true), true);
        params_.add("adapter.w4", fan_in({D, patch_len_}, true), true);
        params_.add("adapter.b4", zeros({D}, true), true);
        const std::size_t flat_len = tokens_ * buoys_ * D;
        const std::size_t grid_len = grid_.rows * grid_.cols * window_;
        params_.add("adapter.w5", fan_in({grid_len, flat_len}, true), true);
        params_.add("adapter.b5", zeros({grid_len}, true), true);
    }

    GridSpec grid_;
    std::size_t width_;
    std::size_t soft_prompt_len_;
    std::size_t patch_len_;
    std::size_t patch_stride_;
    std::size_t window_;
    PromptVariant variant_;
    bool location_token_;
    std::size_t buoys_;
    std::size_t features_;
    std::size_t swh_feature_;

    BackboneConfig backbone_cfg_;
    Vocabulary vocab_;
    RenderedPrompt rendered_;
    std::vector<std::size_t> token_ids_;
    std::vector<std::vector<std::uint8_t>> zbits_;
    std::size_t bit_depth_ = 0;
    std::size_t patch_count_ = 0;
    std::size_t tokens_ = 0;

    ParamSet<T> params_;
};

} // namespace orca

#endif
