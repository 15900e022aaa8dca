#ifndef ORCA_BACKBONE_HPP
#define ORCA_BACKBONE_HPP

#include <string>
#include <vector>

#include "orca/params.hpp"
#include "orca/tensor.hpp"

namespace orca {

// Shape surrogate for the pretrained language-model stack: same token
// geometry and freeze mask, desk-scale weights.
struct BackboneConfig {
    std::size_t layers = 2;
    std::size_t heads = 4;
    std::size_t width = 64;    // D
    std::size_t ffn_mult = 4;
    std::size_t max_tokens = 64;
    std::uint64_t seed = 1;

    void validate() const {
        if (width == 0 || heads == 0 || width % heads != 0) {
            throw ContractError("backbone width must be a positive multiple of the head count");
        }
        if (max_tokens == 0) {
            throw ContractError("backbone needs max_tokens >= 1");
        }
    }
};

// References into the parameter set for one run of the stack.
template <typename T>
struct BackboneWeights {
    struct Layer {
        Tensor<T> ln1_gain, ln1_bias;
        Tensor<T> wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor<T> ln2_gain, ln2_bias;
        Tensor<T> ffn_w1, ffn_b1, ffn_w2, ffn_b2;
    };
    Tensor<T> pos;  // max_tokens x D, the only trainable backbone array
    std::vector<Layer> layers;
    Tensor<T> lnf_gain, lnf_bias;
    std::size_t heads = 1;
};

namespace detail {

// Pre-norm multi-head self-attention over one I x D token sequence; the
// task is whole-window estimation, so no causal mask.
template <typename T>
Tensor<T> self_attention(const Tensor<T>& x, const typename BackboneWeights<T>::Layer& layer,
                         std::size_t heads) {
    const std::size_t width = x.shape()[1];
    const std::size_t head_dim = width / heads;
    auto q = linear(x, layer.wq, layer.bq);
    auto k = linear(x, layer.wk, layer.bk);
    auto v = linear(x, layer.wv, layer.bv);
    std::vector<Tensor<T>> outputs;
    outputs.reserve(heads);
    const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(head_dim)));
    for (std::size_t h = 0; h < heads; ++h) {
        auto qh = slice(q, 1, h * head_dim, head_dim);
        auto kh = slice(k, 1, h * head_dim, head_dim);
        auto vh = slice(v, 1, h * head_dim, head_dim);
        auto scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
        auto attn = softmax(scores, 1);
        outputs.push_back(matmul(attn, vh));
    }
    auto merged = concat(outputs, 1);
    return linear(merged, layer.wo, layer.bo);
}

template <typename T>
Tensor<T> fiber_forward(const Tensor<T>& fiber, const BackboneWeights<T>& w) {
    const std::size_t tokens = fiber.shape()[0];
    const std::size_t width = fiber.shape()[1];
    auto x = add(fiber, slice(w.pos, 0, 0, tokens));
    for (const auto& layer : w.layers) {
        auto attn_in = layer_norm(x, layer.ln1_gain, layer.ln1_bias);
        x = add(x, self_attention(attn_in, layer, w.heads));
        auto ffn_in = layer_norm(x, layer.ln2_gain, layer.ln2_bias);
        auto ffn = linear(relu(linear(ffn_in, layer.ffn_w1, layer.ffn_b1)), layer.ffn_w2,
                          layer.ffn_b2);
        x = add(x, ffn);
    }
    // With zero layers the stack degenerates to input + positional
    // encodings; the closing norm only exists alongside the layers it
    // normalizes.
    if (!w.layers.empty()) {
        x = layer_norm(x, w.lnf_gain, w.lnf_bias);
    }
    (void)width;
    return x;
}

} // namespace detail

// H_LLM = stack(H_input): each (f, m) fiber of I x D tokens runs through
// the transformer independently; output keeps the I x F x M x D shape.
template <typename T>
Tensor<T> backbone_forward(const Tensor<T>& h_input, const BackboneWeights<T>& weights) {
    if (h_input.rank() != 4) {
        throw ShapeError("backbone_forward: expected I x F x M x D input, got " +
                         shape_str(h_input.shape()));
    }
    const std::size_t tokens = h_input.shape()[0];
    const std::size_t F = h_input.shape()[1];
    const std::size_t M = h_input.shape()[2];
    const std::size_t D = h_input.shape()[3];
    if (tokens > weights.pos.shape()[0]) {
        throw CapacityError("token count " + std::to_string(tokens) + " exceeds max_tokens " +
                            std::to_string(weights.pos.shape()[0]));
    }
    std::vector<Tensor<T>> per_feature;
    per_feature.reserve(F);
    for (std::size_t f = 0; f < F; ++f) {
        std::vector<Tensor<T>> per_buoy;
        per_buoy.reserve(M);
        for (std::size_t m = 0; m < M; ++m) {
            auto fiber = reshape(slice(slice(h_input, 1, f, 1), 2, m, 1), {tokens, D});
            auto out = detail::fiber_forward(fiber, weights);
            per_buoy.push_back(reshape(out, {tokens, 1, 1, D}));
        }
        per_feature.push_back(concat(per_buoy, 2));
    }
    return concat(per_feature, 1);
}

// H_pool = mean over the feature axis, flattened in (token, buoy, width)
// order; w5 then projects onto the K*J*T grid, reshaped row-major
// (k, j, t). Both orders are load-bearing: changing either silently
// changes what w5's columns mean.
template <typename T>
Tensor<T> pool_and_project(const Tensor<T>& h_llm, const Tensor<T>& w5, const Tensor<T>& b5,
                           std::size_t grid_rows, std::size_t grid_cols, std::size_t steps) {
    if (h_llm.rank() != 4) {
        throw ShapeError("pool_and_project: expected I x F x M x D input, got " +
                         shape_str(h_llm.shape()));
    }
    auto pooled = mean(h_llm, 1);  // I x M x D
    const std::size_t flat_len = pooled.numel();
    if (w5.shape()[1] != flat_len) {
        throw ShapeError("pool_and_project: head expects " + std::to_string(w5.shape()[1]) +
                         " inputs but the pooled embedding has " + std::to_string(flat_len));
    }
    auto flat = reshape(pooled, {std::size_t(1), flat_len});
    auto projected = linear(flat, w5, b5);  // 1 x (K*J*T)
    return reshape(projected, {grid_rows, grid_cols, steps});
}

} // namespace orca

#endif
