#ifndef ORCA_ST_ENCODING_HPP
#define ORCA_ST_ENCODING_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "orca/tensor.hpp"
#include "orca/zorder.hpp"

namespace orca {

// Overlapping temporal patches of the observation window. The series is
// end-padded by repeating the final step W times, making the patch count
//   S = floor((T - L) / W) + 2
// with every original index covered (requires W <= L <= T + W).
struct PatchSet {
    std::size_t count = 0;   // S
    std::size_t len = 0;     // L
    std::size_t stride = 0;  // W
    std::size_t features = 0;
    std::size_t buoys = 0;
    std::vector<float> data;  // S x F x M x L

    float at(std::size_t s, std::size_t f, std::size_t m, std::size_t l) const {
        return data[((s * features + f) * buoys + m) * len + l];
    }
};

inline std::size_t patch_count(std::size_t steps, std::size_t len, std::size_t stride) {
    if (stride == 0 || len == 0) {
        throw ContractError("patching needs positive length and stride");
    }
    if (stride > len) {
        throw ContractError("patch stride " + std::to_string(stride) + " exceeds patch length " +
                            std::to_string(len) + "; patches would leave gaps");
    }
    if (len > steps + stride) {
        throw ContractError("patch length " + std::to_string(len) + " exceeds padded series " +
                            std::to_string(steps + stride));
    }
    // Floor division on a possibly negative numerator (L may exceed T).
    const long long num = static_cast<long long>(steps) - static_cast<long long>(len);
    const long long den = static_cast<long long>(stride);
    long long q = num / den;
    if (num % den != 0 && num < 0) {
        --q;
    }
    return static_cast<std::size_t>(q + 2);
}

// window: F x M x T observation values (t fastest).
inline PatchSet make_patches(const std::vector<float>& window, std::size_t features,
                             std::size_t buoys, std::size_t steps, std::size_t len,
                             std::size_t stride) {
    if (window.size() != features * buoys * steps) {
        throw ShapeError("make_patches: window has " + std::to_string(window.size()) +
                         " values, expected " + std::to_string(features * buoys * steps));
    }
    PatchSet set;
    set.count = patch_count(steps, len, stride);
    set.len = len;
    set.stride = stride;
    set.features = features;
    set.buoys = buoys;
    set.data.resize(set.count * features * buoys * len);
    for (std::size_t s = 0; s < set.count; ++s) {
        for (std::size_t f = 0; f < features; ++f) {
            for (std::size_t m = 0; m < buoys; ++m) {
                const float* series = window.data() + (f * buoys + m) * steps;
                for (std::size_t l = 0; l < len; ++l) {
                    const std::size_t t = s * stride + l;
                    // Padded tail repeats the final step.
                    const float v = series[t < steps ? t : steps - 1];
                    set.data[((s * features + f) * buoys + m) * len + l] = v;
                }
            }
        }
    }
    return set;
}

// H_loc = ReLU(w3 Z + b3), one row per buoy.
template <typename T>
Tensor<T> spatial_embed(const Tensor<T>& zbits, const Tensor<T>& w3, const Tensor<T>& b3) {
    return relu(linear(zbits, w3, b3));
}

// Z-order bit rows as a tensor leaf (M x A of 0/1 values).
template <typename T>
Tensor<T> zorder_tensor(const std::vector<std::vector<std::uint8_t>>& zbits) {
    const std::size_t buoys = zbits.size();
    const std::size_t depth = zbits.empty() ? 0 : zbits[0].size();
    std::vector<T> flat;
    flat.reserve(buoys * depth);
    for (const auto& row : zbits) {
        for (std::uint8_t b : row) {
            flat.push_back(static_cast<T>(b));
        }
    }
    return Tensor<T>::leaf({buoys, depth}, std::move(flat));
}

// H_temp = ReLU(w4 C + b4), applied per (s, f, m) patch; returns the
// S x F x M x D stack.
template <typename T>
Tensor<T> temporal_embed(const PatchSet& patches, const Tensor<T>& w4, const Tensor<T>& b4) {
    const std::size_t S = patches.count, F = patches.features, M = patches.buoys,
                      L = patches.len;
    const std::size_t D = w4.shape()[0];
    std::vector<Tensor<T>> per_feature;
    per_feature.reserve(F);
    for (std::size_t f = 0; f < F; ++f) {
        std::vector<Tensor<T>> per_buoy;
        per_buoy.reserve(M);
        for (std::size_t m = 0; m < M; ++m) {
            std::vector<T> fiber(S * L);
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t l = 0; l < L; ++l) {
                    fiber[s * L + l] = static_cast<T>(patches.at(s, f, m, l));
                }
            }
            auto c = Tensor<T>::leaf({S, L}, std::move(fiber));
            auto h = relu(linear(c, w4, b4));              // S x D
            per_buoy.push_back(reshape(h, {S, 1, 1, D}));  // stackable fiber
        }
        per_feature.push_back(concat(per_buoy, 2));  // S x 1 x M x D
    }
    return concat(per_feature, 1);  // S x F x M x D
}

// H_input = [H_prompt; H_loc; H_temp] along the token axis, broadcast to
// every (f, m) fiber: prompt rows are shared by all fibers, the single
// location token carries buoy m's row for every feature, and the patch
// tokens come last. Token count I = (R+E) + 1 + S (the location token is
// omitted when the spatial module is ablated).
template <typename T>
Tensor<T> assemble_input(const Tensor<T>& h_prompt, const std::optional<Tensor<T>>& h_loc,
                         const Tensor<T>& h_temp) {
    const std::size_t D = h_prompt.shape()[1];
    if (h_temp.rank() != 4 || h_temp.shape()[3] != D) {
        throw ShapeError("assemble_input: H_temp must be S x F x M x " + std::to_string(D) +
                         ", got " + shape_str(h_temp.shape()));
    }
    const std::size_t S = h_temp.shape()[0];
    const std::size_t F = h_temp.shape()[1];
    const std::size_t M = h_temp.shape()[2];
    if (h_loc && (h_loc->rank() != 2 || h_loc->shape()[0] != M || h_loc->shape()[1] != D)) {
        throw ShapeError("assemble_input: H_loc must be " + std::to_string(M) + " x " +
                         std::to_string(D) + ", got " + shape_str(h_loc->shape()));
    }
    const std::size_t prompt_rows = h_prompt.shape()[0];
    const std::size_t tokens = prompt_rows + (h_loc ? 1 : 0) + S;

    std::vector<Tensor<T>> per_feature;
    per_feature.reserve(F);
    for (std::size_t f = 0; f < F; ++f) {
        std::vector<Tensor<T>> per_buoy;
        per_buoy.reserve(M);
        for (std::size_t m = 0; m < M; ++m) {
            auto temp_fiber = reshape(slice(slice(h_temp, 1, f, 1), 2, m, 1), {S, D});
            std::vector<Tensor<T>> rows;
            rows.push_back(h_prompt);
            if (h_loc) {
                rows.push_back(slice(*h_loc, 0, m, 1));
            }
            rows.push_back(temp_fiber);
            auto fiber = concat(rows, 0);  // I x D
            per_buoy.push_back(reshape(fiber, {tokens, 1, 1, D}));
        }
        per_feature.push_back(concat(per_buoy, 2));
    }
    return concat(per_feature, 1);  // I x F x M x D
}

} // namespace orca

#endif
