#ifndef ORCA_PROMPT_ENCODING_HPP
#define ORCA_PROMPT_ENCODING_HPP

#include <vector>

#include "orca/prompt_text.hpp"
#include "orca/tensor.hpp"

namespace orca {

// Embeds prompt tokens by table lookup. The caller handles the empty
// prompt (E = 0) by not building P at all; tensors carry positive extents
// only.
template <typename T>
Tensor<T> tokenize_and_embed(const std::vector<std::size_t>& token_ids, const Tensor<T>& table) {
    return gather_rows(table, token_ids);
}

// The soft-prompt encoder: a single-layer recurrent cell of the model
// width run along the R soft tokens, followed by two affine maps,
//   H_q = w1 (ReLU(w2 LSTMstates(Q) + b2)) + b1.
// Q and the affine parameters train; the cell's internal weights belong
// to the frozen stack.
template <typename T>
struct SoftPromptNet {
    Tensor<T> q;        // R x D, trainable
    Tensor<T> lstm_wx;  // 4D x D
    Tensor<T> lstm_wh;  // 4D x D
    Tensor<T> lstm_b;   // 4D
    Tensor<T> w1;       // D x D, trainable
    Tensor<T> b1;       // D, trainable
    Tensor<T> w2;       // D x D, trainable
    Tensor<T> b2;       // D, trainable
};

// Hidden-state sequence of the recurrent cell: one row per soft token.
template <typename T>
Tensor<T> lstm_states(const Tensor<T>& input, const Tensor<T>& wx, const Tensor<T>& wh,
                      const Tensor<T>& bias) {
    const std::size_t steps = input.shape()[0];
    const std::size_t width = input.shape()[1];
    auto h = Tensor<T>::zeros({1, width});
    auto c = Tensor<T>::zeros({1, width});
    std::vector<Tensor<T>> states;
    states.reserve(steps);
    for (std::size_t r = 0; r < steps; ++r) {
        auto x = slice(input, 0, r, 1);
        auto pre = add(add(matmul(x, transpose(wx)), matmul(h, transpose(wh))), bias);
        auto gate_in = sigmoid(slice(pre, 1, 0, width));
        auto gate_forget = sigmoid(slice(pre, 1, width, width));
        auto gate_cell = tanh(slice(pre, 1, 2 * width, width));
        auto gate_out = sigmoid(slice(pre, 1, 3 * width, width));
        c = add(mul(gate_forget, c), mul(gate_in, gate_cell));
        h = mul(gate_out, tanh(c));
        states.push_back(h);
    }
    return concat(states, 0);
}

template <typename T>
Tensor<T> encode_soft_prompt(const SoftPromptNet<T>& net) {
    if (!net.q.defined() || net.q.shape()[0] == 0) {
        throw ContractError("soft prompt must be nonempty");
    }
    auto states = lstm_states(net.q, net.lstm_wx, net.lstm_wh, net.lstm_b);
    auto hidden = relu(linear(states, net.w2, net.b2));
    return linear(hidden, net.w1, net.b1);
}

// H_prompt = [H_q; P], rows of the encoded soft prompt first. P may be
// absent when the rendered prompt tokenizes to nothing.
template <typename T>
Tensor<T> build_prompt_repr(const Tensor<T>& h_q, const Tensor<T>* p) {
    if (p == nullptr) {
        return h_q;
    }
    if (p->shape()[1] != h_q.shape()[1]) {
        throw ShapeError("build_prompt_repr: widths disagree, H_q " + shape_str(h_q.shape()) +
                         " vs P " + shape_str(p->shape()));
    }
    return concat<T>({h_q, *p}, 0);
}

} // namespace orca

#endif
