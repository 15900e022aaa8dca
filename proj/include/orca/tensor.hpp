#ifndef ORCA_TENSOR_HPP
#define ORCA_TENSOR_HPP

// Dense n-dimensional tensors with reverse-mode automatic differentiation.
//
// The graph is define-by-run: every operation allocates a fresh node that
// holds its forward value and a closure accumulating gradients into its
// parents. Leaves (parameters, constants) persist across steps; operation
// nodes are released when the last Tensor handle referencing them dies.
// Default scalar type for training is float; gradient verification
// instantiates the same code with double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "orca/error.hpp"

namespace orca {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) {
        n *= e;
    }
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << s[i] << (i + 1 < s.size() ? "x" : "");
    }
    os << ']';
    return os.str();
}

inline void require_valid_shape(const char* op, const Shape& s) {
    if (s.empty()) {
        throw ShapeError(std::string(op) + ": rank-0 shape is not allowed");
    }
    for (std::size_t e : s) {
        if (e == 0) {
            throw ShapeError(std::string(op) + ": zero extent in shape " + shape_str(s));
        }
    }
}

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;                  // empty until backward touches this node
    bool requires_grad = false;           // leaf trainability flag
    bool needs_grad = false;              // some leaf below requires grad
    const char* op = "leaf";
    int id = 0;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backprop;

    void ensure_grad() {
        if (grad.size() != value.size()) {
            grad.assign(value.size(), T(0));
        }
    }
};

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

namespace detail {
inline int next_node_id() {
    static int counter = 0;
    return ++counter;
}
} // namespace detail

// Value-semantics handle over a graph node.
template <typename T>
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr<T> n) : node_(std::move(n)) {}

    static Tensor leaf(Shape shape, std::vector<T> data, bool requires_grad = false) {
        require_valid_shape("tensor", shape);
        if (shape_numel(shape) != data.size()) {
            throw ShapeError("tensor: shape " + shape_str(shape) + " expects " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(data.size()));
        }
        auto n = std::make_shared<Node<T>>();
        n->shape = std::move(shape);
        n->value = std::move(data);
        n->requires_grad = requires_grad;
        n->needs_grad = requires_grad;
        n->id = detail::next_node_id();
        return Tensor(std::move(n));
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        const std::size_t n = shape_numel(shape);
        return leaf(std::move(shape), std::vector<T>(n, T(0)), requires_grad);
    }

    static Tensor full(Shape shape, T v, bool requires_grad = false) {
        const std::size_t n = shape_numel(shape);
        return leaf(std::move(shape), std::vector<T>(n, v), requires_grad);
    }

    static Tensor scalar(T v) { return leaf({1}, {v}); }

    bool defined() const { return static_cast<bool>(node_); }
    const Shape& shape() const { return node_->shape; }
    std::size_t numel() const { return node_->value.size(); }
    std::size_t rank() const { return node_->shape.size(); }
    const std::vector<T>& value() const { return node_->value; }
    bool requires_grad() const { return node_->requires_grad; }
    int id() const { return node_->id; }

    // Direct mutation is reserved for leaves: optimizers step parameter
    // values in place, finite differencing perturbs them.
    std::vector<T>& mutable_value() { return node_->value; }

    // Gradient of the last backward pass; zeros when this leaf was not on
    // the path to the loss.
    std::vector<T> grad() const {
        if (node_->grad.size() == node_->value.size()) {
            return node_->grad;
        }
        return std::vector<T>(node_->value.size(), T(0));
    }

    void zero_grad() { node_->grad.assign(node_->value.size(), T(0)); }

    T item() const {
        if (numel() != 1) {
            throw ContractError("item: tensor " + shape_str(shape()) + " is not scalar");
        }
        return node_->value[0];
    }

    NodePtr<T> node() const { return node_; }

private:
    NodePtr<T> node_;
};

// ------------------------------------------------------------------
// Graph record
// ------------------------------------------------------------------

// Topologically ordered trace of the operations below a tensor: every
// entry's inputs appear earlier in `order`. backward() walks the same
// order in reverse, so each node is visited exactly once.
struct GraphTrace {
    struct Entry {
        int id;
        const char* op;
        std::vector<int> inputs;
    };
    std::vector<Entry> order;
};

namespace detail {

template <typename T>
std::vector<Node<T>*> topo_order(Node<T>* root) {
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> done;
    // Iterative post-order DFS over parent edges.
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    std::unordered_set<Node<T>*> on_stack{root};
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node<T>* p = node->parents[next].get();
            ++next;
            if (!done.count(p) && !on_stack.count(p)) {
                stack.emplace_back(p, 0);
                on_stack.insert(p);
            }
        } else {
            done.insert(node);
            on_stack.erase(node);
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace detail

template <typename T>
GraphTrace trace(const Tensor<T>& out) {
    GraphTrace g;
    for (Node<T>* n : detail::topo_order(out.node().get())) {
        GraphTrace::Entry e;
        e.id = n->id;
        e.op = n->op;
        for (const auto& p : n->parents) {
            e.inputs.push_back(p->id);
        }
        g.order.push_back(std::move(e));
    }
    return g;
}

// Reverse-mode sweep from a scalar loss. Gradients of all nodes reachable
// from `loss` are reset first, so each call yields the gradient of exactly
// this loss.
template <typename T>
void backward(const Tensor<T>& loss) {
    if (loss.numel() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(loss.shape()));
    }
    auto order = detail::topo_order(loss.node().get());
    for (Node<T>* n : order) {
        n->grad.assign(n->value.size(), T(0));
    }
    loss.node()->grad[0] = T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node<T>* n = *it;
        if (n->backprop && n->needs_grad) {
            n->backprop(*n);
        }
    }
}

// ------------------------------------------------------------------
// Operation plumbing
// ------------------------------------------------------------------

namespace detail {

template <typename T>
NodePtr<T> make_op_node(const char* op, Shape shape, std::vector<NodePtr<T>> parents) {
    require_valid_shape(op, shape);
    auto n = std::make_shared<Node<T>>();
    n->op = op;
    n->shape = std::move(shape);
    n->value.assign(shape_numel(n->shape), T(0));
    n->parents = std::move(parents);
    n->id = next_node_id();
    for (const auto& p : n->parents) {
        n->needs_grad = n->needs_grad || p->needs_grad;
    }
    return n;
}

// Right-aligned broadcasting (an axis must match or be 1; missing leading
// axes broadcast). stride_* give, per output axis, the step through the
// input's flat data; broadcast axes step 0.
struct BroadcastPlan {
    Shape out;
    std::vector<std::size_t> stride_a;
    std::vector<std::size_t> stride_b;
};

inline BroadcastPlan broadcast_plan(const char* op, const Shape& a, const Shape& b) {
    const std::size_t rank = std::max(a.size(), b.size());
    BroadcastPlan plan;
    plan.out.assign(rank, 1);
    plan.stride_a.assign(rank, 0);
    plan.stride_b.assign(rank, 0);
    // Natural row-major strides.
    std::vector<std::size_t> sa(a.size()), sb(b.size());
    std::size_t acc = 1;
    for (std::size_t i = a.size(); i-- > 0;) {
        sa[i] = acc;
        acc *= a[i];
    }
    acc = 1;
    for (std::size_t i = b.size(); i-- > 0;) {
        sb[i] = acc;
        acc *= b[i];
    }
    for (std::size_t d = 0; d < rank; ++d) {
        const std::size_t ia = a.size() + d >= rank ? d - (rank - a.size()) : SIZE_MAX;
        const std::size_t ib = b.size() + d >= rank ? d - (rank - b.size()) : SIZE_MAX;
        const std::size_t ea = ia == SIZE_MAX ? 1 : a[ia];
        const std::size_t eb = ib == SIZE_MAX ? 1 : b[ib];
        if (ea != eb && ea != 1 && eb != 1) {
            throw ShapeError(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " +
                             shape_str(b) + " (axis " + std::to_string(d) + ": " +
                             std::to_string(ea) + " vs " + std::to_string(eb) + ")");
        }
        plan.out[d] = std::max(ea, eb);
        plan.stride_a[d] = (ia == SIZE_MAX || ea == 1) ? 0 : sa[ia];
        plan.stride_b[d] = (ib == SIZE_MAX || eb == 1) ? 0 : sb[ib];
    }
    return plan;
}

// Calls fn(out_flat, a_flat, b_flat) for every output element.
template <class Fn>
void for_broadcast(const BroadcastPlan& plan, Fn fn) {
    const std::size_t rank = plan.out.size();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t ia = 0, ib = 0;
    const std::size_t total = shape_numel(plan.out);
    for (std::size_t o = 0; o < total; ++o) {
        fn(o, ia, ib);
        // Odometer increment, rightmost axis fastest.
        for (std::size_t d = rank; d-- > 0;) {
            ++idx[d];
            ia += plan.stride_a[d];
            ib += plan.stride_b[d];
            if (idx[d] < plan.out[d]) {
                break;
            }
            idx[d] = 0;
            ia -= plan.stride_a[d] * plan.out[d];
            ib -= plan.stride_b[d] * plan.out[d];
        }
    }
}

// outer/inner decomposition around one axis: flat = (outer * extent + k) * inner + inner_idx
struct AxisSplit {
    std::size_t outer;
    std::size_t extent;
    std::size_t inner;
};

inline AxisSplit axis_split(const char* op, const Shape& s, std::size_t axis) {
    if (axis >= s.size()) {
        throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for shape " + shape_str(s));
    }
    AxisSplit sp{1, s[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) {
        sp.outer *= s[i];
    }
    for (std::size_t i = axis + 1; i < s.size(); ++i) {
        sp.inner *= s[i];
    }
    return sp;
}

} // namespace detail

// ------------------------------------------------------------------
// Elementwise primitives
// ------------------------------------------------------------------

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    auto n = detail::make_op_node<T>("relu", x.shape(), {x.node()});
    const auto& xv = x.value();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        n->value[i] = xv[i] > T(0) ? xv[i] : T(0);
    }
    n->backprop = [](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            // Subgradient at 0 is 0.
            if (p.value[i] > T(0)) {
                p.grad[i] += self.grad[i];
            }
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    auto n = detail::make_op_node<T>("sigmoid", x.shape(), {x.node()});
    const auto& xv = x.value();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        n->value[i] = T(1) / (T(1) + std::exp(-xv[i]));
    }
    n->backprop = [](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const T y = self.value[i];
            p.grad[i] += self.grad[i] * y * (T(1) - y);
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
    auto n = detail::make_op_node<T>("tanh", x.shape(), {x.node()});
    const auto& xv = x.value();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        n->value[i] = std::tanh(xv[i]);
    }
    n->backprop = [](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            const T y = self.value[i];
            p.grad[i] += self.grad[i] * (T(1) - y * y);
        }
    };
    return Tensor<T>(n);
}

namespace detail {

enum class BinKind { add, sub, mul };

template <typename T>
Tensor<T> binary_op(const char* name, BinKind kind, const Tensor<T>& a, const Tensor<T>& b) {
    auto plan = broadcast_plan(name, a.shape(), b.shape());
    auto n = make_op_node<T>(name, plan.out, {a.node(), b.node()});
    const auto& av = a.value();
    const auto& bv = b.value();
    for_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
        switch (kind) {
            case BinKind::add: n->value[o] = av[ia] + bv[ib]; break;
            case BinKind::sub: n->value[o] = av[ia] - bv[ib]; break;
            case BinKind::mul: n->value[o] = av[ia] * bv[ib]; break;
        }
    });
    n->backprop = [plan, kind](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.needs_grad) pa.ensure_grad();
        if (pb.needs_grad) pb.ensure_grad();
        for_broadcast(plan, [&](std::size_t o, std::size_t ia, std::size_t ib) {
            const T g = self.grad[o];
            switch (kind) {
                case BinKind::add:
                    if (pa.needs_grad) pa.grad[ia] += g;
                    if (pb.needs_grad) pb.grad[ib] += g;
                    break;
                case BinKind::sub:
                    if (pa.needs_grad) pa.grad[ia] += g;
                    if (pb.needs_grad) pb.grad[ib] -= g;
                    break;
                case BinKind::mul:
                    if (pa.needs_grad) pa.grad[ia] += g * pb.value[ib];
                    if (pb.needs_grad) pb.grad[ib] += g * pa.value[ia];
                    break;
            }
        });
    };
    return Tensor<T>(n);
}

} // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("add", detail::BinKind::add, a, b);
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("sub", detail::BinKind::sub, a, b);
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return detail::binary_op("mul", detail::BinKind::mul, a, b);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T c) {
    auto n = detail::make_op_node<T>("scale", x.shape(), {x.node()});
    const auto& xv = x.value();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        n->value[i] = c * xv[i];
    }
    n->backprop = [c](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            p.grad[i] += c * self.grad[i];
        }
    };
    return Tensor<T>(n);
}

// ------------------------------------------------------------------
// Linear algebra
// ------------------------------------------------------------------

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw ShapeError("matmul: expects rank-2 operands, got " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    }
    const std::size_t n_ = a.shape()[0], k_ = a.shape()[1];
    const std::size_t k2 = b.shape()[0], m_ = b.shape()[1];
    if (k_ != k2) {
        throw ShapeError("matmul: inner extents disagree, " + shape_str(a.shape()) + " * " +
                         shape_str(b.shape()) + " (axis 1 of lhs is " + std::to_string(k_) +
                         ", axis 0 of rhs is " + std::to_string(k2) + ")");
    }
    auto n = detail::make_op_node<T>("matmul", {n_, m_}, {a.node(), b.node()});
    const T* av = a.value().data();
    const T* bv = b.value().data();
    T* cv = n->value.data();
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t l = 0; l < k_; ++l) {
            const T x = av[i * k_ + l];
            const T* brow = bv + l * m_;
            T* crow = cv + i * m_;
            for (std::size_t j = 0; j < m_; ++j) {
                crow[j] += x * brow[j];
            }
        }
    }
    n->backprop = [n_, k_, m_](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        const T* g = self.grad.data();
        if (pa.needs_grad) {
            pa.ensure_grad();
            // dA = dC * B^T
            const T* bv = pb.value.data();
            for (std::size_t i = 0; i < n_; ++i) {
                for (std::size_t l = 0; l < k_; ++l) {
                    T acc = T(0);
                    const T* grow = g + i * m_;
                    const T* brow = bv + l * m_;
                    for (std::size_t j = 0; j < m_; ++j) {
                        acc += grow[j] * brow[j];
                    }
                    pa.grad[i * k_ + l] += acc;
                }
            }
        }
        if (pb.needs_grad) {
            pb.ensure_grad();
            // dB = A^T * dC
            const T* av = pa.value.data();
            for (std::size_t i = 0; i < n_; ++i) {
                const T* grow = g + i * m_;
                for (std::size_t l = 0; l < k_; ++l) {
                    const T x = av[i * k_ + l];
                    T* brow = pb.grad.data() + l * m_;
                    for (std::size_t j = 0; j < m_; ++j) {
                        brow[j] += x * grow[j];
                    }
                }
            }
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
    if (x.rank() != 2) {
        throw ShapeError("transpose: expects rank-2 operand, got " + shape_str(x.shape()));
    }
    const std::size_t r = x.shape()[0], c = x.shape()[1];
    auto n = detail::make_op_node<T>("transpose", {c, r}, {x.node()});
    const auto& xv = x.value();
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
            n->value[j * r + i] = xv[i * c + j];
        }
    }
    n->backprop = [r, c](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = 0; j < c; ++j) {
                p.grad[i * c + j] += self.grad[j * r + i];
            }
        }
    };
    return Tensor<T>(n);
}

// ------------------------------------------------------------------
// Structure: concat / slice / reshape / gather
// ------------------------------------------------------------------

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
    if (parts.empty()) {
        throw ContractError("concat: needs at least one part");
    }
    const Shape& first = parts[0].shape();
    if (axis >= first.size()) {
        throw ShapeError("concat: axis " + std::to_string(axis) + " out of range for shape " +
                         shape_str(first));
    }
    Shape out = first;
    std::size_t total_axis = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != first.size()) {
            throw ShapeError("concat: rank mismatch, " + shape_str(first) + " vs " + shape_str(s));
        }
        for (std::size_t d = 0; d < s.size(); ++d) {
            if (d != axis && s[d] != first[d]) {
                throw ShapeError("concat: axis " + std::to_string(d) + " disagrees, " +
                                 shape_str(first) + " vs " + shape_str(s));
            }
        }
        total_axis += p.shape()[axis];
    }
    out[axis] = total_axis;
    std::vector<NodePtr<T>> parents;
    parents.reserve(parts.size());
    for (const auto& p : parts) {
        parents.push_back(p.node());
    }
    auto n = detail::make_op_node<T>("concat", out, std::move(parents));
    const auto sp = detail::axis_split("concat", out, axis);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const std::size_t ext = p.shape()[axis];
        const auto& pv = p.value();
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t k = 0; k < ext; ++k) {
                const T* src = pv.data() + (o * ext + k) * sp.inner;
                T* dst = n->value.data() + (o * sp.extent + offset + k) * sp.inner;
                std::copy(src, src + sp.inner, dst);
            }
        }
        offset += ext;
    }
    n->backprop = [sp, axis](Node<T>& self) {
        std::size_t off = 0;
        for (auto& pp : self.parents) {
            auto& p = *pp;
            const std::size_t ext = p.shape[axis];
            if (p.needs_grad) {
                p.ensure_grad();
                for (std::size_t o = 0; o < sp.outer; ++o) {
                    for (std::size_t k = 0; k < ext; ++k) {
                        const T* src = self.grad.data() + (o * sp.extent + off + k) * sp.inner;
                        T* dst = p.grad.data() + (o * ext + k) * sp.inner;
                        for (std::size_t i = 0; i < sp.inner; ++i) {
                            dst[i] += src[i];
                        }
                    }
                }
            }
            off += ext;
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t start, std::size_t len) {
    const auto sp = detail::axis_split("slice", x.shape(), axis);
    if (len == 0 || start + len > sp.extent) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + len) + ") invalid for axis " + std::to_string(axis) +
                         " of " + shape_str(x.shape()));
    }
    Shape out = x.shape();
    out[axis] = len;
    auto n = detail::make_op_node<T>("slice", out, {x.node()});
    const auto& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t k = 0; k < len; ++k) {
            const T* src = xv.data() + (o * sp.extent + start + k) * sp.inner;
            T* dst = n->value.data() + (o * len + k) * sp.inner;
            std::copy(src, src + sp.inner, dst);
        }
    }
    n->backprop = [sp, start, len](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t k = 0; k < len; ++k) {
                const T* src = self.grad.data() + (o * len + k) * sp.inner;
                T* dst = p.grad.data() + (o * sp.extent + start + k) * sp.inner;
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    dst[i] += src[i];
                }
            }
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape new_shape) {
    require_valid_shape("reshape", new_shape);
    if (shape_numel(new_shape) != x.numel()) {
        throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(new_shape));
    }
    auto n = detail::make_op_node<T>("reshape", new_shape, {x.node()});
    n->value = x.value();
    n->backprop = [](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
            p.grad[i] += self.grad[i];
        }
    };
    return Tensor<T>(n);
}

// Row lookup into a rank-2 table; gradients scatter-add back into the
// table, so an embedding stays correct whether frozen or trainable.
template <typename T>
Tensor<T> gather_rows(const Tensor<T>& table, const std::vector<std::size_t>& ids) {
    if (table.rank() != 2) {
        throw ShapeError("gather_rows: table must be rank-2, got " + shape_str(table.shape()));
    }
    if (ids.empty()) {
        throw ContractError("gather_rows: empty id list");
    }
    const std::size_t rows = table.shape()[0], width = table.shape()[1];
    for (std::size_t id : ids) {
        if (id >= rows) {
            throw ShapeError("gather_rows: id " + std::to_string(id) + " out of range for table " +
                             shape_str(table.shape()));
        }
    }
    auto n = detail::make_op_node<T>("gather_rows", {ids.size(), width}, {table.node()});
    const auto& tv = table.value();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        std::copy(tv.data() + ids[i] * width, tv.data() + (ids[i] + 1) * width,
                  n->value.data() + i * width);
    }
    n->backprop = [ids, width](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const T* src = self.grad.data() + i * width;
            T* dst = p.grad.data() + ids[i] * width;
            for (std::size_t j = 0; j < width; ++j) {
                dst[j] += src[j];
            }
        }
    };
    return Tensor<T>(n);
}

// ------------------------------------------------------------------
// Reductions
// ------------------------------------------------------------------

template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::size_t axis) {
    const auto sp = detail::axis_split("mean", x.shape(), axis);
    if (x.rank() == 1) {
        // Reducing the only axis yields a scalar.
        auto n = detail::make_op_node<T>("mean", Shape{1}, {x.node()});
        T acc = T(0);
        for (T v : x.value()) acc += v;
        n->value[0] = acc / static_cast<T>(x.numel());
        const std::size_t count = x.numel();
        n->backprop = [count](Node<T>& self) {
            auto& p = *self.parents[0];
            if (!p.needs_grad) return;
            p.ensure_grad();
            const T g = self.grad[0] / static_cast<T>(count);
            for (auto& gv : p.grad) gv += g;
        };
        return Tensor<T>(n);
    }
    Shape out;
    for (std::size_t d = 0; d < x.rank(); ++d) {
        if (d != axis) out.push_back(x.shape()[d]);
    }
    auto n = detail::make_op_node<T>("mean", out, {x.node()});
    const auto& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            T acc = T(0);
            for (std::size_t k = 0; k < sp.extent; ++k) {
                acc += xv[(o * sp.extent + k) * sp.inner + i];
            }
            n->value[o * sp.inner + i] = acc / static_cast<T>(sp.extent);
        }
    }
    n->backprop = [sp](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        const T inv = T(1) / static_cast<T>(sp.extent);
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t k = 0; k < sp.extent; ++k) {
                for (std::size_t i = 0; i < sp.inner; ++i) {
                    p.grad[(o * sp.extent + k) * sp.inner + i] +=
                        self.grad[o * sp.inner + i] * inv;
                }
            }
        }
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> sum_all(const Tensor<T>& x) {
    auto n = detail::make_op_node<T>("sum_all", Shape{1}, {x.node()});
    T acc = T(0);
    for (T v : x.value()) acc += v;
    n->value[0] = acc;
    n->backprop = [](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        const T g = self.grad[0];
        for (auto& gv : p.grad) gv += g;
    };
    return Tensor<T>(n);
}

template <typename T>
Tensor<T> mean_all(const Tensor<T>& x) {
    return scale(sum_all(x), T(1) / static_cast<T>(x.numel()));
}

// ------------------------------------------------------------------
// Normalization and attention pieces
// ------------------------------------------------------------------

template <typename T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis) {
    const auto sp = detail::axis_split("softmax", x.shape(), axis);
    auto n = detail::make_op_node<T>("softmax", x.shape(), {x.node()});
    const auto& xv = x.value();
    for (std::size_t o = 0; o < sp.outer; ++o) {
        for (std::size_t i = 0; i < sp.inner; ++i) {
            T mx = xv[(o * sp.extent) * sp.inner + i];
            for (std::size_t k = 1; k < sp.extent; ++k) {
                mx = std::max(mx, xv[(o * sp.extent + k) * sp.inner + i]);
            }
            T denom = T(0);
            for (std::size_t k = 0; k < sp.extent; ++k) {
                const std::size_t at = (o * sp.extent + k) * sp.inner + i;
                const T e = std::exp(xv[at] - mx);
                n->value[at] = e;
                denom += e;
            }
            for (std::size_t k = 0; k < sp.extent; ++k) {
                n->value[(o * sp.extent + k) * sp.inner + i] /= denom;
            }
        }
    }
    n->backprop = [sp](Node<T>& self) {
        auto& p = *self.parents[0];
        if (!p.needs_grad) return;
        p.ensure_grad();
        for (std::size_t o = 0; o < sp.outer; ++o) {
            for (std::size_t i = 0; i < sp.inner; ++i) {
                T dot = T(0);
                for (std::size_t k = 0; k < sp.extent; ++k) {
                    const std::size_t at = (o * sp.extent + k) * sp.inner + i;
                    dot += self.grad[at] * self.value[at];
                }
                for (std::size_t k = 0; k < sp.extent; ++k) {
                    const std::size_t at = (o * sp.extent + k) * sp.inner + i;
                    p.grad[at] += self.value[at] * (self.grad[at] - dot);
                }
            }
        }
    };
    return Tensor<T>(n);
}

// Normalizes the last axis to zero mean / unit variance, then applies the
// elementwise affine (gain, bias), each shaped like that axis.
template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias,
                     T eps = T(1e-5)) {
    const std::size_t width = x.shape().back();
    if (gain.shape() != Shape{width} || bias.shape() != Shape{width}) {
        throw ShapeError("layer_norm: gain/bias must be [" + std::to_string(width) + "], got " +
                         shape_str(gain.shape()) + " and " + shape_str(bias.shape()));
    }
    const std::size_t rows = x.numel() / width;
    auto n = detail::make_op_node<T>("layer_norm", x.shape(), {x.node(), gain.node(), bias.node()});
    const auto& xv = x.value();
    const auto& gv = gain.value();
    const auto& bv = bias.value();
    std::vector<T> mu(rows), istd(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const T* row = xv.data() + r * width;
        T m = T(0);
        for (std::size_t j = 0; j < width; ++j) m += row[j];
        m /= static_cast<T>(width);
        T var = T(0);
        for (std::size_t j = 0; j < width; ++j) {
            const T d = row[j] - m;
            var += d * d;
        }
        var /= static_cast<T>(width);
        mu[r] = m;
        istd[r] = T(1) / std::sqrt(var + eps);
        for (std::size_t j = 0; j < width; ++j) {
            n->value[r * width + j] = (row[j] - m) * istd[r] * gv[j] + bv[j];
        }
    }
    n->backprop = [rows, width, mu, istd](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pg = *self.parents[1];
        auto& pb = *self.parents[2];
        if (px.needs_grad) px.ensure_grad();
        if (pg.needs_grad) pg.ensure_grad();
        if (pb.needs_grad) pb.ensure_grad();
        const auto& gv = pg.value;
        for (std::size_t r = 0; r < rows; ++r) {
            const T* xrow = px.value.data() + r * width;
            const T* grow = self.grad.data() + r * width;
            T m1 = T(0), m2 = T(0);
            for (std::size_t j = 0; j < width; ++j) {
                const T xh = (xrow[j] - mu[r]) * istd[r];
                const T dyh = grow[j] * gv[j];
                m1 += dyh;
                m2 += dyh * xh;
                if (pg.needs_grad) pg.grad[j] += grow[j] * xh;
                if (pb.needs_grad) pb.grad[j] += grow[j];
            }
            if (!px.needs_grad) continue;
            m1 /= static_cast<T>(width);
            m2 /= static_cast<T>(width);
            for (std::size_t j = 0; j < width; ++j) {
                const T xh = (xrow[j] - mu[r]) * istd[r];
                const T dyh = grow[j] * gv[j];
                px.grad[r * width + j] += istd[r] * (dyh - m1 - xh * m2);
            }
        }
    };
    return Tensor<T>(n);
}

// x [n x in] * W^T [in x out] + b [out], the shape every adapter layer uses.
template <typename T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
    return add(matmul(x, transpose(weight)), bias);
}

// ------------------------------------------------------------------
// Finite-difference oracle
// ------------------------------------------------------------------

// Central-difference gradient of a scalar-valued function of one leaf
// tensor. The callable must re-evaluate from x's current values.
template <typename T, class F>
std::vector<T> finite_diff_gradient(F&& f, Tensor<T>& x, T h) {
    std::vector<T> g(x.numel());
    auto& xv = x.mutable_value();
    for (std::size_t i = 0; i < xv.size(); ++i) {
        const T keep = xv[i];
        xv[i] = keep + h;
        const T fp = static_cast<T>(f());
        xv[i] = keep - h;
        const T fm = static_cast<T>(f());
        xv[i] = keep;
        if (!std::isfinite(static_cast<double>(fp)) || !std::isfinite(static_cast<double>(fm))) {
            throw NumericError("finite_diff_gradient: non-finite objective at coordinate " +
                               std::to_string(i));
        }
        g[i] = (fp - fm) / (T(2) * h);
    }
    return g;
}

} // namespace orca

#endif
