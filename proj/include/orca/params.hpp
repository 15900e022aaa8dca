#ifndef ORCA_PARAMS_HPP
#define ORCA_PARAMS_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "orca/error.hpp"
#include "orca/io.hpp"
#include "orca/tensor.hpp"

namespace orca {

// Registry of every model array with its fine-tuning flag. The freeze
// mask is the trainable bit: the backbone stack and the word-embedding
// table stay frozen; positional encodings, the soft prompt Q, and the
// adapter layers train.
template <typename T>
class ParamSet {
public:
    struct Item {
        std::string name;
        Tensor<T> tensor;
        bool trainable;
    };

    Tensor<T>& add(const std::string& name, Tensor<T> tensor, bool trainable) {
        if (index_.count(name)) {
            throw ContractError("parameter '" + name + "' registered twice");
        }
        index_[name] = items_.size();
        items_.push_back(Item{name, std::move(tensor), trainable});
        // The tensor's requires_grad flag is the mask bit the autodiff
        // engine sees.
        if (items_.back().tensor.requires_grad() != trainable) {
            throw ContractError("parameter '" + name + "' requires_grad does not match its mask");
        }
        return items_.back().tensor;
    }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    Tensor<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw ContractError("unknown parameter '" + name + "'");
        }
        return items_[it->second].tensor;
    }
    const Tensor<T>& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) {
            throw ContractError("unknown parameter '" + name + "'");
        }
        return items_[it->second].tensor;
    }

    const std::vector<Item>& items() const { return items_; }
    std::vector<Item>& items() { return items_; }

    std::size_t trainable_count() const {
        std::size_t n = 0;
        for (const auto& it : items_) {
            n += it.trainable ? 1 : 0;
        }
        return n;
    }

    void zero_grads() {
        for (auto& it : items_) {
            it.tensor.zero_grad();
        }
    }

    // Deep copy of all values (for best-validation snapshots).
    std::vector<std::vector<T>> snapshot() const {
        std::vector<std::vector<T>> vals;
        vals.reserve(items_.size());
        for (const auto& it : items_) {
            vals.push_back(it.tensor.value());
        }
        return vals;
    }

    void restore(const std::vector<std::vector<T>>& vals) {
        if (vals.size() != items_.size()) {
            throw ContractError("snapshot does not match the parameter set");
        }
        for (std::size_t i = 0; i < items_.size(); ++i) {
            items_[i].tensor.mutable_value() = vals[i];
        }
    }

    // Serialization in the weight-file layout (32-bit on disk).
    std::vector<NamedArrayF32> to_arrays() const {
        std::vector<NamedArrayF32> arrays;
        arrays.reserve(items_.size());
        for (const auto& it : items_) {
            NamedArrayF32 a;
            a.name = it.name;
            a.shape = it.tensor.shape();
            a.data.reserve(it.tensor.numel());
            for (T v : it.tensor.value()) {
                a.data.push_back(static_cast<float>(v));
            }
            arrays.push_back(std::move(a));
        }
        return arrays;
    }

    // Overwrites matching arrays; every unknown name or shape mismatch is
    // collected and reported in one error. Arrays absent from the file
    // keep their current (seeded) values.
    void load_arrays(const std::vector<NamedArrayF32>& arrays) {
        std::string offenders;
        for (const auto& a : arrays) {
            auto it = index_.find(a.name);
            if (it == index_.end()) {
                offenders += (offenders.empty() ? "" : ", ") + a.name + " (unknown)";
                continue;
            }
            Tensor<T>& dst = items_[it->second].tensor;
            if (dst.shape() != Shape(a.shape.begin(), a.shape.end())) {
                offenders += (offenders.empty() ? "" : ", ") + a.name + " (got " +
                             shape_str(Shape(a.shape.begin(), a.shape.end())) + ", want " +
                             shape_str(dst.shape()) + ")";
                continue;
            }
            auto& vals = dst.mutable_value();
            for (std::size_t i = 0; i < vals.size(); ++i) {
                vals[i] = static_cast<T>(a.data[i]);
            }
        }
        if (!offenders.empty()) {
            throw FormatError("weight arrays do not fit this model: " + offenders);
        }
    }

private:
    std::vector<Item> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace orca

#endif
