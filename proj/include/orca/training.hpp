#ifndef ORCA_TRAINING_HPP
#define ORCA_TRAINING_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "orca/grid.hpp"
#include "orca/pipeline.hpp"
#include "orca/tensor.hpp"

namespace orca {

// --- losses ---------------------------------------------------------------

// Buoy loss: mean squared error between observed and estimated SWH at
// the buoy cells, over every non-missing (buoy, step) entry of the
// window.
template <typename T>
Tensor<T> loss_buoy(const Tensor<T>& estimate, const ObsWindow& window, std::size_t swh_feature,
                    const std::vector<GridCell>& locations, std::size_t grid_cols) {
    if (estimate.rank() != 3 || estimate.shape()[2] != window.steps) {
        throw ShapeError("loss_buoy: estimate " + shape_str(estimate.shape()) +
                         " does not cover a " + std::to_string(window.steps) + "-step window");
    }
    const std::size_t steps = window.steps;
    const std::size_t buoys = window.buoys;
    if (locations.size() != buoys) {
        throw ShapeError("loss_buoy: " + std::to_string(locations.size()) + " locations for " +
                         std::to_string(buoys) + " buoys");
    }

    std::vector<std::size_t> cell_rows(buoys);
    for (std::size_t m = 0; m < buoys; ++m) {
        cell_rows[m] = locations[m].row * grid_cols + locations[m].col;
    }
    std::vector<T> obs(buoys * steps, T(0));
    std::vector<T> mask(buoys * steps, T(0));
    std::size_t valid = 0;
    for (std::size_t m = 0; m < buoys; ++m) {
        for (std::size_t t = 0; t < steps; ++t) {
            if (!window.is_missing(swh_feature, m, t)) {
                obs[m * steps + t] = static_cast<T>(window.at(swh_feature, m, t));
                mask[m * steps + t] = T(1);
                ++valid;
            }
        }
    }
    if (valid == 0) {
        throw ContractError("loss undefined: every buoy observation in the window is missing");
    }

    const std::size_t cells = estimate.shape()[0] * estimate.shape()[1];
    auto flat = reshape(estimate, {cells, steps});
    auto at_buoys = gather_rows(flat, cell_rows);  // M x T
    auto obs_t = Tensor<T>::leaf({buoys, steps}, std::move(obs));
    auto mask_t = Tensor<T>::leaf({buoys, steps}, std::move(mask));
    auto diff = sub(obs_t, at_buoys);
    auto squared = mul(mul(diff, diff), mask_t);
    return scale(sum_all(squared), T(1) / static_cast<T>(valid));
}

// Physical regularizer: mean squared distance to the numerical-model
// field over every grid cell and step of the window.
template <typename T>
Tensor<T> loss_phys(const std::vector<float>& surrogate_window, const Tensor<T>& estimate) {
    if (surrogate_window.size() != estimate.numel()) {
        throw ShapeError("loss_phys: surrogate has " + std::to_string(surrogate_window.size()) +
                         " values, estimate " + shape_str(estimate.shape()));
    }
    std::vector<T> vals(surrogate_window.begin(), surrogate_window.end());
    auto reference = Tensor<T>::leaf(estimate.shape(), std::move(vals));
    auto diff = sub(reference, estimate);
    return mean_all(mul(diff, diff));
}

// L = L1 + alpha * L2. With alpha = 0 the regularizer is dropped from the
// graph entirely, so the run is structurally independent of the
// surrogate field.
template <typename T>
Tensor<T> total_loss(const Tensor<T>& l1, const Tensor<T>& l2, double alpha) {
    if (alpha < 0.0) {
        throw ContractError("alpha must be nonnegative, got " + std::to_string(alpha));
    }
    if (alpha == 0.0) {
        return l1;
    }
    return add(l1, scale(l2, static_cast<T>(alpha)));
}

// --- optimizer --------------------------------------------------------------

// Adaptive-moment first-order optimizer; steps only arrays whose mask bit
// says trainable.
template <typename T>
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParamSet<T>& params) {
        if (m_.empty()) {
            m_.resize(params.items().size());
            v_.resize(params.items().size());
            for (std::size_t i = 0; i < params.items().size(); ++i) {
                const std::size_t n = params.items()[i].tensor.numel();
                m_[i].assign(n, 0.0);
                v_[i].assign(n, 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t i = 0; i < params.items().size(); ++i) {
            auto& item = params.items()[i];
            if (!item.trainable) {
                continue;
            }
            const std::vector<T> grad = item.tensor.grad();
            auto& value = item.tensor.mutable_value();
            for (std::size_t j = 0; j < value.size(); ++j) {
                const double g = static_cast<double>(grad[j]);
                m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
                v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
                const double mhat = m_[i][j] / bc1;
                const double vhat = v_[i][j] / bc2;
                value[j] = static_cast<T>(static_cast<double>(value[j]) -
                                          lr_ * mhat / (std::sqrt(vhat) + eps_));
            }
        }
    }

private:
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// --- protocol ---------------------------------------------------------------

struct TrainConfig {
    double lr = 0.001;
    double alpha = 0.3;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 1;
    std::size_t windows_per_epoch = 8;
    std::size_t patience = 10;   // 0 disables early stopping
    bool restore_best = true;    // false keeps the final-epoch parameters

    void validate() const {
        if (lr <= 0.0) throw ContractError("learning rate must be positive");
        if (alpha < 0.0) throw ContractError("alpha must be nonnegative");
        if (max_epochs < 1) throw ContractError("need at least one epoch");
        if (windows_per_epoch < 1) throw ContractError("need at least one window per epoch");
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double total = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double val_l1 = 0.0;
};

struct TrainResult {
    std::vector<EpochStats> history;
    std::size_t best_epoch = 0;
    double best_val_l1 = 0.0;
};

// Contiguous oldest-to-newest 8:1:1 cut.
struct SplitSizes {
    std::size_t train_steps = 0;
    std::size_t val_steps = 0;
    std::size_t test_steps = 0;
};

inline SplitSizes split_811(std::size_t steps) {
    SplitSizes s;
    s.train_steps = steps * 8 / 10;
    s.val_steps = steps / 10;
    s.test_steps = steps - s.train_steps - s.val_steps;
    return s;
}

// Mean squared error at buoy cells restricted to steps
// [eval_begin, eval_end) of the dataset, using a window forward whose
// last steps cover that range. Forward-only (no gradients read).
template <typename T>
double masked_window_l1(OrcaModel<T>& model, const BuoyDataset& ds, std::size_t window_start,
                        std::size_t eval_begin, std::size_t eval_end) {
    const ObsWindow w = extract_window(ds, window_start, model.window_len());
    auto estimate = model.forward(w);
    const auto& vals = estimate.value();
    const std::size_t cols = model.grid().cols;
    const std::size_t steps = model.window_len();
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < ds.num_buoys(); ++m) {
        const GridCell cell = ds.locations()[m];
        for (std::size_t t = 0; t < steps; ++t) {
            const std::size_t global_t = window_start + t;
            if (global_t < eval_begin || global_t >= eval_end) {
                continue;
            }
            if (ds.is_missing(ds.swh_feature(), m, global_t)) {
                continue;
            }
            const double pred =
                static_cast<double>(vals[(cell.row * cols + cell.col) * steps + t]);
            const double obs = static_cast<double>(ds.at(ds.swh_feature(), m, global_t));
            acc += (obs - pred) * (obs - pred);
            ++count;
        }
    }
    if (count == 0) {
        throw ContractError("loss undefined: no valid observations in steps [" +
                            std::to_string(eval_begin) + ", " + std::to_string(eval_end) + ")");
    }
    return acc / static_cast<double>(count);
}

// Training loop over sliding windows of the train segment; the physical
// regularizer sees the matching surrogate window. Returns the per-epoch
// history and restores the best-validation parameters.
template <typename T>
TrainResult train(OrcaModel<T>& model, const BuoyDataset& ds, const GridField* surrogate,
                  const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.alpha > 0.0 && surrogate == nullptr) {
        throw ConfigError("the physical regularizer (alpha > 0) needs a surrogate grid field");
    }
    if (surrogate != nullptr && surrogate->steps != ds.num_steps()) {
        throw AlignmentError("surrogate covers " + std::to_string(surrogate->steps) +
                             " steps, dataset has " + std::to_string(ds.num_steps()));
    }
    const SplitSizes split = split_811(ds.num_steps());
    const std::size_t t_w = model.window_len();
    if (t_w > split.train_steps) {
        throw ConfigError("window length " + std::to_string(t_w) +
                          " exceeds the train segment of " + std::to_string(split.train_steps) +
                          " steps");
    }
    const std::size_t n_starts = split.train_steps - t_w + 1;
    // Validation: one window ending at the validation boundary, scored on
    // validation steps only. Without a validation segment the train tail
    // is scored instead (no held-out early stopping in that case).
    const std::size_t val_end = split.train_steps + split.val_steps;
    const std::size_t val_window_start = val_end - t_w;
    const std::size_t val_begin = split.val_steps > 0 ? split.train_steps : val_window_start;

    const std::size_t grid_cells = model.grid().rows * model.grid().cols;

    AdamOptimizer<T> opt(cfg.lr);
    Rng window_rng(derive_seed(cfg.seed, 11));
    TrainResult result;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::vector<T>> best_params = model.params().snapshot();
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        double sum_total = 0.0, sum_l1 = 0.0, sum_l2 = 0.0;
        for (std::size_t b = 0; b < cfg.windows_per_epoch; ++b) {
            const std::size_t start = window_rng.below(static_cast<std::uint32_t>(n_starts));
            const ObsWindow window = extract_window(ds, start, t_w);
            auto estimate = model.forward(window);
            auto l1 = loss_buoy(estimate, window, ds.swh_feature(), ds.locations(),
                                model.grid().cols);
            Tensor<T> l2;
            double l2_value = 0.0;
            if (surrogate != nullptr) {
                std::vector<float> ref(grid_cells * t_w);
                for (std::size_t c = 0; c < grid_cells; ++c) {
                    for (std::size_t t = 0; t < t_w; ++t) {
                        ref[c * t_w + t] = surrogate->values[c * surrogate->steps + start + t];
                    }
                }
                l2 = loss_phys(ref, estimate);
                l2_value = static_cast<double>(l2.item());
            }
            auto total = (surrogate != nullptr) ? total_loss(l1, l2, cfg.alpha) : l1;
            const double total_value = static_cast<double>(total.item());
            if (!std::isfinite(total_value)) {
                throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
            }
            model.params().zero_grads();
            backward(total);
            opt.step(model.params());
            sum_total += total_value;
            sum_l1 += static_cast<double>(l1.item());
            sum_l2 += l2_value;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.total = sum_total / static_cast<double>(cfg.windows_per_epoch);
        stats.l1 = sum_l1 / static_cast<double>(cfg.windows_per_epoch);
        stats.l2 = sum_l2 / static_cast<double>(cfg.windows_per_epoch);
        stats.val_l1 = masked_window_l1(model, ds, val_window_start, val_begin, val_end);
        result.history.push_back(stats);

        if (stats.val_l1 < best) {
            best = stats.val_l1;
            best_params = model.params().snapshot();
            result.best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
            if (cfg.patience > 0 && since_best >= cfg.patience) {
                break;
            }
        }
    }
    if (cfg.restore_best) {
        model.params().restore(best_params);
    }
    result.best_val_l1 = best;
    return result;
}

// --- evaluation ---------------------------------------------------------------

struct Metrics {
    double mae = 0.0;
    double mse = 0.0;
    double rmse = 0.0;
};

// MAE/MSE/RMSE between an estimate field and the buoy observations at the
// buoy cells. The estimate's steps are aligned to dataset steps
// [t_begin, t_begin + estimate.steps); missing observations are skipped.
inline Metrics evaluate(const GridField& estimate, const BuoyDataset& ds, std::size_t t_begin) {
    if (t_begin + estimate.steps > ds.num_steps()) {
        throw AlignmentError("estimate covers steps [" + std::to_string(t_begin) + ", " +
                             std::to_string(t_begin + estimate.steps) +
                             ") but the dataset has " + std::to_string(ds.num_steps()));
    }
    double abs_acc = 0.0, sq_acc = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < ds.num_buoys(); ++m) {
        const GridCell cell = ds.locations()[m];
        if (cell.row >= estimate.rows || cell.col >= estimate.cols) {
            throw AlignmentError("buoy cell lies outside the estimate grid");
        }
        for (std::size_t t = 0; t < estimate.steps; ++t) {
            if (ds.is_missing(ds.swh_feature(), m, t_begin + t)) {
                continue;
            }
            const double err = static_cast<double>(ds.at(ds.swh_feature(), m, t_begin + t)) -
                               static_cast<double>(estimate.at(cell.row, cell.col, t));
            abs_acc += std::abs(err);
            sq_acc += err * err;
            ++count;
        }
    }
    if (count == 0) {
        throw ContractError("metrics undefined: the evaluation range has no valid observations");
    }
    Metrics m;
    m.mae = abs_acc / static_cast<double>(count);
    m.mse = sq_acc / static_cast<double>(count);
    m.rmse = std::sqrt(m.mse);
    return m;
}

// Metrics from a plain error sample (prediction minus truth), used for
// metric identities.
inline Metrics metrics_from_errors(const std::vector<double>& errors) {
    if (errors.empty()) {
        throw ContractError("metrics undefined: empty error sample");
    }
    Metrics m;
    for (double e : errors) {
        m.mae += std::abs(e);
        m.mse += e * e;
    }
    m.mae /= static_cast<double>(errors.size());
    m.mse /= static_cast<double>(errors.size());
    m.rmse = std::sqrt(m.mse);
    return m;
}

// Persistence baseline: repeat each buoy's last observed SWH value from
// before t_begin across all later steps; returns the MAE on
// [t_begin, t_begin + steps).
inline double persistence_mae(const BuoyDataset& ds, std::size_t t_begin, std::size_t steps) {
    double abs_acc = 0.0;
    std::size_t count = 0;
    for (std::size_t m = 0; m < ds.num_buoys(); ++m) {
        double last = 0.0;
        bool seen = false;
        for (std::size_t t = 0; t < t_begin; ++t) {
            if (!ds.is_missing(ds.swh_feature(), m, t)) {
                last = static_cast<double>(ds.at(ds.swh_feature(), m, t));
                seen = true;
            }
        }
        if (!seen) {
            continue;
        }
        for (std::size_t t = t_begin; t < t_begin + steps; ++t) {
            if (ds.is_missing(ds.swh_feature(), m, t)) {
                continue;
            }
            abs_acc += std::abs(static_cast<double>(ds.at(ds.swh_feature(), m, t)) - last);
            ++count;
        }
    }
    if (count == 0) {
        throw ContractError("metrics undefined: persistence baseline has no valid observations");
    }
    return abs_acc / static_cast<double>(count);
}

} // namespace orca

#endif
