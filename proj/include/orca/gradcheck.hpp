#ifndef ORCA_GRADCHECK_HPP
#define ORCA_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "orca/pipeline.hpp"
#include "orca/synth.hpp"
#include "orca/training.hpp"

namespace orca {

struct GradCheckEntry {
    std::string array;
    std::size_t elements = 0;
    double max_rel_err = 0.0;
    bool pass = false;
};

struct GradCheckReport {
    double tolerance = 1e-4;
    std::vector<GradCheckEntry> entries;
    bool all_pass = false;
};

// Relative error with an absolute floor so near-zero pairs compare
// absolutely.
inline double gradcheck_rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    return std::abs(analytic - numeric) / denom;
}

// The tiny configuration every gradient verification runs on.
inline RunConfig gradcheck_config() {
    RunConfig cfg;
    cfg.width = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.ffn_mult = 2;
    cfg.soft_prompt_len = 4;
    cfg.patch_len = 8;
    cfg.patch_stride = 8;
    cfg.window = 8;
    cfg.prompt = PromptVariant::light;
    cfg.location_token = true;
    cfg.seed = 5;
    return cfg;
}

inline SynthSpec gradcheck_synth_spec() {
    SynthSpec s;
    s.seed = 5;
    s.rows = 4;
    s.cols = 4;
    s.steps = 8;
    s.buoys = 2;
    s.features = 2;
    return s;
}

// A deliberately terse template keeping the token count inside the
// verification budget (I <= 12).
inline PromptTemplate gradcheck_template() {
    PromptTemplate t;
    t.actor = "estimate";
    t.information = "grid";
    t.target = "waves";
    t.features = "{FEATURES}";
    t.data_decl = "floats";
    t.variant = PromptVariant::light;
    return t;
}

// Checks the analytic gradient of the full training objective
// (L1 + alpha L2) against central finite differences for every trainable
// array, in 64-bit. `corrupt_array` injects a fault into that array's
// analytic gradient so the failure path stays testable.
inline GradCheckReport run_pipeline_gradcheck(double tolerance = 1e-4,
                                              const std::string& corrupt_array = "") {
    const RunConfig cfg = gradcheck_config();
    const SynthSpec synth_spec = gradcheck_synth_spec();
    const SynthResult data = synth_generate(synth_spec);
    const double alpha = 0.3;

    OrcaModel<double> model(cfg, data.grid, data.dataset, gradcheck_template());
    const ObsWindow window = extract_window(data.dataset, 0, cfg.window);
    std::vector<float> surrogate_window(data.grid.rows * data.grid.cols * cfg.window);
    for (std::size_t c = 0; c < data.grid.rows * data.grid.cols; ++c) {
        for (std::size_t t = 0; t < cfg.window; ++t) {
            surrogate_window[c * cfg.window + t] = data.surrogate.values[c * data.surrogate.steps + t];
        }
    }

    auto build_loss = [&]() {
        auto estimate = model.forward(window);
        auto l1 = loss_buoy(estimate, window, data.dataset.swh_feature(),
                            data.dataset.locations(), data.grid.cols);
        auto l2 = loss_phys(surrogate_window, estimate);
        return total_loss(l1, l2, alpha);
    };

    auto loss = build_loss();
    model.params().zero_grads();
    backward(loss);

    GradCheckReport report;
    report.tolerance = tolerance;
    for (auto& item : model.params().items()) {
        if (!item.trainable) {
            continue;
        }
        std::vector<double> analytic = item.tensor.grad();
        if (item.name == corrupt_array) {
            analytic[0] += 1.0;  // fault injection hook
        }
        auto objective = [&]() { return build_loss().item(); };
        // h = 1e-6: small enough to stay on one side of the nearest ReLU
        // kink at this objective's scale, with round-off still orders of
        // magnitude below the tolerance in 64-bit.
        const std::vector<double> numeric =
            finite_diff_gradient(objective, item.tensor, 1e-6);
        GradCheckEntry entry;
        entry.array = item.name;
        entry.elements = analytic.size();
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            entry.max_rel_err = std::max(entry.max_rel_err,
                                         gradcheck_rel_err(analytic[i], numeric[i]));
        }
        entry.pass = entry.max_rel_err <= tolerance;
        report.entries.push_back(std::move(entry));
    }
    report.all_pass = true;
    for (const auto& e : report.entries) {
        report.all_pass = report.all_pass && e.pass;
    }
    return report;
}

} // namespace orca

#endif
