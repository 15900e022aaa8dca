#ifndef ORCA_COMMANDS_HPP
#define ORCA_COMMANDS_HPP

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "orca/config.hpp"
#include "orca/gradcheck.hpp"
#include "orca/io.hpp"
#include "orca/manifest.hpp"
#include "orca/pipeline.hpp"
#include "orca/synth.hpp"
#include "orca/training.hpp"

namespace orca {

namespace detail {

inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string buoy_text_from_dataset(const BuoyDataset& ds, std::size_t buoy) {
    std::ostringstream os;
    os << "#YY MM DD hh mm";
    for (const auto& name : ds.feature_names()) {
        os << ' ' << name;
    }
    os << "\n#yr mo dy hr mn";
    for (std::size_t f = 0; f < ds.num_features(); ++f) {
        os << " -";
    }
    os << '\n';
    // Timestamps start at 2023-01-01 00:00 and step by the observation
    // interval.
    const long long step_minutes = static_cast<long long>(ds.interval_hours() * 60.0);
    for (std::size_t t = 0; t < ds.num_steps(); ++t) {
        const long long minutes = static_cast<long long>(t) * step_minutes;
        const long long day = minutes / 1440;
        const long long hh = (minutes % 1440) / 60;
        const long long mm = minutes % 60;
        char stamp[40];
        std::snprintf(stamp, sizeof(stamp), "2023 01 %02lld %02lld %02lld", day + 1, hh, mm);
        os << stamp;
        for (std::size_t f = 0; f < ds.num_features(); ++f) {
            char val[32];
            std::snprintf(val, sizeof(val), " %.3f", static_cast<double>(ds.at(f, buoy, t)));
            os << val;
        }
        os << '\n';
    }
    return os.str();
}

inline std::string out_path(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline void require_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    }
}

inline std::string weights_path(const RunConfig& cfg) {
    return cfg.weights_path.empty() ? out_path(cfg, "weights.orcaw") : cfg.weights_path;
}

inline std::string estimate_path(const RunConfig& cfg) {
    return cfg.estimate_path.empty() ? out_path(cfg, "estimate.gridfield") : cfg.estimate_path;
}

inline std::string history_csv(const std::vector<EpochStats>& history) {
    std::ostringstream os;
    os << "epoch,loss,l1,l2,val_l1\n";
    for (const auto& row : history) {
        os << row.epoch << ',' << format_value(row.total) << ',' << format_value(row.l1) << ','
           << format_value(row.l2) << ',' << format_value(row.val_l1) << '\n';
    }
    return os.str();
}

} // namespace detail

// Generates the synthetic dataset and writes buoy text files, truth and
// surrogate grid fields, and the manifest tying them together.
inline int run_synth(const RunConfig& cfg) {
    SynthSpec spec;
    spec.seed = cfg.seed;
    spec.rows = cfg.synth_rows;
    spec.cols = cfg.synth_cols;
    spec.steps = cfg.synth_steps;
    spec.buoys = cfg.synth_buoys;
    spec.features = cfg.synth_features;
    const SynthResult data = synth_generate(spec);

    detail::require_out_dir(cfg);
    Manifest manifest;
    manifest.grid = data.grid;
    manifest.interval_hours = spec.interval_hours;
    manifest.swh_feature = "WVHT";

    for (std::size_t m = 0; m < data.dataset.num_buoys(); ++m) {
        char station[16];
        std::snprintf(station, sizeof(station), "S%02zu", m + 1);
        const std::string file_name = std::string("buoy_") + station + ".txt";
        const std::string file_path = detail::out_path(cfg, file_name);
        write_text_file(file_path, detail::buoy_text_from_dataset(data.dataset, m));
        const GridCell cell = data.dataset.locations()[m];
        ManifestEntry entry;
        entry.station = station;
        entry.path = file_name;
        entry.lat = data.grid.lat_north - static_cast<double>(cell.row) * data.grid.cell_deg;
        entry.lon = data.grid.lon_west + static_cast<double>(cell.col) * data.grid.cell_deg;
        entry.checksum = fnv1a_file(file_path);
        manifest.buoys.push_back(std::move(entry));
    }

    write_grid_field(detail::out_path(cfg, "truth.gridfield"), data.truth);
    write_grid_field(detail::out_path(cfg, "surrogate.gridfield"), data.surrogate);
    manifest.fields.push_back(
        {"truth", "truth.gridfield", fnv1a_file(detail::out_path(cfg, "truth.gridfield"))});
    manifest.fields.push_back({"surrogate", "surrogate.gridfield",
                               fnv1a_file(detail::out_path(cfg, "surrogate.gridfield"))});
    write_manifest(detail::out_path(cfg, "manifest.txt"), manifest);

    std::cout << "synth: wrote " << manifest.buoys.size() << " buoy files, truth and surrogate "
              << data.grid.rows << "x" << data.grid.cols << "x" << spec.steps << " fields to "
              << cfg.out_dir << "\n";
    return 0;
}

// Trains on the manifest's dataset and writes the best-validation
// weights plus the per-epoch history.
template <typename T>
int run_train(const RunConfig& cfg) {
    if (cfg.manifest_path.empty()) {
        throw ConfigError("data.manifest is required for training");
    }
    const Manifest manifest = read_manifest(cfg.manifest_path);
    const BuoyDataset dataset = load_dataset(manifest, cfg.manifest_path);

    GridField surrogate;
    const GridField* surrogate_ptr = nullptr;
    if (cfg.alpha > 0.0) {
        const std::string rel = manifest.field_path("surrogate");
        if (rel.empty()) {
            throw ConfigError(
                "the physical regularizer (alpha > 0) needs a surrogate grid field in the "
                "manifest");
        }
        surrogate = load_grid_field(resolve_relative(cfg.manifest_path, rel), manifest.grid,
                                    FieldRole::surrogate);
        surrogate_ptr = &surrogate;
    }

    OrcaModel<T> model(cfg, manifest.grid, dataset);
    TrainConfig tc;
    tc.lr = cfg.lr;
    tc.alpha = cfg.alpha;
    tc.max_epochs = cfg.epochs;
    tc.seed = cfg.seed;
    tc.windows_per_epoch = cfg.windows_per_epoch;
    tc.patience = cfg.patience;

    const TrainResult result = train(model, dataset, surrogate_ptr, tc);

    detail::require_out_dir(cfg);
    write_weight_file(detail::weights_path(cfg), model.params().to_arrays());
    write_text_file(detail::out_path(cfg, "history.csv"), detail::history_csv(result.history));
    write_text_file(detail::out_path(cfg, "prompt.txt"), model.rendered_prompt().text + "\n");

    std::cout << "train: " << result.history.size() << " epochs, best val L1 "
              << detail::format_value(result.best_val_l1) << " at epoch " << result.best_epoch
              << "; weights -> " << detail::weights_path(cfg) << "\n";
    return 0;
}

// Runs the trained model over the window covering the test segment and
// writes the estimate field, per-buoy series, and heatmaps.
template <typename T>
int run_estimate(const RunConfig& cfg) {
    if (cfg.manifest_path.empty()) {
        throw ConfigError("data.manifest is required for estimation");
    }
    const Manifest manifest = read_manifest(cfg.manifest_path);
    const BuoyDataset dataset = load_dataset(manifest, cfg.manifest_path);
    OrcaModel<T> model(cfg, manifest.grid, dataset);
    model.load_external_weights(detail::weights_path(cfg));

    const SplitSizes split = split_811(dataset.num_steps());
    if (split.test_steps == 0) {
        throw ConfigError("the dataset is too short to carve out a test segment");
    }
    if (split.test_steps > model.window_len()) {
        throw ConfigError("test segment (" + std::to_string(split.test_steps) +
                          " steps) exceeds the model window (" +
                          std::to_string(model.window_len()) + ")");
    }
    const std::size_t window_start = dataset.num_steps() - model.window_len();
    const std::size_t test_begin = split.train_steps + split.val_steps;
    const ObsWindow window = extract_window(dataset, window_start, model.window_len());
    auto estimate = model.forward(window);
    const auto& values = estimate.value();

    // Keep only the test-segment steps of the window.
    GridField field;
    field.rows = manifest.grid.rows;
    field.cols = manifest.grid.cols;
    field.steps = split.test_steps;
    field.role = FieldRole::estimate;
    field.values.resize(field.rows * field.cols * field.steps);
    const std::size_t w_len = model.window_len();
    const std::size_t offset = test_begin - window_start;
    for (std::size_t c = 0; c < field.rows * field.cols; ++c) {
        for (std::size_t t = 0; t < field.steps; ++t) {
            field.values[c * field.steps + t] =
                static_cast<float>(values[c * w_len + offset + t]);
        }
    }

    detail::require_out_dir(cfg);
    write_grid_field(detail::estimate_path(cfg), field);

    // Per-buoy observed/estimated series over the test segment.
    for (std::size_t m = 0; m < dataset.num_buoys(); ++m) {
        const GridCell cell = dataset.locations()[m];
        std::ostringstream os;
        os << "t,observed,estimated\n";
        for (std::size_t t = 0; t < split.test_steps; ++t) {
            const std::size_t global_t = test_begin + t;
            os << global_t << ',';
            if (dataset.is_missing(dataset.swh_feature(), m, global_t)) {
                os << "NA";
            } else {
                os << detail::format_value(
                    static_cast<double>(dataset.at(dataset.swh_feature(), m, global_t)));
            }
            os << ','
               << detail::format_value(static_cast<double>(field.at(cell.row, cell.col, t)))
               << '\n';
        }
        write_text_file(detail::out_path(cfg, "buoy_" + manifest.buoys[m].station + ".csv"),
                        os.str());
    }

    for (std::size_t idx : cfg.heatmap_times) {
        if (idx >= field.steps) {
            throw ConfigError("heatmap index " + std::to_string(idx) +
                              " outside the test segment of " + std::to_string(field.steps) +
                              " steps");
        }
        std::vector<float> slice(field.rows * field.cols);
        for (std::size_t c = 0; c < slice.size(); ++c) {
            slice[c] = field.values[c * field.steps + idx];
        }
        write_heatmap_svg(detail::out_path(cfg, "heatmap_t" + std::to_string(idx) + ".svg"),
                          field.rows, field.cols, slice,
                          "estimated SWH, test step " + std::to_string(idx));
    }

    std::cout << "estimate: wrote " << detail::estimate_path(cfg) << " ("
              << field.rows << "x" << field.cols << "x" << field.steps << "), "
              << dataset.num_buoys() << " buoy series, " << cfg.heatmap_times.size()
              << " heatmaps\n";
    return 0;
}

// Scores an estimate field against the buoy observations on the test
// lattice steps and writes the metrics.
inline int run_eval(const RunConfig& cfg) {
    if (cfg.manifest_path.empty()) {
        throw ConfigError("data.manifest is required for evaluation");
    }
    const Manifest manifest = read_manifest(cfg.manifest_path);
    const BuoyDataset dataset = load_dataset(manifest, cfg.manifest_path);
    const GridField estimate = load_grid_field(detail::estimate_path(cfg), manifest.grid,
                                               FieldRole::estimate);
    if (estimate.steps > dataset.num_steps()) {
        throw AlignmentError("estimate covers more steps than the dataset");
    }
    const std::size_t t_begin = dataset.num_steps() - estimate.steps;
    const Metrics metrics = evaluate(estimate, dataset, t_begin);

    detail::require_out_dir(cfg);
    std::ostringstream os;
    os << "mae,mse,rmse\n"
       << detail::format_value(metrics.mae) << ',' << detail::format_value(metrics.mse) << ','
       << detail::format_value(metrics.rmse) << '\n';
    write_text_file(detail::out_path(cfg, "metrics.csv"), os.str());
    std::cout << "eval: MAE " << detail::format_value(metrics.mae) << "  MSE "
              << detail::format_value(metrics.mse) << "  RMSE "
              << detail::format_value(metrics.rmse) << "\n";
    return 0;
}

// Runs the full-pipeline finite-difference suite in 64-bit and reports
// the worst relative error per trainable array.
inline int run_gradcheck(const std::string& corrupt_array = "") {
    const GradCheckReport report = run_pipeline_gradcheck(1e-4, corrupt_array);
    std::printf("%-16s %10s %14s  %s\n", "array", "elements", "max rel err", "status");
    for (const auto& e : report.entries) {
        std::printf("%-16s %10zu %14.3e  %s\n", e.array.c_str(), e.elements, e.max_rel_err,
                    e.pass ? "ok" : "FAIL");
    }
    std::printf("gradcheck: %s (tolerance %.1e)\n", report.all_pass ? "all checks passed" : "FAILED",
                report.tolerance);
    return report.all_pass ? 0 : 1;
}

} // namespace orca

#endif
