// Command-line front end: synth | train | estimate | eval | gradcheck.
// ORCA_F64=1 switches the numeric pipeline to 64-bit floats.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "orca/commands.hpp"
#include "orca/config.hpp"

namespace {

bool force_f64() {
    const char* env = std::getenv("ORCA_F64");
    return env != nullptr && std::string(env) == "1";
}

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::string prompt;
    std::string times;
    long long seed = -1;
    double alpha = -1.0;
    bool no_location = false;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file (key=value lines)");
    cmd->add_option("--seed", flags.seed, "seed override");
    cmd->add_option("--out", flags.out_dir, "output directory override");
    cmd->add_option("--alpha", flags.alpha, "physical-regularizer weight override");
    cmd->add_option("--prompt", flags.prompt, "prompt variant: full|light|no-features");
    cmd->add_flag("--no-location", flags.no_location, "drop the spatial location token");
    cmd->add_option("--times", flags.times, "comma-separated heatmap time indices");
}

orca::RunConfig assemble_config(const CommonFlags& flags) {
    orca::RunConfig cfg = flags.config_path.empty()
                              ? orca::RunConfig{}
                              : orca::RunConfig::from_file(flags.config_path);
    if (flags.seed >= 0) {
        cfg.seed = static_cast<std::uint64_t>(flags.seed);
    }
    if (!flags.out_dir.empty()) {
        cfg.out_dir = flags.out_dir;
    }
    if (flags.alpha >= 0.0) {
        cfg.alpha = flags.alpha;
    }
    if (!flags.prompt.empty()) {
        cfg.prompt = orca::prompt_variant_from_string(flags.prompt);
    }
    if (flags.no_location) {
        cfg.location_token = false;
    }
    if (!flags.times.empty()) {
        cfg.heatmap_times = orca::parse_index_list(flags.times);
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orca: grid SWH estimation from sparse buoy observations"};
    app.require_subcommand(1);

    CommonFlags synth_flags, train_flags, estimate_flags, eval_flags, grad_flags;
    std::string corrupt_array;

    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, synth_flags);
    auto* train = app.add_subcommand("train", "train on a manifest dataset");
    add_common(train, train_flags);
    auto* estimate = app.add_subcommand("estimate", "write the test-segment grid estimate");
    add_common(estimate, estimate_flags);
    auto* eval = app.add_subcommand("eval", "score an estimate against buoy observations");
    add_common(eval, eval_flags);
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    add_common(gradcheck, grad_flags);
    gradcheck->add_option("--corrupt", corrupt_array, "fault-injection hook: corrupt one array")
        ->group("");  // hidden

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            return orca::run_synth(assemble_config(synth_flags));
        }
        if (*train) {
            const auto cfg = assemble_config(train_flags);
            return force_f64() ? orca::run_train<double>(cfg) : orca::run_train<float>(cfg);
        }
        if (*estimate) {
            const auto cfg = assemble_config(estimate_flags);
            return force_f64() ? orca::run_estimate<double>(cfg)
                               : orca::run_estimate<float>(cfg);
        }
        if (*eval) {
            return orca::run_eval(assemble_config(eval_flags));
        }
        if (*gradcheck) {
            // Verification always runs in 64-bit.
            return orca::run_gradcheck(corrupt_array);
        }
    } catch (const orca::Error& e) {
        std::cerr << "orca: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "orca: unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
