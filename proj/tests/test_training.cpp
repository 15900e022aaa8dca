#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "orca/pipeline.hpp"
#include "orca/rng.hpp"
#include "orca/synth.hpp"
#include "orca/training.hpp"

using orca::Tensor;

namespace {

orca::SynthResult small_data(std::uint64_t seed = 9) {
    orca::SynthSpec ss;
    ss.seed = seed;
    ss.rows = 4;
    ss.cols = 4;
    ss.steps = 20;
    ss.buoys = 2;
    ss.features = 2;
    return orca::synth_generate(ss);
}

orca::RunConfig small_cfg(std::uint64_t seed = 9) {
    orca::RunConfig cfg;
    cfg.width = 8;
    cfg.layers = 1;
    cfg.heads = 2;
    cfg.ffn_mult = 2;
    cfg.soft_prompt_len = 2;
    cfg.patch_len = 4;
    cfg.patch_stride = 4;
    cfg.window = 8;
    cfg.prompt = orca::PromptVariant::light;
    cfg.seed = seed;
    return cfg;
}

// A window holding the given single-buoy SWH observations.
orca::ObsWindow window_from(const std::vector<std::vector<float>>& swh_per_buoy) {
    orca::ObsWindow w;
    w.features = 1;
    w.buoys = swh_per_buoy.size();
    w.steps = swh_per_buoy[0].size();
    w.start = 0;
    for (const auto& series : swh_per_buoy) {
        for (float v : series) {
            w.values.push_back(v);
            w.missing.push_back(0);
        }
    }
    return w;
}

} // namespace

TEST_CASE("buoy loss arithmetic") {
    SUBCASE("exact agreement is zero") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {1.0, 2.0, 3.0, 4.0});
        auto w = window_from({{3.0f}});
        auto l = orca::loss_buoy(est, w, 0, {orca::GridCell{1, 0}}, 2);
        CHECK(l.item() == doctest::Approx(0.0));
    }
    SUBCASE("one buoy, one step, error 0.5 gives 0.25") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {0.5, 0.0, 0.0, 0.0});
        auto w = window_from({{1.0f}});
        auto l = orca::loss_buoy(est, w, 0, {orca::GridCell{0, 0}}, 2);
        CHECK(l.item() == doctest::Approx(0.25));
    }
    SUBCASE("two buoys with errors 0.1 and 0.3 average to 0.05") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {0.9, 0.7, 0.0, 0.0});
        auto w = window_from({{1.0f}, {1.0f}});
        auto l = orca::loss_buoy(est, w, 0, {orca::GridCell{0, 0}, orca::GridCell{0, 1}}, 2);
        CHECK(l.item() == doctest::Approx(0.05));
    }
    SUBCASE("missing entries are skipped in value and denominator") {
        auto est = Tensor<double>::leaf({1, 1, 2}, {0.0, 0.0});
        orca::ObsWindow w = window_from({{1.0f, 5.0f}});
        w.missing[1] = 1;  // second step unobserved
        auto l = orca::loss_buoy(est, w, 0, {orca::GridCell{0, 0}}, 1);
        CHECK(l.item() == doctest::Approx(1.0));  // only the first step counts
    }
    SUBCASE("all entries missing is an undefined-loss error") {
        auto est = Tensor<double>::leaf({1, 1, 1}, {0.0});
        orca::ObsWindow w = window_from({{1.0f}});
        w.missing[0] = 1;
        CHECK_THROWS_AS(orca::loss_buoy(est, w, 0, {orca::GridCell{0, 0}}, 1),
                        orca::ContractError);
    }
}

TEST_CASE("physical regularizer arithmetic") {
    SUBCASE("exact agreement is zero") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {1.0, 2.0, 3.0, 4.0});
        auto l = orca::loss_phys({1.f, 2.f, 3.f, 4.f}, est);
        CHECK(l.item() == doctest::Approx(0.0));
    }
    SUBCASE("constant offset 0.1 gives 0.01") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {1.1, 2.1, 3.1, 4.1});
        auto l = orca::loss_phys({1.f, 2.f, 3.f, 4.f}, est);
        CHECK(l.item() == doctest::Approx(0.01));
    }
    SUBCASE("errors {0, 0, 0.2, 0.2} on a 2x2x1 field give 0.02") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {1.0, 2.0, 3.2, 4.2});
        auto l = orca::loss_phys({1.f, 2.f, 3.f, 4.f}, est);
        CHECK(l.item() == doctest::Approx(0.02));
    }
    SUBCASE("shape mismatch is a dimension error") {
        auto est = Tensor<double>::leaf({2, 2, 1}, {1.0, 2.0, 3.0, 4.0});
        CHECK_THROWS_AS(orca::loss_phys({1.f, 2.f}, est), orca::ShapeError);
    }
}

TEST_CASE("total loss combines as L = L1 + alpha L2") {
    auto l1 = Tensor<double>::scalar(0.1);
    auto l2 = Tensor<double>::scalar(0.2);
    CHECK(orca::total_loss(l1, l2, 0.3).item() == doctest::Approx(0.16));
    CHECK(orca::total_loss(l1, l2, 0.0).item() == doctest::Approx(0.1));
    CHECK(orca::total_loss(Tensor<double>::scalar(0.0), Tensor<double>::scalar(0.0), 0.3).item() ==
          doctest::Approx(0.0));

    SUBCASE("d(total)/d(alpha) equals L2 exactly") {
        const double a1 = 0.7, a2 = 1.9;
        const double slope = (orca::total_loss(l1, l2, a2).item() -
                              orca::total_loss(l1, l2, a1).item()) /
                             (a2 - a1);
        CHECK(slope == doctest::Approx(l2.item()).epsilon(1e-12));
    }
    SUBCASE("negative alpha is rejected") {
        CHECK_THROWS_AS(orca::total_loss(l1, l2, -0.1), orca::ContractError);
    }
}

TEST_CASE("losses are nonnegative and zero only on exact agreement") {
    orca::Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> est_vals(8);
        std::vector<float> ref_vals(8);
        for (std::size_t i = 0; i < 8; ++i) {
            est_vals[i] = rng.uniform(0.0, 3.0);
            ref_vals[i] = static_cast<float>(rng.uniform(0.0, 3.0));
        }
        auto est = Tensor<double>::leaf({2, 2, 2}, est_vals);
        auto l2 = orca::loss_phys(ref_vals, est);
        CHECK(l2.item() >= 0.0);

        auto w = window_from({{ref_vals[0], ref_vals[1]}});
        auto l1 = orca::loss_buoy(est, w, 0, {orca::GridCell{0, 0}}, 2);
        CHECK(l1.item() >= 0.0);
        const bool agree = est_vals[0] == static_cast<double>(ref_vals[0]) &&
                           est_vals[1] == static_cast<double>(ref_vals[1]);
        CHECK((l1.item() == 0.0) == agree);
    }
}

TEST_CASE("evaluation metrics") {
    SUBCASE("perfect prediction gives zeros") {
        const auto m = orca::metrics_from_errors({0.0, 0.0, 0.0});
        CHECK(m.mae == 0.0);
        CHECK(m.mse == 0.0);
        CHECK(m.rmse == 0.0);
    }
    SUBCASE("errors 0.1 and -0.3") {
        const auto m = orca::metrics_from_errors({0.1, -0.3});
        CHECK(m.mae == doctest::Approx(0.2));
        CHECK(m.mse == doctest::Approx(0.05));
        CHECK(m.rmse == doctest::Approx(0.2236).epsilon(1e-3));
    }
    SUBCASE("rmse is the square root of mse within 1e-9 relative") {
        orca::Rng rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> errors(1 + rng.below(40));
            for (auto& e : errors) {
                e = rng.uniform(-2.0, 2.0);
            }
            const auto m = orca::metrics_from_errors(errors);
            CHECK(std::abs(m.rmse * m.rmse - m.mse) <= 1e-9 * std::max(1.0, m.mse));
        }
    }
    SUBCASE("reported accuracy table is internally consistent") {
        // Error sets built to reach each published MSE must reproduce the
        // published RMSE.
        const std::vector<std::pair<double, double>> mse_rmse = {{0.2000, 0.4472},
                                                                 {0.9375, 0.9682},
                                                                 {0.2063, 0.4542},
                                                                 {0.1796, 0.4238},
                                                                 {0.0838, 0.2895}};
        for (const auto& [mse, rmse] : mse_rmse) {
            const auto m = orca::metrics_from_errors(
                std::vector<double>(17, std::sqrt(mse)));
            CHECK(m.mse == doctest::Approx(mse).epsilon(1e-9));
            CHECK(std::abs(m.rmse - rmse) <= 1e-3);
        }
    }
    SUBCASE("empty sample is an undefined-metrics error") {
        CHECK_THROWS_AS(orca::metrics_from_errors({}), orca::ContractError);
    }
}

TEST_CASE("contiguous 8:1:1 split") {
    const auto s32 = orca::split_811(32);
    CHECK(s32.train_steps == 25);
    CHECK(s32.val_steps == 3);
    CHECK(s32.test_steps == 4);
    const auto s100 = orca::split_811(100);
    CHECK(s100.train_steps == 80);
    CHECK(s100.val_steps == 10);
    CHECK(s100.test_steps == 10);
    CHECK(s100.train_steps + s100.val_steps + s100.test_steps == 100);
}

TEST_CASE("frozen arrays stay bit-identical across optimizer steps") {
    const auto data = small_data();
    orca::OrcaModel<float> model(small_cfg(), data.grid, data.dataset);
    const auto before = model.params().snapshot();

    orca::TrainConfig tc;
    tc.lr = 0.01;
    tc.alpha = 0.3;
    tc.max_epochs = 10;
    tc.windows_per_epoch = 5;  // 50 optimizer steps
    tc.patience = 0;
    tc.restore_best = false;
    tc.seed = 1;
    orca::train(model, data.dataset, &data.surrogate, tc);

    const auto after = model.params().snapshot();
    for (std::size_t i = 0; i < model.params().items().size(); ++i) {
        const auto& item = model.params().items()[i];
        if (item.trainable) {
            CHECK(before[i] != after[i]);  // every trainable array moved
        } else {
            CHECK(before[i] == after[i]);  // every frozen array untouched
        }
    }
}

TEST_CASE("alpha = 0 training is numerically independent of the surrogate") {
    const auto data = small_data();
    orca::TrainConfig tc;
    tc.lr = 0.005;
    tc.alpha = 0.0;
    tc.max_epochs = 3;
    tc.windows_per_epoch = 3;
    tc.patience = 0;
    tc.restore_best = false;
    tc.seed = 2;

    orca::OrcaModel<float> a(small_cfg(), data.grid, data.dataset);
    const auto res_a = orca::train(a, data.dataset, &data.surrogate, tc);

    orca::GridField garbage = data.surrogate;
    orca::Rng rng(4242);
    for (auto& v : garbage.values) {
        v = static_cast<float>(rng.uniform(-9.0, 9.0));
    }
    orca::OrcaModel<float> b(small_cfg(), data.grid, data.dataset);
    const auto res_b = orca::train(b, data.dataset, &garbage, tc);

    CHECK(a.params().snapshot() == b.params().snapshot());
    // L2 still shows up in the history, and differs between the runs.
    CHECK(res_a.history[0].l2 != res_b.history[0].l2);
    CHECK(res_a.history[0].l1 == res_b.history[0].l1);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto data = small_data();
    orca::TrainConfig tc;
    tc.alpha = 0.3;
    tc.max_epochs = 4;
    tc.windows_per_epoch = 2;
    tc.patience = 0;
    tc.seed = 5;

    orca::OrcaModel<float> a(small_cfg(), data.grid, data.dataset);
    const auto res_a = orca::train(a, data.dataset, &data.surrogate, tc);
    orca::OrcaModel<float> b(small_cfg(), data.grid, data.dataset);
    const auto res_b = orca::train(b, data.dataset, &data.surrogate, tc);

    REQUIRE(res_a.history.size() == res_b.history.size());
    for (std::size_t i = 0; i < res_a.history.size(); ++i) {
        CHECK(res_a.history[i].total == res_b.history[i].total);
        CHECK(res_a.history[i].val_l1 == res_b.history[i].val_l1);
    }
    CHECK(a.params().snapshot() == b.params().snapshot());
}

TEST_CASE("a short training run reduces the buoy loss") {
    const auto data = small_data(3);
    orca::OrcaModel<float> model(small_cfg(3), data.grid, data.dataset);
    orca::TrainConfig tc;
    tc.alpha = 0.3;
    tc.max_epochs = 15;
    tc.windows_per_epoch = 4;
    tc.patience = 0;
    tc.restore_best = false;
    tc.seed = 3;
    const auto res = orca::train(model, data.dataset, &data.surrogate, tc);
    CHECK(res.history.back().l1 < res.history.front().l1);
}

TEST_CASE("a non-finite loss raises a divergence error naming the epoch") {
    const auto data = small_data();
    orca::OrcaModel<float> model(small_cfg(), data.grid, data.dataset);
    orca::GridField poisoned = data.surrogate;
    poisoned.values[0] = std::numeric_limits<float>::infinity();
    orca::TrainConfig tc;
    tc.alpha = 0.3;
    tc.max_epochs = 2;
    tc.windows_per_epoch = 8;  // every start gets sampled
    tc.patience = 0;
    tc.seed = 1;
    CHECK_THROWS_WITH_AS(orca::train(model, data.dataset, &poisoned, tc),
                         doctest::Contains("epoch"), orca::DivergenceError);
}

TEST_CASE("the regularizer needs a surrogate when alpha is positive") {
    const auto data = small_data();
    orca::OrcaModel<float> model(small_cfg(), data.grid, data.dataset);
    orca::TrainConfig tc;
    tc.alpha = 0.3;
    CHECK_THROWS_AS(orca::train(model, data.dataset, nullptr, tc), orca::ConfigError);
}

TEST_CASE("persistence baseline repeats the last observed value") {
    const auto data = small_data();
    const auto split = orca::split_811(data.dataset.num_steps());
    const std::size_t test_begin = split.train_steps + split.val_steps;
    const double mae = orca::persistence_mae(data.dataset, test_begin, split.test_steps);
    // Recompute by hand.
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t m = 0; m < data.dataset.num_buoys(); ++m) {
        const double last =
            data.dataset.at(data.dataset.swh_feature(), m, test_begin - 1);
        for (std::size_t t = test_begin; t < test_begin + split.test_steps; ++t) {
            acc += std::abs(data.dataset.at(data.dataset.swh_feature(), m, t) - last);
            ++n;
        }
    }
    CHECK(mae == doctest::Approx(acc / static_cast<double>(n)));
}

TEST_CASE("evaluate scores an estimate field at buoy cells") {
    const auto data = small_data();
    const auto split = orca::split_811(data.dataset.num_steps());
    const std::size_t test_begin = split.train_steps + split.val_steps;

    // Estimate that copies the observations exactly at buoy cells.
    orca::GridField est;
    est.rows = data.grid.rows;
    est.cols = data.grid.cols;
    est.steps = split.test_steps;
    est.role = orca::FieldRole::estimate;
    est.values.assign(est.rows * est.cols * est.steps, 0.f);
    for (std::size_t m = 0; m < data.dataset.num_buoys(); ++m) {
        const auto cell = data.dataset.locations()[m];
        for (std::size_t t = 0; t < est.steps; ++t) {
            est.at(cell.row, cell.col, t) =
                data.dataset.at(data.dataset.swh_feature(), m, test_begin + t);
        }
    }
    const auto perfect = orca::evaluate(est, data.dataset, test_begin);
    CHECK(perfect.mae == doctest::Approx(0.0));
    CHECK(perfect.mse == doctest::Approx(0.0));
    CHECK(perfect.rmse == doctest::Approx(0.0));

    // Shift every prediction by +0.5.
    for (auto& v : est.values) {
        v += 0.5f;
    }
    const auto shifted = orca::evaluate(est, data.dataset, test_begin);
    CHECK(shifted.mae == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(shifted.rmse == doctest::Approx(std::sqrt(shifted.mse)).epsilon(1e-9));

    SUBCASE("misaligned ranges are an alignment error") {
        CHECK_THROWS_AS(orca::evaluate(est, data.dataset, data.dataset.num_steps()),
                        orca::AlignmentError);
    }
}
