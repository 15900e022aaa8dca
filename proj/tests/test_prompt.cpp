#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "orca/prompt_encoding.hpp"
#include "orca/prompt_text.hpp"
#include "orca/rng.hpp"

using orca::PromptTemplate;
using orca::PromptVariant;
using orca::Tensor;

namespace {

orca::DatasetMeta sample_meta() {
    orca::DatasetMeta meta;
    meta.num_features = 5;
    meta.num_buoys = 3;
    meta.num_steps = 16;
    meta.feature_names = {"WDIR", "WSPD", "WVHT", "APD", "WTMP"};
    return meta;
}

std::vector<double> randv(orca::Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) {
        x = rng.uniform(-1.0, 1.0);
    }
    return v;
}

orca::SoftPromptNet<double> random_net(orca::Rng& rng, std::size_t r, std::size_t d,
                                       bool trainable = true) {
    orca::SoftPromptNet<double> net;
    net.q = Tensor<double>::leaf({r, d}, randv(rng, r * d), trainable);
    net.lstm_wx = Tensor<double>::leaf({4 * d, d}, randv(rng, 4 * d * d));
    net.lstm_wh = Tensor<double>::leaf({4 * d, d}, randv(rng, 4 * d * d));
    net.lstm_b = Tensor<double>::leaf({4 * d}, randv(rng, 4 * d));
    net.w1 = Tensor<double>::leaf({d, d}, randv(rng, d * d), trainable);
    net.b1 = Tensor<double>::leaf({d}, randv(rng, d), trainable);
    net.w2 = Tensor<double>::leaf({d, d}, randv(rng, d * d), trainable);
    net.b2 = Tensor<double>::leaf({d}, randv(rng, d), trainable);
    return net;
}

double fd_rel_err(double a, double b) {
    const double denom = std::max({std::abs(a), std::abs(b), 1e-4});
    return std::abs(a - b) / denom;
}

} // namespace

TEST_CASE("full prompt renders all five sections in order") {
    const auto rendered =
        orca::render_prompt(PromptTemplate::standard(PromptVariant::full), sample_meta());
    const std::vector<std::string> labels = {"ACTOR", "INFORMATION", "TARGET", "FEATURES",
                                             "DATA"};
    REQUIRE(rendered.sections.size() == 5);
    std::size_t last_pos = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        CHECK(rendered.sections[i].first == labels[i]);
        const auto [begin, end] = rendered.sections[i].second;
        CHECK(begin >= last_pos);
        CHECK(rendered.text.substr(begin, labels[i].size()) == labels[i]);
        last_pos = end;
    }
}

TEST_CASE("light prompt starts with the marine-scientist actor line") {
    const auto rendered =
        orca::render_prompt(PromptTemplate::standard(PromptVariant::light), sample_meta());
    CHECK(rendered.text.rfind("ACTOR: You are a marine scientist.", 0) == 0);
    REQUIRE(rendered.sections.size() == 2);
    CHECK(rendered.sections[0].first == "ACTOR");
    CHECK(rendered.sections[1].first == "TARGET");
}

TEST_CASE("no-features variant drops exactly the FEATURES section") {
    const auto rendered =
        orca::render_prompt(PromptTemplate::standard(PromptVariant::no_features), sample_meta());
    REQUIRE(rendered.sections.size() == 4);
    for (const auto& [label, span] : rendered.sections) {
        CHECK(label != "FEATURES");
        (void)span;
    }
}

TEST_CASE("INFORMATION interpolates the data dimensions") {
    const auto rendered =
        orca::render_prompt(PromptTemplate::standard(PromptVariant::full), sample_meta());
    CHECK(rendered.text.find(" 5 ") != std::string::npos);
    CHECK(rendered.text.find(" 3 ") != std::string::npos);
    CHECK(rendered.text.find(" 16 ") != std::string::npos);
    CHECK(rendered.text.find("wind direction (WDIR)") != std::string::npos);
}

TEST_CASE("rendering is deterministic") {
    const auto a = orca::render_prompt(PromptTemplate::standard(PromptVariant::full),
                                       sample_meta());
    const auto b = orca::render_prompt(PromptTemplate::standard(PromptVariant::full),
                                       sample_meta());
    CHECK(a.text == b.text);
}

TEST_CASE("tokenizer") {
    SUBCASE("empty text gives no tokens") {
        CHECK(orca::tokenize("").empty());
        CHECK(orca::tokenize("  .,;  ").empty());
    }
    SUBCASE("case folding maps WDIR and wdir to the same token") {
        const auto toks = orca::tokenize("WDIR wdir");
        REQUIRE(toks.size() == 2);
        CHECK(toks[0] == toks[1]);
    }
    SUBCASE("punctuation separates") {
        const auto toks = orca::tokenize("waves, heights(m)");
        CHECK(toks == std::vector<std::string>{"waves", "heights", "m"});
    }
}

TEST_CASE("vocabulary has dense ids with PAD at 0 and UNK absorbing") {
    const auto vocab = orca::Vocabulary::build(orca::tokenize("alpha beta alpha gamma"));
    CHECK(vocab.size() == 5);  // pad, unk, alpha, beta, gamma
    CHECK(orca::Vocabulary::kPad == 0);
    CHECK(vocab.id_of("alpha") == 2);
    CHECK(vocab.id_of("nonsense") == orca::Vocabulary::kUnk);
}

TEST_CASE("token embedding looks up table rows") {
    orca::Rng rng(5);
    auto table = Tensor<double>::leaf({4, 3}, randv(rng, 12));
    const std::vector<std::size_t> ids = {2, 2, 0};
    auto p = orca::tokenize_and_embed(ids, table);
    CHECK(p.shape() == orca::Shape{3, 3});
    CHECK(p.value()[0] == table.value()[6]);
    CHECK(p.value()[3] == table.value()[6]);
    CHECK(p.value()[6] == table.value()[0]);
}

TEST_CASE("soft prompt encoding") {
    orca::Rng rng(11);

    SUBCASE("output shape is R x D") {
        auto net = random_net(rng, 8, 16);
        auto h = orca::encode_soft_prompt(net);
        CHECK(h.shape() == orca::Shape{8, 16});
    }
    SUBCASE("all-zero weights with b1 = c yields constant rows") {
        const std::size_t r = 3, d = 4;
        orca::SoftPromptNet<double> net;
        net.q = Tensor<double>::leaf({r, d}, randv(rng, r * d));
        net.lstm_wx = Tensor<double>::zeros({4 * d, d});
        net.lstm_wh = Tensor<double>::zeros({4 * d, d});
        net.lstm_b = Tensor<double>::zeros({4 * d});
        net.w1 = Tensor<double>::zeros({d, d});
        net.b1 = Tensor<double>::full({d}, 0.75);
        net.w2 = Tensor<double>::zeros({d, d});
        net.b2 = Tensor<double>::zeros({d});
        auto h = orca::encode_soft_prompt(net);
        for (double v : h.value()) {
            CHECK(v == doctest::Approx(0.75));
        }
    }
    SUBCASE("empty soft prompt is a contract error") {
        orca::SoftPromptNet<double> net;  // q left undefined
        CHECK_THROWS_AS(orca::encode_soft_prompt(net), orca::ContractError);
    }
    SUBCASE("gradients of a scalar head match finite differences") {
        auto net = random_net(rng, 3, 5);
        auto weights = Tensor<double>::leaf({3, 5}, randv(rng, 15));
        auto build = [&]() {
            return orca::sum_all(orca::mul(orca::encode_soft_prompt(net), weights));
        };
        for (auto* leaf : {&net.q, &net.w1, &net.b1, &net.w2, &net.b2}) {
            auto loss = build();
            orca::backward(loss);
            const auto analytic = leaf->grad();
            auto objective = [&]() { return build().item(); };
            const auto numeric = orca::finite_diff_gradient(objective, *leaf, 1e-6);
            for (std::size_t i = 0; i < numeric.size(); ++i) {
                CAPTURE(i);
                CHECK(fd_rel_err(analytic[i], numeric[i]) <= 1e-4);
            }
        }
    }
}

TEST_CASE("prompt representation concatenates H_q then P") {
    orca::Rng rng(21);
    auto h_q = Tensor<double>::leaf({2, 4}, randv(rng, 8));
    auto p = Tensor<double>::leaf({3, 4}, randv(rng, 12));

    SUBCASE("row order and count") {
        auto h = orca::build_prompt_repr(h_q, &p);
        CHECK(h.shape() == orca::Shape{5, 4});
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(h.value()[j] == h_q.value()[j]);  // row 0 identical bitwise
            CHECK(h.value()[2 * 4 + j] == p.value()[j]);
        }
    }
    SUBCASE("missing P returns H_q alone") {
        auto h = orca::build_prompt_repr<double>(h_q, nullptr);
        CHECK(h.value() == h_q.value());
    }
    SUBCASE("width mismatch is a dimension error") {
        auto wide = Tensor<double>::leaf({2, 5}, randv(rng, 10));
        CHECK_THROWS_AS(orca::build_prompt_repr(h_q, &wide), orca::ShapeError);
    }
}

TEST_CASE("H_prompt depends on Q only through the first R rows") {
    orca::Rng rng(31);
    auto net = random_net(rng, 2, 4);
    auto p = Tensor<double>::leaf({3, 4}, randv(rng, 12));
    auto before = orca::build_prompt_repr(orca::encode_soft_prompt(net), &p);
    // Perturb Q and rebuild.
    net.q.mutable_value()[0] += 0.5;
    net.q.mutable_value()[5] -= 0.25;
    auto after = orca::build_prompt_repr(orca::encode_soft_prompt(net), &p);
    bool soft_rows_changed = false;
    for (std::size_t i = 0; i < 2 * 4; ++i) {
        soft_rows_changed = soft_rows_changed || before.value()[i] != after.value()[i];
    }
    CHECK(soft_rows_changed);
    for (std::size_t i = 2 * 4; i < 5 * 4; ++i) {
        CHECK(before.value()[i] == after.value()[i]);
    }
}
