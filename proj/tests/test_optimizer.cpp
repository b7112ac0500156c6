#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "zv/optimizer.hpp"
#include "zv/rng.hpp"

#include "support/testutil.hpp"

using namespace zv;

TEST_CASE("clip_gradients: the 3-4-5 case is exact") {
    Param p("p", {2}, {0.0f, 0.0f});
    p.data->grad = {3.0f, 4.0f};
    double norm = clip_gradients({&p}, 2.0);
    CHECK(norm == 5.0);
    CHECK(p.grad()[0] == static_cast<float>(3.0 * (2.0 / 5.0)));
    CHECK(p.grad()[1] == static_cast<float>(4.0 * (2.0 / 5.0)));
    CHECK(p.grad()[0] == doctest::Approx(1.2f));
    CHECK(p.grad()[1] == doctest::Approx(1.6f));
}

TEST_CASE("clip_gradients leaves small gradients untouched") {
    Param p("p", {3}, {0, 0, 0});
    p.data->grad = {0.1f, -0.2f, 0.05f};
    std::vector<float> before = p.grad();
    double norm = clip_gradients({&p}, 2.0);
    CHECK(norm < 2.0);
    CHECK(tu::bits_equal(before, p.grad()));
}

TEST_CASE("post-clip norm equals min(pre-clip, threshold) on random gradients") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Param a = tu::random_param("a", {5}, rng);
        Param b = tu::random_param("b", {3, 2}, rng);
        a.data->grad = tu::random_values(5, rng, 2.0);
        b.data->grad = tu::random_values(6, rng, 2.0);
        double pre = clip_gradients({&a, &b}, 2.0);
        double sq = 0.0;
        for (float g : a.grad()) sq += static_cast<double>(g) * g;
        for (float g : b.grad()) sq += static_cast<double>(g) * g;
        CHECK(std::fabs(std::sqrt(sq) - std::min(pre, 2.0)) <= 1e-6);
    }
}

TEST_CASE("adamw first step matches the hand-evaluated update") {
    // param 1.0, grad 1.0, published defaults:
    // 1.0 - 1e-5 * (1.0 / (1.0 + 1e-8)) - 1e-5 * 5e-2 * 1.0
    Param p("p", {1}, {1.0f});
    p.data->grad = {1.0f};
    OptimizerState st;
    TrainConfig cfg;  // lr 1e-5, betas 0.9/0.9, eps 1e-8, decay 5e-2
    adamw_step({&p}, st, cfg);

    double expected = 1.0 - 1e-5 * (1.0 / (1.0 + 1e-8)) - 1e-5 * 5e-2 * 1.0;
    CHECK(std::fabs(static_cast<double>(p.values()[0]) - static_cast<float>(expected)) <= 1e-9);
    CHECK(st.t == 1);
}

TEST_CASE("zero gradient with zero decay leaves the parameter unchanged") {
    Param p("p", {2}, {0.5f, -0.25f});
    p.data->grad = {0.0f, 0.0f};
    OptimizerState st;
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    std::vector<float> before = p.values();
    adamw_step({&p}, st, cfg);
    CHECK(tu::bits_equal(before, p.values()));
}

TEST_CASE("parameter groups update independently") {
    Param a("a", {1}, {1.0f});
    Param b("b", {1}, {1.0f});
    a.data->grad = {1.0f};
    b.data->grad = {0.0f};
    OptimizerState st;
    TrainConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_step({&a, &b}, st, cfg);
    CHECK(a.values()[0] != 1.0f);
    CHECK(b.values()[0] == 1.0f);
}

TEST_CASE("frozen parameters are untouched") {
    Param p("p", {1}, {1.0f}, /*trainable=*/false);
    p.data->grad = {5.0f};
    OptimizerState st;
    adamw_step({&p}, st, TrainConfig{});
    CHECK(p.values()[0] == 1.0f);
}

TEST_CASE("non-finite gradients abort naming the parameter") {
    Param p("qformer.layer0.self.q.w", {1}, {1.0f});
    p.data->grad = {std::numeric_limits<float>::quiet_NaN()};
    OptimizerState st;
    TrainConfig cfg;
    CHECK(tu::throws_with([&] { adamw_step({&p}, st, cfg); }, "qformer.layer0.self.q.w"));
}

TEST_CASE("weight decay is decoupled from the moments") {
    // With a zero gradient the Adam term vanishes; decay alone shrinks the
    // weight multiplicatively by lr * wd regardless of past moments.
    Param p("p", {1}, {2.0f});
    p.data->grad = {0.0f};
    OptimizerState st;
    TrainConfig cfg;
    cfg.lr = 0.1;
    cfg.weight_decay = 0.5;
    adamw_step({&p}, st, cfg);
    CHECK(p.values()[0] == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0).epsilon(1e-7));
}

TEST_CASE("repeated steps track a double-precision replica") {
    Rng rng(13);
    Param p = tu::random_param("p", {4}, rng);
    std::vector<double> mirror(p.values().begin(), p.values().end());
    std::vector<double> m(4, 0.0), v(4, 0.0);
    OptimizerState st;
    TrainConfig cfg;
    cfg.lr = 1e-2;

    for (int step = 1; step <= 25; ++step) {
        p.data->grad = tu::random_values(4, rng, 1.0);
        std::vector<float> grads = p.data->grad;
        adamw_step({&p}, st, cfg);
        double bc1 = 1.0 - std::pow(cfg.beta1, step);
        double bc2 = 1.0 - std::pow(cfg.beta2, step);
        for (int i = 0; i < 4; ++i) {
            double g = grads[static_cast<size_t>(i)];
            m[static_cast<size_t>(i)] = cfg.beta1 * m[static_cast<size_t>(i)] + 0.1 * g;
            v[static_cast<size_t>(i)] = cfg.beta2 * v[static_cast<size_t>(i)] + 0.1 * g * g;
            double update = cfg.lr * (m[static_cast<size_t>(i)] / bc1) /
                            (std::sqrt(v[static_cast<size_t>(i)] / bc2) + cfg.eps);
            // the replica reads the float32 value the optimizer stored
            double theta = mirror[static_cast<size_t>(i)];
            theta -= update;
            theta -= cfg.lr * cfg.weight_decay * mirror[static_cast<size_t>(i)];
            mirror[static_cast<size_t>(i)] = static_cast<float>(theta);
        }
        for (int i = 0; i < 4; ++i)
            CHECK(std::fabs(p.values()[static_cast<size_t>(i)] -
                            mirror[static_cast<size_t>(i)]) <= 1e-9);
    }
}
