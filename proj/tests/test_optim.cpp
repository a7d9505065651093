#include <gtest/gtest.h>

#include <limits>

#include "oya/optim.hpp"

using namespace oya;

namespace {

nn::ParamSet<double> scalar_params(double v) {
    nn::ParamSet<double> ps;
    ps.add("w", {1});
    ps[0].value[0] = v;
    return ps;
}

}  // namespace

TEST(AdamW, SingleStepClosedForm) {
    auto ps = scalar_params(0.5);
    AdamWState<double> st(ps);
    nn::Gradients<double> g(ps);
    g.g[0][0] = 1.0;
    AdamWConfig cfg{1e-3, 1e-2};
    ASSERT_TRUE(optimizer_step(ps, g, st, cfg).applied);
    // m_hat = g and v_hat = g^2 after one step, so the update is lr * (g / (|g| + eps) + wd * theta)
    const double expected = 0.5 - 1e-3 * (1.0 / (1.0 + 1e-8) + 1e-2 * 0.5);
    EXPECT_NEAR(ps[0].value[0], expected, 1e-15);
    EXPECT_EQ(st.step, 1);
}

TEST(AdamW, TwoStepsMatchRecurrence) {
    auto ps = scalar_params(-0.2);
    AdamWState<double> st(ps);
    nn::Gradients<double> g(ps);
    AdamWConfig cfg{1e-2, 0.0};
    double m = 0, v = 0, theta = -0.2;
    for (int t = 1; t <= 2; ++t) {
        const double grad = t == 1 ? 0.3 : -0.7;
        g.g[0][0] = grad;
        optimizer_step(ps, g, st, cfg);
        m = 0.9 * m + 0.1 * grad;
        v = 0.999 * v + 0.001 * grad * grad;
        theta -= 1e-2 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    }
    EXPECT_NEAR(ps[0].value[0], theta, 1e-15);
}

TEST(AdamW, ZeroGradientWithoutDecayLeavesParams) {
    nn::ParamSet<double> ps;
    ps.add("a", {2, 3});
    for (std::size_t i = 0; i < 6; ++i) ps[0].value[i] = 0.1 * static_cast<double>(i) - 0.2;
    auto before = ps[0].value;
    AdamWState<double> st(ps);
    nn::Gradients<double> g(ps);
    optimizer_step(ps, g, st, AdamWConfig{1e-3, 0.0});
    EXPECT_EQ(ps[0].value, before);
}

TEST(AdamW, DecoupledDecayShrinksByFactor) {
    nn::ParamSet<double> ps;
    ps.add("a", {4});
    ps[0].value = {1.0, -2.0, 0.5, 0.0};
    auto before = ps[0].value;
    AdamWState<double> st(ps);
    nn::Gradients<double> g(ps);
    const double lr = 1e-3, wd = 0.1;
    optimizer_step(ps, g, st, AdamWConfig{lr, wd});
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(ps[0].value[i], before[i] * (1 - lr * wd), 1e-16);
}

TEST(AdamW, NonFiniteGradientRejectsWholeStep) {
    nn::ParamSet<float> ps;
    ps.add("a", {2});
    ps.add("b", {2});
    ps[0].value = {1.0f, 2.0f};
    ps[1].value = {3.0f, 4.0f};
    AdamWState<float> st(ps);
    nn::Gradients<float> g(ps);
    g.g[0] = {0.5f, 0.5f};
    g.g[1] = {std::numeric_limits<float>::quiet_NaN(), 0.0f};
    auto out = optimizer_step(ps, g, st, AdamWConfig{});
    EXPECT_FALSE(out.applied);
    EXPECT_NE(out.diagnostic.find("b[0]"), std::string::npos);
    EXPECT_EQ(ps[0].value, (std::vector<float>{1.0f, 2.0f}));
    EXPECT_EQ(st.step, 0);
    EXPECT_EQ(st.m[0], (std::vector<double>{0.0, 0.0}));
    g.g[1][0] = std::numeric_limits<float>::infinity();
    EXPECT_FALSE(optimizer_step(ps, g, st, AdamWConfig{}).applied);
}

TEST(AdamW, ShapeMismatchIsReported) {
    auto ps = scalar_params(1.0);
    AdamWState<double> st(ps);
    nn::Gradients<double> g;
    EXPECT_FALSE(optimizer_step(ps, g, st, AdamWConfig{}).applied);
}
