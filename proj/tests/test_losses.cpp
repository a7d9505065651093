#include <gtest/gtest.h>

#include <random>

#include "oya/losses.hpp"
#include "oya/train.hpp"
#include "support/grad_check.hpp"

using namespace oya;
using oya::testing::check_params;

namespace {

struct Fields {
    Plane<std::uint8_t> m, rain;
    Plane<double> y, y_pred, w;
    Volume<double> logits;
};

Fields random_fields(int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution b(0.6), r(0.3);
    std::normal_distribution<double> n(0.0, 2.0);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    Fields f{Plane<std::uint8_t>(h, w), Plane<std::uint8_t>(h, w), Plane<double>(h, w), Plane<double>(h, w),
             Plane<double>(h, w), Volume<double>(2, h, w)};
    for (std::size_t i = 0; i < f.m.size(); ++i) {
        f.m.data[i] = b(rng);
        f.rain.data[i] = r(rng);
        f.y.data[i] = n(rng);
        f.y_pred.data[i] = n(rng);
        f.w.data[i] = u(rng);
    }
    for (auto& v : f.logits.data) v = n(rng);
    return f;
}

}  // namespace

TEST(MaskedL2, Examples) {
    Plane<std::uint8_t> none(4, 4, 0);
    Plane<double> y(4, 4, 1.0), yp(4, 4, 3.0), g(4, 4, 0.0);
    auto l = masked_l2_loss(none, y, yp, &g);
    EXPECT_EQ(l.sum, 0.0);
    EXPECT_EQ(l.count, 0u);
    EXPECT_EQ(l.mean(), 0.0);
    for (double v : g.data) EXPECT_EQ(v, 0.0);
    Plane<std::uint8_t> one(4, 4, 0);
    one(2, 1) = 1;
    EXPECT_EQ(masked_l2_loss(one, y, yp).sum, 4.0);
    EXPECT_THROW(masked_l2_loss(one, Plane<double>(4, 3), yp), std::invalid_argument);
}

TEST(MaskedL2, MatchesLoopOracleWithGradient) {
    auto f = random_fields(23, 19, 1);
    Plane<double> g(23, 19, 0.0);
    auto l = masked_l2_loss(f.m, f.y, f.y_pred, &g, 0.5);
    double oracle = 0;
    for (int r = 0; r < 23; ++r)
        for (int c = 0; c < 19; ++c) {
            const double d = f.y_pred(r, c) - f.y(r, c);
            if (f.m(r, c)) oracle += d * d;
            EXPECT_NEAR(g(r, c), f.m(r, c) ? d : 0.0, 1e-12);
        }
    EXPECT_NEAR(l.sum, oracle, 1e-10);
}

TEST(WeightedCe, Examples) {
    Plane<std::uint8_t> m(3, 3, 1), labels(3, 3, 0);
    labels(1, 1) = 1;
    Volume<double> perfect(2, 3, 3);
    for (int i = 0; i < 9; ++i) {
        const bool rain = labels.data[i];
        perfect.plane(kRainLogit)[i] = rain ? 20 : -20;
        perfect.plane(kNoRainLogit)[i] = rain ? -20 : 20;
    }
    auto l = weighted_ce_loss(m, labels, perfect, {1.0, 1.0});
    EXPECT_LE(l.mean(), 1e-6);
    Volume<double> uniform(2, 3, 3, 0.25);
    EXPECT_NEAR(weighted_ce_loss(m, labels, uniform, {1.0, 1.0}).mean(), std::log(2.0), 1e-15);
    EXPECT_EQ(weighted_ce_loss(Plane<std::uint8_t>(3, 3, 0), labels, uniform, {1.0, 1.0}).sum, 0.0);
    EXPECT_THROW(weighted_ce_loss(m, labels, Volume<double>(1, 3, 3), {1.0, 1.0}), std::invalid_argument);
}

TEST(WeightedCe, MatchesPerCellOracleAndDoublesWithWeights) {
    auto f = random_fields(17, 21, 2);
    const std::array<double, 2> cw{0.3, 1.7};
    Volume<double> g(2, 17, 21, 0.0);
    auto l = weighted_ce_loss(f.m, f.rain, f.logits, cw, &g);
    double oracle = 0;
    for (int r = 0; r < 17; ++r)
        for (int c = 0; c < 21; ++c) {
            const double a = f.logits(kNoRainLogit, r, c), b = f.logits(kRainLogit, r, c);
            const double p_rain = 1.0 / (1.0 + std::exp(a - b));
            const bool rain = f.rain(r, c);
            const double w = rain ? cw[1] : cw[0];
            if (f.m(r, c)) oracle += -w * std::log(rain ? p_rain : 1.0 - p_rain);
            const double d_rain = f.m(r, c) ? w * (p_rain - (rain ? 1.0 : 0.0)) : 0.0;
            EXPECT_NEAR(g(kRainLogit, r, c), d_rain, 1e-12);
            EXPECT_NEAR(g(kNoRainLogit, r, c), -d_rain, 1e-12);
        }
    EXPECT_NEAR(l.sum, oracle, 1e-10);
    auto l2 = weighted_ce_loss(f.m, f.rain, f.logits, {2 * cw[0], 2 * cw[1]});
    EXPECT_NEAR(l2.sum, 2 * l.sum, 1e-10);
}

TEST(LdsRegression, ReducesToMaskedL2WithUnitWeights) {
    auto f = random_fields(12, 12, 3);
    std::size_t n = 0;
    for (auto v : f.m.data) n += v;
    std::vector<double> ones(n, 1.0);
    EXPECT_NEAR(lds_weighted_regression_loss(f.m, f.y, f.y_pred, ones).sum, masked_l2_loss(f.m, f.y, f.y_pred).sum, 1e-12);
}

TEST(LdsRegression, MatchesWeightedOracle) {
    auto f = random_fields(12, 15, 4);
    std::vector<double> w;
    double oracle = 0;
    for (std::size_t i = 0; i < f.m.size(); ++i)
        if (f.m.data[i]) {
            w.push_back(0.5 + static_cast<double>(w.size() % 7));
            const double d = f.y_pred.data[i] - f.y.data[i];
            oracle += w.back() * d * d;
        }
    Plane<double> g(12, 15, 0.0);
    EXPECT_NEAR(lds_weighted_regression_loss(f.m, f.y, f.y_pred, w, &g).sum, oracle, 1e-10);
    std::size_t k = 0;
    for (std::size_t i = 0; i < f.m.size(); ++i)
        EXPECT_NEAR(g.data[i], f.m.data[i] ? 2 * w[k++] * (f.y_pred.data[i] - f.y.data[i]) : 0.0, 1e-12);
}

TEST(LdsRegression, MisalignedWeightsAreRejected) {
    auto f = random_fields(5, 5, 5);
    std::size_t n = 0;
    for (auto v : f.m.data) n += v;
    EXPECT_THROW(lds_weighted_regression_loss(f.m, f.y, f.y_pred, std::vector<double>(n + 1, 1.0)), std::invalid_argument);
    EXPECT_THROW(lds_weighted_regression_loss(f.m, f.y, f.y_pred, std::vector<double>(n - 1, 1.0)), std::invalid_argument);
}

// Both losses end to end through a depth-2 network in double precision.
class NetworkLossGradients : public ::testing::Test {
protected:
    void SetUp() override {
        model = TwoStageModel<double>::create(3, {}, 2, 4, 11);
        std::mt19937_64 rng(11);
        std::normal_distribution<double> n(0.0, 0.1);
        for (auto* net : {&model.classifier, &model.regressor})
            for (auto& p : net->params())
                if (p.name.ends_with(".bias"))
                    for (auto& v : p.value) v = n(rng);
        std::normal_distribution<float> x(0.0f, 1.0f);
        std::exponential_distribution<float> rate(0.5f);
        std::bernoulli_distribution valid(0.5), rain(0.4);
        rec = PatchRecord{Volume<float>(3, 16, 16), Plane<float>(16, 16), Plane<std::uint8_t>(16, 16), 0, 0, {}, {}};
        for (auto& v : rec.x.data) v = x(rng);
        for (std::size_t i = 0; i < rec.y.size(); ++i) {
            rec.m.data[i] = valid(rng);
            rec.y.data[i] = rain(rng) ? 0.2f + rate(rng) : 0.0f;
        }
        input = model.prepare(rec.x);
    }

    TwoStageModel<double> model;
    PatchRecord rec;
    Volume<double> input;
};

TEST_F(NetworkLossGradients, FiniteDifferencesAgree) {
    std::vector<double> z;
    for (std::size_t i = 0; i < rec.y.size(); ++i)
        if (rec.m.data[i] && rec.y.data[i] >= kRainThreshold) z.push_back(std::log(rec.y.data[i]));
    LdsTable lds(z, LDSConfig{});
    auto tgt = make_targets<double>(rec, &lds);
    const std::array<double, 2> cw{0.6, 1.4};
    const double cs = 1.0 / static_cast<double>(tgt.valid_count()), rs = 1.0 / static_cast<double>(tgt.rain_count());
    nn::Gradients<double> cg(model.classifier.params()), rg(model.regressor.params());
    example_gradients(model, input, tgt, cw, cs, rs, &cg, &rg);
    auto closs = [&] { return cs * weighted_ce_loss(tgt.valid, tgt.rain, model.classifier.forward(input), cw).sum; };
    auto rloss = [&] {
        return rs * weighted_l2_loss(tgt.rain_valid, tgt.log_rate, model.regressor.forward(input).plane_copy(0), tgt.weight).sum;
    };
    auto c = check_params(model.classifier.params(), cg, closs, 150, 1);
    auto r = check_params(model.regressor.params(), rg, rloss, 150, 2);
    EXPECT_LT(c.max_rel_error, 1e-4);
    EXPECT_LT(r.max_rel_error, 1e-4);
    EXPECT_GT(c.max_abs_grad, 0.0);
    EXPECT_GT(r.max_abs_grad, 0.0);
}

TEST_F(NetworkLossGradients, AllInvalidMaskContributesNothing) {
    std::fill(rec.m.data.begin(), rec.m.data.end(), 0);
    auto tgt = make_targets<double>(rec, nullptr);
    nn::Gradients<double> cg(model.classifier.params()), rg(model.regressor.params());
    auto l = example_gradients(model, input, tgt, {1.0, 1.0}, 1.0, 1.0, &cg, &rg);
    EXPECT_EQ(l.classifier.sum, 0.0);
    EXPECT_EQ(l.regression.sum, 0.0);
    for (const auto* g : {&cg, &rg})
        for (const auto& v : g->g)
            for (double x : v) EXPECT_EQ(x, 0.0);
}
