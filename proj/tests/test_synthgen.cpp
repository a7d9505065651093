#include <gtest/gtest.h>

#include <algorithm>

#include "oya/dataset.hpp"
#include "oya/synthgen.hpp"

using namespace oya;

namespace {

SynthConfig small(std::uint64_t seed = 7) {
    SynthConfig c;
    c.seed = seed;
    c.grid = GridSpec::global().window(1000, 4400, 48, 48);
    return c;
}

double median_abs_deviation(const Plane<float>& a, const Plane<float>& b) {
    std::vector<double> d;
    for (std::size_t i = 0; i < a.size(); ++i) d.push_back(std::abs(static_cast<double>(a.data[i]) - b.data[i]));
    std::nth_element(d.begin(), d.begin() + static_cast<long>(d.size() / 2), d.end());
    return d[d.size() / 2];
}

}  // namespace

TEST(Synthgen, DenseTruthFollowsRainLaw) {
    auto cfg = small();
    auto p = generate_pair(cfg);
    const int lw = longwave_index(p.scene.channels), wv = channel_index(p.scene.channels, "upper_wv");
    ASSERT_GE(lw, 0);
    ASSERT_GE(wv, 0);
    const auto& law = cfg.rain_law;
    int dry_by_law = 0;
    for (int r = 0; r < 48; ++r)
        for (int c = 0; c < 48; ++c) {
            const double b = p.scene.data(lw, r, c) + law.coupling * (p.scene.data(wv, r, c) - 235.0);
            const double expected = b >= law.critical_temperature ? 0.0 : law.scale * std::pow(law.critical_temperature - b, law.shape);
            EXPECT_NEAR(p.dense_truth(r, c), expected, 1e-12 + 1e-6 * expected);
            if (b >= law.critical_temperature) {
                EXPECT_EQ(p.dense_truth(r, c), 0.0f);
                ++dry_by_law;
            }
        }
    EXPECT_GT(dry_by_law, 0);
    EXPECT_EQ(rain_rate(law, 300.0, 235.0), 0.0);
    EXPECT_NEAR(rain_rate(law, 221.0, 235.0), 0.06 * 8.0, 1e-12);
}

TEST(Synthgen, SameSeedSameOutput) {
    auto a = generate_pair(small(3)), b = generate_pair(small(3)), c = generate_pair(small(4));
    EXPECT_EQ(a.scene.data, b.scene.data);
    EXPECT_EQ(a.dense_truth, b.dense_truth);
    ASSERT_EQ(a.swath.samples.size(), b.swath.samples.size());
    for (std::size_t i = 0; i < a.swath.samples.size(); ++i) {
        EXPECT_EQ(a.swath.samples[i].rate, b.swath.samples[i].rate);
        EXPECT_EQ(a.swath.samples[i].time, b.swath.samples[i].time);
    }
    EXPECT_NE(a.scene.data, c.scene.data);
    auto ra = synth_records(small(5), {4, SynthTarget::swath, 16, 0});
    auto rb = synth_records(small(5), {4, SynthTarget::swath, 16, 0});
    ASSERT_EQ(ra.size(), rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_EQ(ra[i].y, rb[i].y);
}

TEST(Synthgen, SwathRasterizesOntoDenseTruth) {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        auto p = generate_pair(small(seed));
        auto g = collocate(p.scene, p.swath);
        std::size_t sampled = 0;
        for (std::size_t i = 0; i < g.m.size(); ++i)
            if (g.m.data[i]) {
                ++sampled;
                EXPECT_EQ(g.y.data[i], p.dense_truth.data[i]);
            }
        // one sample per swath cell
        EXPECT_EQ(sampled, p.swath.samples.size());
        EXPECT_GT(sampled, 0u);
        for (const auto& s : p.swath.samples) {
            EXPECT_GE(s.time, p.scene.t_start);
            EXPECT_LE(s.time, p.scene.t_end);
        }
    }
}

TEST(Synthgen, SwathIsSparseAndRainIsRare) {
    std::size_t valid = 0, cells = 0;
    std::vector<PatchRecord> dense;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto cfg = small(seed);
        cfg.grid = GridSpec::global().window(1000, 4400, 128, 128);
        auto p = generate_pair(cfg);
        auto g = collocate(p.scene, p.swath);
        for (auto v : g.m.data) valid += v;
        cells += g.m.size();
        dense.push_back(PatchRecord{p.scene.data, p.dense_truth, Plane<std::uint8_t>(128, 128, 1), 0, 0, {}, {}});
    }
    // a 25-cell strip crossing a 128-cell window covers well under half of it
    EXPECT_LT(static_cast<double>(valid) / static_cast<double>(cells), 0.35);
    auto h = class_histogram(dense);
    double total = 0;
    for (auto c : h) total += static_cast<double>(c);
    EXPECT_GT(h[0] / total, 0.8);
    for (int k = 1; k < 5; ++k) EXPECT_GT(h[k], 0u) << kPrecipClassNames[k];
}

TEST(Synthgen, DenseNoisyLimitAndMonotoneNoise) {
    auto cfg = small(9);
    auto truth = generate_pair(cfg).dense_truth;
    cfg.noise_level = 0.0;
    auto clean = generate_dense_noisy(cfg);
    EXPECT_EQ(clean.y, truth);
    for (auto v : clean.m.data) EXPECT_EQ(v, 1);
    double prev = 0.0;
    for (double sigma : {0.1, 0.2, 0.4}) {
        cfg.noise_level = sigma;
        auto noisy = generate_dense_noisy(cfg);
        for (auto v : noisy.m.data) EXPECT_EQ(v, 1);
        // compare on raining cells, where multiplicative noise acts
        Plane<float> a(1, 0), b(1, 0);
        for (std::size_t i = 0; i < truth.size(); ++i)
            if (truth.data[i] >= kRainThreshold) {
                a.data.push_back(noisy.y.data[i]);
                b.data.push_back(truth.data[i]);
            }
        ASSERT_FALSE(a.data.empty());
        const double mad = median_abs_deviation(a, b);
        EXPECT_GT(mad, prev) << "sigma " << sigma;
        prev = mad;
        EXPECT_EQ(noisy.x, clean.x);
    }
}

TEST(Synthgen, ChannelSelection) {
    auto all = synth_channels(11);
    EXPECT_EQ(all.size(), 11u);
    EXPECT_EQ(all, seviri_channels());
    auto eight = synth_channels(8);
    EXPECT_EQ(eight.size(), 8u);
    EXPECT_GE(longwave_index(eight), 0);
    EXPECT_GE(channel_index(eight, "upper_wv"), 0);
    auto one = synth_channels(1);
    EXPECT_EQ(one[0].name, "longwave_window");
    auto cfg = small();
    cfg.channels = 12;
    EXPECT_THROW(generate_pair(cfg), std::invalid_argument);
    cfg.channels = 8;
    cfg.noise_level = 1.0;
    EXPECT_THROW(generate_dense_noisy(cfg), std::invalid_argument);
}

TEST(Synthgen, RecordStreamsAreDisjoint) {
    auto base = small(7);
    auto a = synth_records(base, {3, SynthTarget::dense, 48, 0});
    auto b = synth_records(base, {3, SynthTarget::dense, 48, 1});
    ASSERT_EQ(a.size(), 3u);
    for (const auto& ra : a)
        for (const auto& rb : b) EXPECT_NE(ra.x, rb.x);
    EXPECT_EQ(to_unix(a[1].t_start) - to_unix(a[0].t_start), 3 * 86400);
}
