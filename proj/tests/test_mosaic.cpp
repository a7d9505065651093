#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "oya/mosaic.hpp"

using namespace oya;

namespace {

// Great-circle distance via the spherical law of cosines on unit vectors.
double angle_oracle(double lat1, double lon1, double lat2, double lon2) {
    const double d = std::numbers::pi / 180.0;
    const double x1 = std::cos(lat1 * d) * std::cos(lon1 * d), y1 = std::cos(lat1 * d) * std::sin(lon1 * d),
                 z1 = std::sin(lat1 * d);
    const double x2 = std::cos(lat2 * d) * std::cos(lon2 * d), y2 = std::cos(lat2 * d) * std::sin(lon2 * d),
                 z2 = std::sin(lat2 * d);
    const double cx = y1 * z2 - z1 * y2, cy = z1 * x2 - x1 * z2, cz = x1 * y2 - y1 * x2;
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), x1 * x2 + y1 * y2 + z1 * z2) / d;
}

// 1-degree cells over the default extent keep the tests fast.
GridSpec coarse() { return GridSpec::make(-60, 60, -180, 180, 1.0); }

SatelliteEstimate random_estimate(const GridSpec& g, double sub_lon, std::mt19937_64& rng) {
    std::exponential_distribution<float> rate(0.5f);
    SatelliteEstimate e{Plane<float>(g.rows, g.cols), coverage_mask(sub_lon, kDefaultViewRadius, g)};
    for (auto& v : e.rates.data) v = rate(rng);
    return e;
}

}  // namespace

TEST(GreatCircle, MatchesVectorOracle) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (int i = 0; i < 2000; ++i) {
        const double a = lat(rng), b = lon(rng), c = lat(rng), d = lon(rng);
        EXPECT_NEAR(great_circle_deg(a, b, c, d), angle_oracle(a, b, c, d), 1e-7);
    }
    EXPECT_NEAR(great_circle_deg(0, 0, 0, 90), 90.0, 1e-12);
    EXPECT_NEAR(great_circle_deg(0, -170, 0, 170), 20.0, 1e-9);
}

TEST(Coverage, EquatorialBoundaryAndNadir) {
    const auto g = GridSpec::make(-1, 1, -180, 180, 0.5);
    auto cov = coverage_mask(0.0, 90.0, g);
    for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < g.cols; ++c) {
            const double lon = g.center_lon(c), lat = g.center_lat(r);
            if (std::abs(lat) < 0.5 && std::abs(lon) < 90.0) {
                EXPECT_TRUE(cov(r, c)) << lat << "," << lon;
            }
            if (std::abs(lon) > 90.0) {
                EXPECT_FALSE(cov(r, c)) << lat << "," << lon;
            }
        }
    for (double sub : {-135.0, 0.0, 57.0, 140.7}) {
        auto m = coverage_mask(sub, 1.0, GridSpec::global());
        auto idx = latlon_to_index(0.001, sub + 0.001, GridSpec::global());
        ASSERT_TRUE(idx);
        EXPECT_TRUE(m(idx->row, idx->col));
    }
    EXPECT_THROW(coverage_mask(0, 0, g), std::invalid_argument);
    EXPECT_THROW(coverage_mask(0, 91, g), std::invalid_argument);
}

TEST(Coverage, MatchesPerCellOracle) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> sub(-180, 180), radius(10, 85);
    const auto g = coarse();
    for (int trial = 0; trial < 10; ++trial) {
        const double s = sub(rng), rad = radius(rng);
        auto cov = coverage_mask(s, rad, g);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c) {
                const double dist = angle_oracle(g.center_lat(r), g.center_lon(c), 0.0, s);
                if (std::abs(dist - rad) > 1e-6) {
                    EXPECT_EQ(cov(r, c) != 0, dist <= rad);
                }
            }
    }
}

TEST(MergeGlobal, SingleSatellite) {
    std::mt19937_64 rng(3);
    const auto g = coarse();
    auto e = random_estimate(g, 0.0, rng);
    auto out = merge_global({e});
    for (std::size_t i = 0; i < e.rates.size(); ++i) {
        if (e.coverage.data[i]) {
            EXPECT_EQ(out.rates.data[i], e.rates.data[i]);
            EXPECT_EQ(out.contributor_count.data[i], 1);
        } else {
            EXPECT_TRUE(std::isnan(out.rates.data[i]));
            EXPECT_EQ(out.contributor_count.data[i], 0);
        }
    }
}

TEST(MergeGlobal, OverlapAveraging) {
    const auto g = coarse();
    SatelliteEstimate a{Plane<float>(g.rows, g.cols, 1.0f), coverage_mask(0.0, 70, g)};
    SatelliteEstimate b{Plane<float>(g.rows, g.cols, 3.0f), coverage_mask(40.0, 70, g)};
    auto out = merge_global({a, b});
    auto idx = latlon_to_index(0.5, 20.5, g);
    ASSERT_TRUE(idx);
    EXPECT_EQ(out.contributor_count(idx->row, idx->col), 2);
    EXPECT_EQ(out.rates(idx->row, idx->col), 2.0f);
    SatelliteEstimate same{a.rates, b.coverage};
    auto agree = merge_global({a, same});
    EXPECT_EQ(agree.rates(idx->row, idx->col), 1.0f);
    EXPECT_THROW(merge_global({}), std::invalid_argument);
    EXPECT_THROW(merge_global({a, SatelliteEstimate{Plane<float>(2, 2), Plane<std::uint8_t>(2, 2)}}), std::invalid_argument);
}

TEST(MergeGlobal, PermutationInvariantAndBounded) {
    std::mt19937_64 rng(4);
    const auto g = coarse();
    std::vector<SatelliteEstimate> es;
    for (double s : {-137.0, -75.2, 0.0, 57.0, 140.7}) es.push_back(random_estimate(g, s, rng));
    auto ref = merge_global(es);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(es.begin(), es.end(), rng);
        auto out = merge_global(es);
        EXPECT_EQ(out.contributor_count, ref.contributor_count);
        for (std::size_t i = 0; i < out.rates.size(); ++i) {
            if (std::isnan(ref.rates.data[i])) {
                EXPECT_TRUE(std::isnan(out.rates.data[i]));
            } else {
                EXPECT_EQ(out.rates.data[i], ref.rates.data[i]);
            }
        }
    }
    for (std::size_t i = 0; i < ref.rates.size(); ++i) {
        float lo = INFINITY, hi = -INFINITY;
        int n = 0;
        for (const auto& e : es)
            if (e.coverage.data[i]) {
                lo = std::min(lo, e.rates.data[i]);
                hi = std::max(hi, e.rates.data[i]);
                ++n;
            }
        EXPECT_EQ(ref.contributor_count.data[i], n);
        if (n) {
            EXPECT_GE(ref.rates.data[i], lo);
            EXPECT_LE(ref.rates.data[i], hi);
        }
    }
}

TEST(GlobalProduct, EncodeDecodeRoundTrip) {
    std::mt19937_64 rng(5);
    const auto g = coarse();
    auto out = merge_global({random_estimate(g, 0.0, rng), random_estimate(g, 100.0, rng)});
    auto bytes = encode_global_product(out);
    auto back = decode_global_product(bytes);
    EXPECT_EQ(back.contributor_count, out.contributor_count);
    EXPECT_EQ(encode_global_product(back), bytes);
    EXPECT_THROW(decode_global_product(bytes.substr(0, bytes.size() - 1)), std::runtime_error);
    GlobalEstimate too_many{Plane<float>(1, 1, 1.0f), Plane<std::uint16_t>(1, 1, 300)};
    EXPECT_THROW(encode_global_product(too_many), std::out_of_range);
}
