#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/binary_io.hpp"
#include "oya/grid.hpp"

namespace oya {

inline constexpr double kDefaultViewRadius = 70.0;  // great-circle degrees from the sub-satellite point

/// Great-circle separation in degrees (haversine form).
inline double great_circle_deg(double lat1, double lon1, double lat2, double lon2) {
    constexpr double rad = std::numbers::pi / 180.0;
    const double dlat = (lat2 - lat1) * rad, dlon = (lon2 - lon1) * rad;
    const double a = std::sin(dlat / 2) * std::sin(dlat / 2) +
                     std::cos(lat1 * rad) * std::cos(lat2 * rad) * std::sin(dlon / 2) * std::sin(dlon / 2);
    return 2.0 * std::asin(std::min(1.0, std::sqrt(a))) / rad;
}

struct SatelliteCoverage {
    std::string satellite_id;
    double sub_longitude = 0.0;
    double max_view_radius = kDefaultViewRadius;
    Plane<std::uint8_t> coverage;
};

/// Cells whose centre lies within max_view_radius of the sub-satellite point (0, sub_longitude).
inline Plane<std::uint8_t> coverage_mask(double sub_longitude, double max_view_radius, const GridSpec& g) {
    if (!(max_view_radius > 0.0 && max_view_radius <= 90.0))
        throw std::invalid_argument("coverage_mask: radius must lie in (0, 90]");
    Plane<std::uint8_t> out(g.rows, g.cols, 0);
    for (int r = 0; r < g.rows; ++r) {
        const double lat = g.center_lat(r);
        for (int c = 0; c < g.cols; ++c)
            out(r, c) = great_circle_deg(lat, g.center_lon(c), 0.0, sub_longitude) <= max_view_radius;
    }
    return out;
}

inline SatelliteCoverage make_coverage(std::string id, double sub_longitude, const GridSpec& g,
                                       double max_view_radius = kDefaultViewRadius) {
    return {std::move(id), sub_longitude, max_view_radius, coverage_mask(sub_longitude, max_view_radius, g)};
}

struct SatelliteEstimate {
    Plane<float> rates;
    Plane<std::uint8_t> coverage;
};

/// rates is NaN wherever contributor_count is 0.
struct GlobalEstimate {
    Plane<float> rates;
    Plane<std::uint16_t> contributor_count;
};

/// Unweighted mean of the covering satellites' rates per cell.
inline GlobalEstimate merge_global(const std::vector<SatelliteEstimate>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("merge_global: no satellite estimates");
    const int rows = estimates.front().rates.rows, cols = estimates.front().rates.cols;
    for (const auto& e : estimates)
        if (!e.rates.same_shape(rows, cols) || !e.coverage.same_shape(rows, cols))
            throw std::invalid_argument("merge_global: estimates are not on one grid");
    Plane<double> sum(rows, cols, 0.0);
    GlobalEstimate out{Plane<float>(rows, cols, std::numeric_limits<float>::quiet_NaN()),
                       Plane<std::uint16_t>(rows, cols, 0)};
    for (const auto& e : estimates)
        for (std::size_t i = 0; i < sum.size(); ++i)
            if (e.coverage.data[i]) {
                sum.data[i] += e.rates.data[i];
                ++out.contributor_count.data[i];
            }
    for (std::size_t i = 0; i < sum.size(); ++i)
        if (auto n = out.contributor_count.data[i]) out.rates.data[i] = static_cast<float>(sum.data[i] / n);
    return out;
}

/// Product file: the rate plane (float32, NaN = no data) followed by the contributor counts (uint8).
inline std::string encode_global_product(const GlobalEstimate& g) {
    Plane<std::uint8_t> counts(g.contributor_count.rows, g.contributor_count.cols);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (g.contributor_count.data[i] > 255) throw std::out_of_range("encode_global_product: more than 255 contributors");
        counts.data[i] = static_cast<std::uint8_t>(g.contributor_count.data[i]);
    }
    ArrayWriter w;
    w.write(g.rates);
    w.write(counts);
    return w.bytes();
}

inline GlobalEstimate decode_global_product(const std::string& bytes, const std::string& origin = "<memory>") {
    ArrayReader r(bytes, origin);
    GlobalEstimate g;
    g.rates = r.plane_f32();
    auto counts = r.plane_u8();
    if (!r.at_end() || !counts.same_shape(g.rates)) throw std::runtime_error(origin + ": malformed product");
    g.contributor_count = Plane<std::uint16_t>(counts.rows, counts.cols);
    for (std::size_t i = 0; i < counts.size(); ++i) g.contributor_count.data[i] = counts.data[i];
    return g;
}

}  // namespace oya
