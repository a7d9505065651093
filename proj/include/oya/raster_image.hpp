#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>

#include "oya/array.hpp"

namespace oya {

using Rgb = std::array<std::uint8_t, 3>;

/// Fixed rate lookup (mm/h):
///   no data      -> grey   (128,128,128)
///   < 0.2        -> white  (245,245,245)
///   [0.2, 1.0)   -> light blue (160,210,255)
///   [1.0, 2.4)   -> blue   (40,110,240)
///   [2.4, 7.0)   -> orange (255,170,0)
///   >= 7.0       -> red    (210,0,0)
inline Rgb rate_color(double rate) {
    if (!std::isfinite(rate)) return {128, 128, 128};
    if (rate < 0.2) return {245, 245, 245};
    if (rate < 1.0) return {160, 210, 255};
    if (rate < 2.4) return {40, 110, 240};
    if (rate < 7.0) return {255, 170, 0};
    return {210, 0, 0};
}

/// Linear blue-to-red ramp for scores in [0, 1]; grey where undefined.
inline Rgb score_color(double v) {
    if (!std::isfinite(v)) return {128, 128, 128};
    double t = std::clamp(v, 0.0, 1.0);
    return {static_cast<std::uint8_t>(std::lround(255 * t)), 40, static_cast<std::uint8_t>(std::lround(255 * (1 - t)))};
}

/// Binary portable pixmap (P6).
template <class T, class ColorFn>
std::string render_ppm(const Plane<T>& p, ColorFn color) {
    std::string out = "P6\n" + std::to_string(p.cols) + " " + std::to_string(p.rows) + "\n255\n";
    out.reserve(out.size() + p.size() * 3);
    for (auto v : p.data) {
        Rgb c = color(static_cast<double>(v));
        out.append(reinterpret_cast<const char*>(c.data()), 3);
    }
    return out;
}

/// False-colour composite: three channels each stretched to their own min/max.
inline std::string render_false_color(const Volume<float>& x, std::array<int, 3> rgb_channels) {
    std::string out = "P6\n" + std::to_string(x.cols) + " " + std::to_string(x.rows) + "\n255\n";
    std::array<float, 3> lo{}, hi{};
    for (int k = 0; k < 3; ++k) {
        auto plane = x.plane(std::clamp(rgb_channels[k], 0, x.channels - 1));
        auto [mn, mx] = std::minmax_element(plane.begin(), plane.end());
        lo[k] = plane.empty() ? 0.f : *mn;
        hi[k] = plane.empty() ? 1.f : *mx;
    }
    for (std::size_t i = 0; i < x.plane_size(); ++i)
        for (int k = 0; k < 3; ++k) {
            float v = x.plane(std::clamp(rgb_channels[k], 0, x.channels - 1))[i];
            float span = hi[k] - lo[k];
            double t = span > 0 ? (v - lo[k]) / span : 0.5;
            out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(255 * std::clamp(t, 0.0, 1.0)))));
        }
    return out;
}

}  // namespace oya
