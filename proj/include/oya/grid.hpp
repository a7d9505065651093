#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/array.hpp"

namespace oya {

using Timestamp = std::chrono::sys_seconds;

inline Timestamp from_unix(std::int64_t s) { return Timestamp{std::chrono::seconds{s}}; }
inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }

inline int year_of(Timestamp t) {
    auto day = std::chrono::floor<std::chrono::days>(t);
    return static_cast<int>(std::chrono::year_month_day{day}.year());
}

/// Equirectangular grid. Row 0 is the northernmost row and column 0 the westernmost.
struct GridSpec {
    double lat_min = -60.0;
    double lat_max = 60.0;
    double lon_min = -180.0;
    double lon_max = 180.0;
    double spacing = 0.045;
    int rows = 0;
    int cols = 0;

    static GridSpec make(double lat_min, double lat_max, double lon_min, double lon_max, double spacing) {
        if (!(spacing > 0.0)) throw std::invalid_argument("GridSpec: spacing must be positive");
        if (!(lat_max > lat_min) || !(lon_max > lon_min)) throw std::invalid_argument("GridSpec: empty extent");
        GridSpec g{lat_min, lat_max, lon_min, lon_max, spacing, 0, 0};
        g.rows = static_cast<int>(std::lround((lat_max - lat_min) / spacing));
        g.cols = static_cast<int>(std::lround((lon_max - lon_min) / spacing));
        if (g.rows < 1 || g.cols < 1) throw std::invalid_argument("GridSpec: extent smaller than one cell");
        return g;
    }

    /// 60S-60N, 180W-180E at 0.045 degrees (~5 km at the equator): 2667 x 8000 cells.
    static GridSpec global() { return make(-60.0, 60.0, -180.0, 180.0, 0.045); }

    /// Sub-window whose cells coincide with cells of this grid.
    GridSpec window(int row0, int col0, int nrows, int ncols) const {
        if (row0 < 0 || col0 < 0 || nrows < 1 || ncols < 1 || row0 + nrows > rows || col0 + ncols > cols)
            throw std::out_of_range("GridSpec::window: outside grid");
        GridSpec w;
        w.spacing = spacing;
        w.lat_max = lat_max - row0 * spacing;
        w.lat_min = w.lat_max - nrows * spacing;
        w.lon_min = lon_min + col0 * spacing;
        w.lon_max = w.lon_min + ncols * spacing;
        w.rows = nrows;
        w.cols = ncols;
        return w;
    }

    double center_lat(int row) const { return lat_max - (row + 0.5) * spacing; }
    double center_lon(int col) const { return lon_min + (col + 0.5) * spacing; }

    bool valid() const {
        return spacing > 0 && lat_max > lat_min && lon_max > lon_min &&
               rows == std::lround((lat_max - lat_min) / spacing) && cols == std::lround((lon_max - lon_min) / spacing);
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct CellIndex {
    int row = 0;
    int col = 0;
    friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Cell containing (lat, lon), or nullopt when the point is outside the grid extent.
inline std::optional<CellIndex> latlon_to_index(double lat, double lon, const GridSpec& g) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) return std::nullopt;
    if (lat < g.lat_min || lat > g.lat_max || lon < g.lon_min || lon >= g.lon_max) return std::nullopt;
    int row = static_cast<int>(std::floor((g.lat_max - lat) / g.spacing));
    int col = static_cast<int>(std::floor((lon - g.lon_min) / g.spacing));
    return CellIndex{std::clamp(row, 0, g.rows - 1), std::clamp(col, 0, g.cols - 1)};
}

enum class ChannelCategory { visible, near_ir, ir };

inline std::string to_string(ChannelCategory c) {
    switch (c) {
        case ChannelCategory::visible: return "visible";
        case ChannelCategory::near_ir: return "near-IR";
        case ChannelCategory::ir: return "IR";
    }
    return "IR";
}

inline ChannelCategory parse_channel_category(const std::string& s) {
    if (s == "visible") return ChannelCategory::visible;
    if (s == "near-IR") return ChannelCategory::near_ir;
    if (s == "IR") return ChannelCategory::ir;
    throw std::invalid_argument("unknown channel category: " + s);
}

struct ChannelDescriptor {
    std::string name;
    double center_wavelength = 0.0;  // microns
    ChannelCategory category = ChannelCategory::ir;

    friend bool operator==(const ChannelDescriptor&, const ChannelDescriptor&) = default;
};

/// Meteosat SEVIRI channel inventory (wavelengths in microns).
inline std::vector<ChannelDescriptor> seviri_channels() {
    using enum ChannelCategory;
    return {{"red", 0.6, visible},           {"vegetation", 0.8, near_ir},
            {"snow_ice", 1.6, near_ir},      {"shortwave_window", 3.9, ir},
            {"upper_wv", 6.2, ir},           {"lower_wv", 7.3, ir},
            {"cloud_top_phase", 8.7, ir},    {"ozone", 9.7, ir},
            {"longwave_window", 10.8, ir},   {"dirty_longwave", 12.0, ir},
            {"co2", 13.4, ir}};
}

inline void validate_channels(const std::vector<ChannelDescriptor>& channels) {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (!(channels[i].center_wavelength > 0.0))
            throw std::invalid_argument("channel " + channels[i].name + ": wavelength must be positive");
        for (std::size_t j = 0; j < i; ++j)
            if (channels[i].name == channels[j].name)
                throw std::invalid_argument("duplicate channel name: " + channels[i].name);
    }
}

struct GeoScene {
    Timestamp t_start;
    Timestamp t_end;
    GridSpec grid;
    std::vector<ChannelDescriptor> channels;
    Volume<float> data;  // channels x rows x cols

    void validate() const {
        if (t_start > t_end) throw std::invalid_argument("GeoScene: t_start after t_end");
        if (static_cast<int>(channels.size()) != data.channels)
            throw std::invalid_argument("GeoScene: channel descriptors do not match data");
        if (data.rows != grid.rows || data.cols != grid.cols)
            throw std::invalid_argument("GeoScene: data extent does not match grid");
        validate_channels(channels);
    }
};

struct SwathSample {
    double lat = 0.0;
    double lon = 0.0;
    Timestamp time;
    double rate = 0.0;  // mm/h
};

struct PrecipSwath {
    std::vector<SwathSample> samples;

    void validate() const {
        for (const auto& s : samples) {
            if (!std::isfinite(s.rate) || s.rate < 0.0) throw std::invalid_argument("PrecipSwath: bad rate");
            if (!(s.lat >= -90.0 && s.lat <= 90.0)) throw std::invalid_argument("PrecipSwath: latitude out of range");
            if (!(s.lon >= -180.0 && s.lon < 180.0)) throw std::invalid_argument("PrecipSwath: longitude out of range");
        }
    }
};

struct GriddedPair {
    Volume<float> x;
    Plane<float> y;
    Plane<std::uint8_t> m;
};

/// One training example: a tile of a gridded pair plus where it came from.
struct PatchRecord {
    Volume<float> x;
    Plane<float> y;
    Plane<std::uint8_t> m;
    int origin_row = 0;
    int origin_col = 0;
    Timestamp t_start;
    Timestamp t_end;

    int rows() const { return y.rows; }
    int cols() const { return y.cols; }
    std::size_t valid_cells() const {
        std::size_t n = 0;
        for (auto v : m.data) n += v != 0;
        return n;
    }
};

struct RasterizedSwath {
    Plane<float> y;
    Plane<std::uint8_t> m;
};

/// Grids the in-window samples; cells holding several samples take their mean rate.
inline RasterizedSwath rasterize_swath(const PrecipSwath& s, const GridSpec& g, Timestamp t0, Timestamp t1) {
    if (t0 > t1) throw std::invalid_argument("rasterize_swath: t0 after t1");
    Plane<double> sum(g.rows, g.cols, 0.0);
    Plane<int> count(g.rows, g.cols, 0);
    for (const auto& sample : s.samples) {
        if (sample.time < t0 || sample.time > t1) continue;
        auto idx = latlon_to_index(sample.lat, sample.lon, g);
        if (!idx) continue;
        sum(idx->row, idx->col) += sample.rate;
        count(idx->row, idx->col) += 1;
    }
    RasterizedSwath out{Plane<float>(g.rows, g.cols, 0.0f), Plane<std::uint8_t>(g.rows, g.cols, 0)};
    for (std::size_t i = 0; i < out.y.size(); ++i) {
        if (count.data[i] == 0) continue;
        out.m.data[i] = 1;
        out.y.data[i] = static_cast<float>(sum.data[i] / count.data[i]);
    }
    return out;
}

inline GriddedPair collocate(const GeoScene& scene, const PrecipSwath& s) {
    scene.validate();
    auto r = rasterize_swath(s, scene.grid, scene.t_start, scene.t_end);
    return GriddedPair{scene.data, std::move(r.y), std::move(r.m)};
}

/// As above, but refuses a scene that is not on the intended target grid.
inline GriddedPair collocate(const GeoScene& scene, const PrecipSwath& s, const GridSpec& target) {
    if (!(scene.grid == target)) throw std::invalid_argument("collocate: scene grid does not match target grid");
    return collocate(scene, s);
}

/// Non-overlapping patch x patch tiles anchored at (0, 0); only tiles with a valid cell are kept.
inline std::vector<PatchRecord> tile_patches(const GriddedPair& p, int patch, Timestamp t_start = {},
                                             Timestamp t_end = {}) {
    if (patch < 1) throw std::invalid_argument("tile_patches: patch must be positive");
    if (patch > p.y.rows || patch > p.y.cols)
        throw std::invalid_argument("tile_patches: patch larger than pair");
    if (!p.m.same_shape(p.y) || p.x.rows != p.y.rows || p.x.cols != p.y.cols)
        throw std::invalid_argument("tile_patches: x, y and m disagree in shape");
    std::vector<PatchRecord> out;
    for (int r0 = 0; r0 + patch <= p.y.rows; r0 += patch) {
        for (int c0 = 0; c0 + patch <= p.y.cols; c0 += patch) {
            bool any = false;
            for (int r = r0; r < r0 + patch && !any; ++r)
                for (int c = c0; c < c0 + patch; ++c)
                    if (p.m(r, c)) {
                        any = true;
                        break;
                    }
            if (!any) continue;
            out.push_back(PatchRecord{crop(p.x, r0, c0, patch, patch), crop(p.y, r0, c0, patch, patch),
                                      crop(p.m, r0, c0, patch, patch), r0, c0, t_start, t_end});
        }
    }
    return out;
}

}  // namespace oya
