#pragma once

// Procedural (scene, swath) pairs with a known channel -> rain law.
//
// Four latent fields drive the channels: z1 cloud-top warmth, z2 upper-level moisture, z3 surface
// brightness, z4 cloud particle size. Each is white noise smoothed by a Gaussian of the configured
// correlation length and scaled back to unit variance. Rain depends on the longwave window channel
// and the upper-level water-vapour channel:
//
//     b    = Tb(10.8) + coupling * (Tb(6.2) - 235)
//     rate = alpha * max(0, T_c - b)^gamma
//
// so the longwave channel alone cannot recover the rain field exactly.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "oya/dataset.hpp"
#include "oya/grid.hpp"
#include "oya/parallel.hpp"

namespace oya {

struct RainLaw {
    double critical_temperature = 225.0;  // K
    double scale = 0.06;                  // mm/h per K^gamma
    double shape = 1.5;
    double coupling = 1.0;  // weight of the water-vapour anomaly in b
};

struct SynthConfig {
    std::uint64_t seed = 7;
    GridSpec grid = GridSpec::global().window(1000, 4400, 64, 64);
    int channels = 8;
    double correlation_length = 6.0;  // cells
    RainLaw rain_law;
    int swath_width = 25;       // cells, ~125 km at 5 km spacing
    double noise_level = 0.3;   // dense-noisy target corruption, in [0, 1)
    Timestamp t_start = from_unix(1561982400);  // 2019-07-01T12:00Z
    std::int64_t scan_seconds = 900;

    void validate() const {
        if (channels < 1 || channels > 11) throw std::invalid_argument("SynthConfig: channels must be in [1, 11]");
        if (swath_width < 1) throw std::invalid_argument("SynthConfig: swath_width must be >= 1");
        if (!(correlation_length > 0)) throw std::invalid_argument("SynthConfig: correlation_length must be positive");
        if (!(noise_level >= 0 && noise_level < 1)) throw std::invalid_argument("SynthConfig: noise_level must be in [0, 1)");
        if (!grid.valid()) throw std::invalid_argument("SynthConfig: invalid grid");
    }
};

struct SyntheticPair {
    GeoScene scene;
    PrecipSwath swath;
    Plane<float> dense_truth;
};

namespace synth_detail {

struct ChannelModel {
    double wavelength;
    double offset;
    std::array<double, 4> loading;  // on z1..z4
    double noise;
};

// Indexed like seviri_channels().
inline const std::array<ChannelModel, 11>& channel_models() {
    static const std::array<ChannelModel, 11> models{{
        {0.6, 0.30, {-0.12, 0.0, 0.04, 0.02}, 0.005},
        {0.8, 0.32, {-0.10, 0.0, 0.06, 0.02}, 0.005},
        {1.6, 0.20, {-0.06, 0.0, 0.03, 0.05}, 0.005},
        {3.9, 275.0, {15.0, 0.0, 5.0, 3.0}, 0.3},
        {6.2, 235.0, {4.0, 9.0, 0.0, 0.0}, 0.3},
        {7.3, 245.0, {8.0, 6.0, 2.0, 0.0}, 0.3},
        {8.7, 252.0, {18.0, 0.0, 2.0, 3.0}, 0.3},
        {9.7, 250.0, {14.0, 2.0, 0.0, 2.0}, 0.3},
        {10.8, 255.0, {20.0, 0.0, 0.0, 0.0}, 0.3},
        {12.0, 253.0, {19.0, 0.0, 0.0, 2.5}, 0.3},
        {13.4, 240.0, {10.0, 3.0, 0.0, 0.0}, 0.3},
    }};
    return models;
}

inline constexpr int kLongwaveModel = 8;
inline constexpr int kWaterVapourModel = 4;

/// Order in which channels are added as the channel count grows.
inline constexpr std::array<int, 11> kChannelPriority{8, 4, 5, 9, 6, 3, 0, 2, 1, 7, 10};

inline std::vector<int> selected_models(int channels) {
    std::vector<int> sel(kChannelPriority.begin(), kChannelPriority.begin() + channels);
    std::sort(sel.begin(), sel.end());
    return sel;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Unit-variance stationary Gaussian field: white noise smoothed separably, then rescaled by the kernel norm.
inline Plane<double> correlated_field(int rows, int cols, double corr_len, std::mt19937_64& rng) {
    const int radius = static_cast<int>(std::ceil(3.0 * corr_len));
    std::vector<double> k(2 * radius + 1);
    double sq = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (corr_len * corr_len));
        sq += k[i + radius] * k[i + radius];
    }
    for (double& v : k) v /= std::sqrt(sq);  // unit variance per separable pass
    const int R = rows + 2 * radius, C = cols + 2 * radius;
    std::normal_distribution<double> normal;
    Plane<double> noise(R, C);
    for (auto& v : noise.data) v = normal(rng);
    Plane<double> tmp(R, cols, 0.0);
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int i = 0; i <= 2 * radius; ++i) s += k[i] * noise(r, c + i);
            tmp(r, c) = s;
        }
    Plane<double> out(rows, cols, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double s = 0.0;
            for (int i = 0; i <= 2 * radius; ++i) s += k[i] * tmp(r + i, c);
            out(r, c) = s;
        }
    return out;
}

}  // namespace synth_detail

/// Child seed for stream `stream`, item `index` of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
    using synth_detail::splitmix64;
    return splitmix64(splitmix64(splitmix64(base) ^ (stream * 0x632be59bd9b4e019ULL)) ^ index);
}

inline std::vector<ChannelDescriptor> synth_channels(int channels) {
    auto all = seviri_channels();
    std::vector<ChannelDescriptor> out;
    for (int idx : synth_detail::selected_models(channels)) out.push_back(all[idx]);
    return out;
}

/// Index of the longwave window channel in a scene's channel list, or -1.
inline int longwave_index(const std::vector<ChannelDescriptor>& channels) {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].name == "longwave_window") return static_cast<int>(i);
    return -1;
}

inline int channel_index(const std::vector<ChannelDescriptor>& channels, const std::string& name) {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].name == name) return static_cast<int>(i);
    return -1;
}

/// The rain law evaluated on brightness temperatures (K).
inline double rain_rate(const RainLaw& law, double tb_longwave, double tb_water_vapour) {
    const double b = tb_longwave + law.coupling * (tb_water_vapour - 235.0);
    const double deficit = law.critical_temperature - b;
    return deficit > 0.0 ? law.scale * std::pow(deficit, law.shape) : 0.0;
}

inline SyntheticPair generate_pair(const SynthConfig& cfg) {
    using namespace synth_detail;
    cfg.validate();
    const int H = cfg.grid.rows, W = cfg.grid.cols;
    std::mt19937_64 rng(derive_seed(cfg.seed, 1, 0));
    std::array<Plane<double>, 4> z;
    for (auto& f : z) f = correlated_field(H, W, cfg.correlation_length, rng);

    // Every channel is simulated so the rain law sees the same values whatever subset is observed.
    const auto& models = channel_models();
    std::vector<Plane<double>> tb(models.size());
    std::normal_distribution<double> normal;
    for (std::size_t k = 0; k < models.size(); ++k) {
        tb[k] = Plane<double>(H, W);
        for (std::size_t i = 0; i < tb[k].size(); ++i) {
            double v = models[k].offset;
            for (int j = 0; j < 4; ++j) v += models[k].loading[j] * z[j].data[i];
            tb[k].data[i] = static_cast<float>(v + models[k].noise * normal(rng));
        }
    }

    SyntheticPair out;
    out.scene.t_start = cfg.t_start;
    out.scene.t_end = cfg.t_start + std::chrono::seconds(cfg.scan_seconds);
    out.scene.grid = cfg.grid;
    out.scene.channels = synth_channels(cfg.channels);
    auto sel = selected_models(cfg.channels);
    out.scene.data = Volume<float>(cfg.channels, H, W);
    for (std::size_t c = 0; c < sel.size(); ++c) {
        auto dst = out.scene.data.plane(static_cast<int>(c));
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<float>(tb[sel[c]].data[i]);
    }

    out.dense_truth = Plane<float>(H, W);
    for (std::size_t i = 0; i < out.dense_truth.size(); ++i)
        out.dense_truth.data[i] = static_cast<float>(
            rain_rate(cfg.rain_law, static_cast<float>(tb[kLongwaveModel].data[i]), static_cast<float>(tb[kWaterVapourModel].data[i])));

    // Straight strip through a random point of the window, one sample per cell centre.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double theta = std::numbers::pi * unit(rng);
    const double pr = unit(rng) * H, pc = unit(rng) * W;
    const double half = 0.5 * cfg.swath_width;
    for (int r = 0; r < H; ++r)
        for (int c = 0; c < W; ++c) {
            const double dist = std::abs((r + 0.5 - pr) * std::cos(theta) - (c + 0.5 - pc) * std::sin(theta));
            const auto offset = static_cast<std::int64_t>(unit(rng) * static_cast<double>(cfg.scan_seconds));
            if (dist > half) continue;
            out.swath.samples.push_back(SwathSample{cfg.grid.center_lat(r), cfg.grid.center_lon(c),
                                                    cfg.t_start + std::chrono::seconds(offset),
                                                    static_cast<double>(out.dense_truth(r, c))});
        }
    return out;
}

/// Dense pretraining target: the noise-free truth with multiplicative lognormal noise and false-rain
/// speckle, valid everywhere. The random draws per cell do not depend on noise_level.
inline GriddedPair generate_dense_noisy(const SynthConfig& cfg) {
    auto pair = generate_pair(cfg);
    std::mt19937_64 rng(derive_seed(cfg.seed, 2, 0));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double sigma = cfg.noise_level;
    const double speckle_probability = 0.1 * sigma;
    GriddedPair out{std::move(pair.scene.data), Plane<float>(cfg.grid.rows, cfg.grid.cols),
                    Plane<std::uint8_t>(cfg.grid.rows, cfg.grid.cols, 1)};
    for (std::size_t i = 0; i < out.y.size(); ++i) {
        const double n = normal(rng), u = unit(rng), s = normal(rng);
        double y = pair.dense_truth.data[i];
        if (sigma > 0.0) y *= std::exp(sigma * n - 0.5 * sigma * sigma);
        if (u < speckle_probability && pair.dense_truth.data[i] < kRainThreshold) y = 0.5 * std::exp(0.5 * s);
        out.y.data[i] = static_cast<float>(y);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset builders

enum class SynthTarget {
    swath,        // collocated swath samples, sparse mask
    dense,        // noise-free truth, all valid
    dense_noisy,  // corrupted truth, all valid
};

struct SynthDatasetSpec {
    int count = 0;
    SynthTarget target = SynthTarget::swath;
    int patch = 64;
    std::uint64_t stream = 0;                 // keeps train/validation/pretrain scenes disjoint
    std::int64_t spacing_seconds = 86400 * 3;  // time between consecutive scenes
};

inline SynthConfig pair_config(const SynthConfig& base, const SynthDatasetSpec& spec, std::size_t i) {
    SynthConfig c = base;
    c.seed = derive_seed(base.seed, 100 + spec.stream, i);
    c.t_start = base.t_start + std::chrono::seconds(spec.spacing_seconds * static_cast<std::int64_t>(i));
    return c;
}

/// count scenes tiled into patches; swath scenes keep only tiles the swath touches.
inline std::vector<PatchRecord> synth_records(const SynthConfig& base, const SynthDatasetSpec& spec) {
    std::vector<std::vector<PatchRecord>> per(static_cast<std::size_t>(spec.count));
    parallel_for(per.size(), [&](std::size_t i) {
        auto cfg = pair_config(base, spec, i);
        GriddedPair gp;
        Timestamp t0 = cfg.t_start, t1 = cfg.t_start + std::chrono::seconds(cfg.scan_seconds);
        if (spec.target == SynthTarget::swath) {
            auto sp = generate_pair(cfg);
            gp = collocate(sp.scene, sp.swath);
        } else if (spec.target == SynthTarget::dense) {
            auto sp = generate_pair(cfg);
            gp = GriddedPair{std::move(sp.scene.data), std::move(sp.dense_truth),
                             Plane<std::uint8_t>(cfg.grid.rows, cfg.grid.cols, 1)};
        } else {
            gp = generate_dense_noisy(cfg);
        }
        per[i] = tile_patches(gp, spec.patch, t0, t1);
    });
    std::vector<PatchRecord> out;
    for (auto& v : per)
        for (auto& r : v) out.push_back(std::move(r));
    return out;
}

}  // namespace oya
