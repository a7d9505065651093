#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/grid.hpp"
#include "oya/kv_text.hpp"

namespace oya {

/// Cells at or above this rate count as precipitating for the detector and the regressor.
inline constexpr double kRainThreshold = 0.2;

struct IntensityThresholds {
    double light = 0.2;
    double medium = 1.0;
    double heavy = 2.4;
    double extreme = 7.0;

    void validate() const {
        if (!(0.0 < light && light < medium && medium < heavy && heavy < extreme))
            throw std::invalid_argument("intensity thresholds must satisfy 0 < light < medium < heavy < extreme");
    }
    std::vector<double> as_vector() const { return {light, medium, heavy, extreme}; }

    static IntensityThresholds from_vector(const std::vector<double>& v) {
        if (v.size() != 4) throw std::invalid_argument("expected four intensity thresholds");
        IntensityThresholds t{v[0], v[1], v[2], v[3]};
        t.validate();
        return t;
    }
};

enum class PrecipClass : int { none = 0, light = 1, medium = 2, heavy = 3, extreme = 4 };

inline constexpr std::array<const char*, 5> kPrecipClassNames{"none", "light", "medium", "heavy", "extreme"};

inline PrecipClass classify_intensity(double rate, const IntensityThresholds& t = {}) {
    if (!(rate >= 0.0)) throw std::invalid_argument("classify_intensity: negative or NaN rate");
    if (rate < t.light) return PrecipClass::none;
    if (rate < t.medium) return PrecipClass::light;
    if (rate < t.heavy) return PrecipClass::medium;
    if (rate < t.extreme) return PrecipClass::heavy;
    return PrecipClass::extreme;
}

using ClassHistogram = std::array<std::size_t, 5>;

/// Counts valid (m = 1) cells per intensity class.
inline ClassHistogram class_histogram(std::span<const PatchRecord> records, const IntensityThresholds& t = {}) {
    if (records.empty()) throw std::invalid_argument("class_histogram: no records");
    ClassHistogram h{};
    for (const auto& r : records)
        for (std::size_t i = 0; i < r.y.size(); ++i)
            if (r.m.data[i]) ++h[static_cast<int>(classify_intensity(r.y.data[i], t))];
    return h;
}

inline std::string histogram_table(const ClassHistogram& h) {
    std::size_t total = 0;
    for (auto c : h) total += c;
    std::ostringstream out;
    out << "class,count,fraction\n";
    for (std::size_t i = 0; i < h.size(); ++i)
        out << kPrecipClassNames[i] << "," << h[i] << ","
            << format_double(total ? static_cast<double>(h[i]) / static_cast<double>(total) : 0.0) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Splits

struct DatasetSplit {
    std::vector<PatchRecord> train;
    std::vector<PatchRecord> validation;
};

/// Assigns records by the UTC year of t_start; records in neither year set are dropped.
inline DatasetSplit split_by_period(std::span<const PatchRecord> records, const std::set<int>& train_years,
                                    const std::set<int>& validation_years) {
    for (int y : train_years)
        if (validation_years.count(y)) throw std::invalid_argument("split_by_period: year " + std::to_string(y) + " in both sets");
    DatasetSplit out;
    for (const auto& r : records) {
        int year = year_of(r.t_start);
        if (train_years.count(year))
            out.train.push_back(r);
        else if (validation_years.count(year))
            out.validation.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Geometric augmentation

enum class AugmentOp { identity, hflip, vflip, rot90, rot180, rot270 };

inline constexpr std::array<AugmentOp, 6> kAugmentOps{AugmentOp::identity, AugmentOp::hflip,  AugmentOp::vflip,
                                                      AugmentOp::rot90,    AugmentOp::rot180, AugmentOp::rot270};

inline AugmentOp inverse(AugmentOp op) {
    switch (op) {
        case AugmentOp::rot90: return AugmentOp::rot270;
        case AugmentOp::rot270: return AugmentOp::rot90;
        default: return op;
    }
}

namespace detail {

/// Source cell for output cell (r, c) of an (rows x cols) input under op. rot90 is counter-clockwise.
inline CellIndex augment_source(AugmentOp op, int r, int c, int rows, int cols) {
    switch (op) {
        case AugmentOp::identity: return {r, c};
        case AugmentOp::hflip: return {r, cols - 1 - c};
        case AugmentOp::vflip: return {rows - 1 - r, c};
        case AugmentOp::rot90: return {c, cols - 1 - r};
        case AugmentOp::rot180: return {rows - 1 - r, cols - 1 - c};
        case AugmentOp::rot270: return {rows - 1 - c, r};
    }
    return {r, c};
}

template <class T>
Plane<T> remap(const Plane<T>& in, AugmentOp op) {
    Plane<T> out(in.rows, in.cols);
    for (int r = 0; r < in.rows; ++r)
        for (int c = 0; c < in.cols; ++c) {
            auto s = augment_source(op, r, c, in.rows, in.cols);
            out(r, c) = in(s.row, s.col);
        }
    return out;
}

}  // namespace detail

/// Applies the same isometry to x, y and m; the channel axis is untouched.
inline PatchRecord augment(const PatchRecord& rec, AugmentOp op) {
    bool quarter_turn = op == AugmentOp::rot90 || op == AugmentOp::rot270;
    if (quarter_turn && rec.y.rows != rec.y.cols) throw std::invalid_argument("augment: quarter-turn needs a square patch");
    if (op == AugmentOp::identity) return rec;
    PatchRecord out = rec;
    out.y = detail::remap(rec.y, op);
    out.m = detail::remap(rec.m, op);
    const int rows = rec.x.rows, cols = rec.x.cols;
    for (int ch = 0; ch < rec.x.channels; ++ch)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                auto s = detail::augment_source(op, r, c, rows, cols);
                out.x(ch, r, c) = rec.x(ch, s.row, s.col);
            }
    return out;
}

template <class Rng>
AugmentOp sample_augment(Rng& rng) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(kAugmentOps.size()) - 1);
    return kAugmentOps[pick(rng)];
}

// ---------------------------------------------------------------------------
// Log target

inline double log_transform(double rate) {
    if (!(rate >= kRainThreshold)) throw std::invalid_argument("log_transform: rate below the rain threshold");
    return std::log(rate);
}

inline double inv_log_transform(double log_rate) { return std::exp(log_rate); }

// ---------------------------------------------------------------------------
// Label distribution smoothing

enum class LdsKernel { gaussian, triangular };

struct LDSConfig {
    double bin_width = 0.1;
    LdsKernel kernel = LdsKernel::gaussian;
    double bandwidth = 2.0;  // in bins
    double clip_weight_max = 100.0;

    void validate() const {
        if (!(bin_width > 0.0)) throw std::invalid_argument("LDS bin_width must be positive");
        if (!(bandwidth > 0.0)) throw std::invalid_argument("LDS bandwidth must be positive");
        if (!(clip_weight_max > 0.0)) throw std::invalid_argument("LDS clip_weight_max must be positive");
    }
};

/// Discrete smoothing kernel indexed from -radius..radius, normalized to sum 1.
inline std::vector<double> lds_kernel(const LDSConfig& cfg) {
    cfg.validate();
    std::vector<double> k;
    if (cfg.kernel == LdsKernel::gaussian) {
        int radius = static_cast<int>(std::ceil(3.0 * cfg.bandwidth));
        for (int i = -radius; i <= radius; ++i) k.push_back(std::exp(-0.5 * i * i / (cfg.bandwidth * cfg.bandwidth)));
    } else {
        int radius = static_cast<int>(std::floor(cfg.bandwidth));
        for (int i = -radius; i <= radius; ++i) k.push_back(1.0 - std::abs(i) / (cfg.bandwidth + 1.0));
    }
    double sum = 0.0;
    for (double v : k) sum += v;
    for (double& v : k) v /= sum;
    return k;
}

/// Inverse smoothed label density, fitted on a training population of log-rates.
class LdsTable {
public:
    LdsTable() = default;

    LdsTable(std::span<const double> log_rates, const LDSConfig& cfg) : cfg_(cfg) {
        if (log_rates.empty()) throw std::invalid_argument("lds: no samples");
        auto kernel = lds_kernel(cfg);
        radius_ = static_cast<int>(kernel.size() / 2);
        long lo = 0, hi = 0;
        bool first = true;
        for (double z : log_rates) {
            if (!std::isfinite(z)) throw std::invalid_argument("lds: non-finite sample");
            long b = bin(z);
            lo = first ? b : std::min(lo, b);
            hi = first ? b : std::max(hi, b);
            first = false;
        }
        first_bin_ = lo - radius_;
        std::size_t nbins = static_cast<std::size_t>(hi - lo + 1 + 2 * radius_);
        std::vector<double> counts(nbins, 0.0);
        for (double z : log_rates) counts[static_cast<std::size_t>(bin(z) - first_bin_)] += 1.0;

        const double n = static_cast<double>(log_rates.size());
        weight_.assign(nbins, 0.0);
        for (std::size_t j = 0; j < nbins; ++j) {
            double density = 0.0;
            for (int i = -radius_; i <= radius_; ++i) {
                long src = static_cast<long>(j) - i;
                if (src >= 0 && src < static_cast<long>(nbins)) density += kernel[i + radius_] * counts[src];
            }
            density /= n;
            weight_[j] = density > 0.0 ? std::min(1.0 / density, cfg.clip_weight_max) : cfg.clip_weight_max;
        }
        double mean = 0.0;
        for (double z : log_rates) mean += raw(z);
        mean /= n;
        scale_ = 1.0 / mean;
    }

    /// Weight of a sample with this log-rate, on the population's mean-1 scale.
    double operator()(double z) const { return raw(z) * scale_; }

    const LDSConfig& config() const { return cfg_; }

private:
    long bin(double z) const { return static_cast<long>(std::floor(z / cfg_.bin_width)); }

    double raw(double z) const {
        long j = bin(z) - first_bin_;
        if (j < 0 || j >= static_cast<long>(weight_.size())) return cfg_.clip_weight_max;
        return weight_[static_cast<std::size_t>(j)];
    }

    LDSConfig cfg_;
    int radius_ = 0;
    long first_bin_ = 0;
    std::vector<double> weight_;
    double scale_ = 1.0;
};

inline std::vector<double> lds_weights(std::span<const double> valid_log_rates, const LDSConfig& cfg = {}) {
    LdsTable table(valid_log_rates, cfg);
    std::vector<double> w;
    w.reserve(valid_log_rates.size());
    for (double z : valid_log_rates) w.push_back(table(z));
    return w;
}

/// Log-rates of every valid precipitating cell, in record then raster order.
inline std::vector<double> rain_log_rates(std::span<const PatchRecord> records) {
    std::vector<double> out;
    for (const auto& r : records)
        for (std::size_t i = 0; i < r.y.size(); ++i)
            if (r.m.data[i] && r.y.data[i] >= kRainThreshold) out.push_back(log_transform(r.y.data[i]));
    return out;
}

}  // namespace oya
