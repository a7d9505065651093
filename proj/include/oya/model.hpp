#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "oya/dataset.hpp"
#include "oya/grid.hpp"
#include "oya/unet.hpp"

namespace oya {

/// Logit channel layout of the detector head.
inline constexpr int kNoRainLogit = 0;
inline constexpr int kRainLogit = 1;

/// Softmax probability of the rain class, evaluated without overflow.
template <class T>
Plane<T> classifier_prob(const Volume<T>& logits) {
    if (logits.channels != 2) throw std::invalid_argument("classifier_prob: expected two logit channels");
    Plane<T> p(logits.rows, logits.cols);
    auto no = logits.plane(kNoRainLogit);
    auto yes = logits.plane(kRainLogit);
    for (std::size_t i = 0; i < p.size(); ++i) {
        T hi = std::max(no[i], yes[i]);
        T e_yes = std::exp(yes[i] - hi), e_no = std::exp(no[i] - hi);
        p.data[i] = e_yes / (e_yes + e_no);
    }
    return p;
}

enum class CombineMode {
    hard,  // detection mask times rate
    soft,  // probability times rate
};

/// Two-stage estimate: rate where the detector fires, zero elsewhere.
template <class T>
Plane<T> combine(const Plane<T>& rain_prob, const Plane<T>& log_rate, double decision_threshold = 0.5,
                 CombineMode mode = CombineMode::hard) {
    if (!rain_prob.same_shape(log_rate)) throw std::invalid_argument("combine: shape mismatch");
    if (!(decision_threshold > 0.0 && decision_threshold < 1.0))
        throw std::invalid_argument("combine: decision threshold must lie in (0, 1)");
    Plane<T> out(rain_prob.rows, rain_prob.cols);
    for (std::size_t i = 0; i < out.size(); ++i) {
        T f1 = mode == CombineMode::hard ? (rain_prob.data[i] >= decision_threshold ? T{1} : T{0}) : rain_prob.data[i];
        out.data[i] = f1 == T{0} ? T{0} : f1 * static_cast<T>(inv_log_transform(log_rate.data[i]));
    }
    return out;
}

template <class T>
struct TwoStageOutput {
    Plane<T> rain_prob;
    Plane<T> log_rate;
    Plane<T> estimate;
};

/// Per-channel standardization fitted on the training split.
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;

    static ChannelStats fit(std::span<const PatchRecord> records) {
        if (records.empty()) throw std::invalid_argument("ChannelStats::fit: no records");
        const int C = records.front().x.channels;
        std::vector<double> sum(C, 0.0), sq(C, 0.0);
        double n = 0.0;
        for (const auto& r : records) {
            if (r.x.channels != C) throw std::invalid_argument("ChannelStats::fit: channel count varies");
            for (int c = 0; c < C; ++c)
                for (float v : r.x.plane(c)) {
                    sum[c] += v;
                    sq[c] += static_cast<double>(v) * v;
                }
            n += static_cast<double>(r.x.plane_size());
        }
        ChannelStats s;
        for (int c = 0; c < C; ++c) {
            double m = sum[c] / n;
            double var = std::max(sq[c] / n - m * m, 0.0);
            s.mean.push_back(m);
            s.stddev.push_back(var > 1e-24 ? std::sqrt(var) : 1.0);
        }
        return s;
    }

    friend bool operator==(const ChannelStats&, const ChannelStats&) = default;
};

/// Detector and regressor sharing one input pipeline (channel selection then standardization).
template <class T>
struct TwoStageModel {
    UNet<T> classifier;
    UNet<T> regressor;
    ChannelStats stats;              // indexed by the scene's channel order
    std::vector<int> input_channels;  // which scene channels feed the networks
    double decision_threshold = 0.5;
    CombineMode combine_mode = CombineMode::hard;

    static TwoStageModel create(int scene_channels, std::vector<int> input_channels, int depth, int base_width,
                                std::uint64_t seed) {
        if (input_channels.empty())
            for (int c = 0; c < scene_channels; ++c) input_channels.push_back(c);
        for (int c : input_channels)
            if (c < 0 || c >= scene_channels) throw std::invalid_argument("TwoStageModel: input channel out of range");
        const int in = static_cast<int>(input_channels.size());
        TwoStageModel m{UNet<T>(UNetConfig{in, depth, base_width, 2}), UNet<T>(UNetConfig{in, depth, base_width, 1}),
                        ChannelStats{std::vector<double>(scene_channels, 0.0), std::vector<double>(scene_channels, 1.0)},
                        std::move(input_channels)};
        m.classifier.init(seed * 2 + 1);
        m.regressor.init(seed * 2 + 2);
        return m;
    }

    int scene_channels() const { return static_cast<int>(stats.mean.size()); }

    Volume<T> prepare(const Volume<float>& x) const {
        if (x.channels != scene_channels())
            throw std::invalid_argument("TwoStageModel: scene has " + std::to_string(x.channels) + " channels, model expects " +
                                        std::to_string(scene_channels()));
        Volume<T> out(static_cast<int>(input_channels.size()), x.rows, x.cols);
        for (std::size_t i = 0; i < input_channels.size(); ++i) {
            int c = input_channels[i];
            auto src = x.plane(c);
            auto dst = out.plane(static_cast<int>(i));
            const double mu = stats.mean[c], inv = 1.0 / stats.stddev[c];
            for (std::size_t j = 0; j < src.size(); ++j) dst[j] = static_cast<T>((src[j] - mu) * inv);
        }
        return out;
    }

    TwoStageOutput<T> predict(const Volume<float>& x) const {
        auto in = prepare(x);
        auto prob = classifier_prob(classifier.forward(in));
        auto lr = regressor.forward(in).plane_copy(0);
        auto est = combine(prob, lr, decision_threshold, combine_mode);
        return {std::move(prob), std::move(lr), std::move(est)};
    }
};

}  // namespace oya
