#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "oya/synthgen.hpp"
#include "oya/train.hpp"

namespace oya {

/// The fixed synthetic task: swath-sparse training patches, dense validation patches.
struct BenchmarkSetup {
    SynthConfig synth;  // seed 7, 8 channels, 64x64 scenes
    int train_pairs = 400;
    int validation_pairs = 50;
    TrainConfig train;
    int depth = 2;
    int base_width = 8;
    double csi_target = 0.80;

    TrainOptions options() const {
        TrainOptions o;
        o.depth = depth;
        o.base_width = base_width;
        return o;
    }
};

struct BenchmarkData {
    std::vector<PatchRecord> train;
    std::vector<PatchRecord> validation;
};

inline BenchmarkData make_benchmark_data(const BenchmarkSetup& s) {
    const int patch = s.synth.grid.rows;
    return {synth_records(s.synth, {s.train_pairs, SynthTarget::swath, patch, 0}),
            synth_records(s.synth, {s.validation_pairs, SynthTarget::dense, patch, 1})};
}

template <class T>
std::optional<double> validation_csi(const TwoStageModel<T>& model, std::span<const PatchRecord> validation,
                                     double threshold = kRainThreshold) {
    return metrics(evaluate_records(model, validation, {threshold}).counts[0]).csi;
}

/// CSI of predicting rain everywhere: hits / (hits + false alarms) = the rain fraction of valid cells.
inline double always_rain_csi(std::span<const PatchRecord> validation, double threshold = kRainThreshold) {
    double rain = 0, valid = 0;
    for (const auto& r : validation)
        for (std::size_t i = 0; i < r.y.size(); ++i)
            if (r.m.data[i]) {
                ++valid;
                rain += r.y.data[i] >= threshold;
            }
    return valid ? rain / valid : 0.0;
}

struct TargetSearch {
    std::optional<long> steps;  // first evaluated step with CSI >= target
    std::vector<std::pair<long, double>> curve;
    Checkpoint checkpoint;
};

/// Trains for at most cfg.steps, checking validation CSI every `interval` steps (and at step 0).
inline TargetSearch steps_to_target(const TrainConfig& cfg, TrainOptions opts, std::span<const PatchRecord> train_data,
                                    std::span<const PatchRecord> validation, double target, long interval,
                                    const std::optional<Checkpoint>& init = std::nullopt) {
    TargetSearch out;
    opts.eval_interval = interval;
    auto res = train(cfg, opts, train_data, init, [&](long step, const TwoStageModel<float>& m) {
        const double csi = validation_csi(m, validation).value_or(0.0);
        out.curve.emplace_back(step, csi);
        if (csi >= target) {
            out.steps = step;
            return false;
        }
        return true;
    });
    out.checkpoint = std::move(res.checkpoint);
    return out;
}

struct TransferSetup {
    BenchmarkSetup bench;
    int pretrain_pairs = 400;
    long pretrain_steps = 2000;
    double noise_level = 0.3;
    long eval_interval = 10;
    std::vector<std::uint64_t> seeds{7, 8, 9};
};

struct TransferRun {
    std::uint64_t seed = 0;
    std::optional<long> scratch_steps;
    std::optional<long> finetune_steps;

    /// finetune steps over scratch steps; a scratch run that never reaches the target counts as its cap.
    std::optional<double> ratio(long cap) const {
        if (!finetune_steps) return std::nullopt;
        const double s = static_cast<double>(scratch_steps.value_or(cap));
        return s > 0 ? *finetune_steps / s : (*finetune_steps == 0 ? 0.0 : 1e9);
    }
};

using ProgressFn = std::function<void(const std::string&)>;

/// Scratch vs pretrain-then-finetune, measured in steps to the benchmark CSI target.
inline std::vector<TransferRun> run_transfer_study(const TransferSetup& s, const BenchmarkData& data,
                                                   const ProgressFn& progress = {}) {
    SynthConfig pre_cfg = s.bench.synth;
    pre_cfg.noise_level = s.noise_level;
    const auto pretrain_data = synth_records(pre_cfg, {s.pretrain_pairs, SynthTarget::dense_noisy, pre_cfg.grid.rows, 2});
    std::vector<TransferRun> runs;
    for (auto seed : s.seeds) {
        TransferRun run{seed, std::nullopt, std::nullopt};
        TrainConfig cfg = s.bench.train;
        cfg.seed = seed;
        cfg.stage = Stage::scratch;
        run.scratch_steps = steps_to_target(cfg, s.bench.options(), data.train, data.validation, s.bench.csi_target,
                                            s.eval_interval).steps;
        TrainConfig pre = cfg;
        pre.stage = Stage::pretrain;
        pre.steps = s.pretrain_steps;
        auto pretrained = train(pre, s.bench.options(), pretrain_data).checkpoint;
        TrainConfig fine = cfg;
        fine.stage = Stage::finetune;
        run.finetune_steps = steps_to_target(fine, s.bench.options(), data.train, data.validation, s.bench.csi_target,
                                             s.eval_interval, pretrained).steps;
        if (progress)
            progress("seed " + std::to_string(seed) + ": scratch " +
                     (run.scratch_steps ? std::to_string(*run.scratch_steps) : "not reached") + ", finetune " +
                     (run.finetune_steps ? std::to_string(*run.finetune_steps) : "not reached"));
        runs.push_back(run);
    }
    return runs;
}

inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of nothing");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace oya
