#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "oya/eval.hpp"
#include "oya/synthgen.hpp"
#include "oya/train.hpp"

namespace oya {

enum class AblationAxis { channels, augmentation, pretraining, patch_size, lds };

inline constexpr std::array<AblationAxis, 5> kAblationAxes{AblationAxis::channels, AblationAxis::augmentation,
                                                           AblationAxis::pretraining, AblationAxis::patch_size,
                                                           AblationAxis::lds};

inline std::string to_string(AblationAxis a) {
    switch (a) {
        case AblationAxis::channels: return "channels";
        case AblationAxis::augmentation: return "augmentation";
        case AblationAxis::pretraining: return "pretraining";
        case AblationAxis::patch_size: return "patch_size";
        case AblationAxis::lds: return "lds";
    }
    return "channels";
}

inline AblationAxis parse_ablation_axis(const std::string& s) {
    for (auto a : kAblationAxes)
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown ablation axis: " + s);
}

/// One trained model of the study. Variants that only differ in name share a training run.
struct AblationVariant {
    std::string name;
    bool longwave_only = false;
    bool augment = true;
    bool pretrain = false;
    int patch = 64;
    bool lds = true;
    bool center_crop_eval = false;

    auto training_key() const { return std::tuple{longwave_only, augment, pretrain, patch, lds}; }
};

struct AblationSpec {
    AblationAxis axis;
    std::vector<AblationVariant> variants;
};

/// Rows of one axis; the reference model is all channels, augmentation on, no pretraining, patch 64, LDS on.
inline AblationSpec ablation_spec(AblationAxis axis) {
    const AblationVariant ref{};
    AblationSpec spec{axis, {}};
    auto with = [&](std::string name, auto&& edit) {
        AblationVariant v = ref;
        v.name = std::move(name);
        edit(v);
        spec.variants.push_back(v);
    };
    switch (axis) {
        case AblationAxis::channels:
            with("longwave-only", [](auto& v) { v.longwave_only = true; });
            with("all", [](auto&) {});
            break;
        case AblationAxis::augmentation:
            with("off", [](auto& v) { v.augment = false; });
            with("on", [](auto&) {});
            break;
        case AblationAxis::pretraining:
            with("off", [](auto&) {});
            with("on", [](auto& v) { v.pretrain = true; });
            break;
        case AblationAxis::patch_size:
            for (int p : {32, 64, 128})
                with(std::to_string(p), [p](auto& v) {
                    v.patch = p;
                    v.center_crop_eval = true;
                });
            break;
        case AblationAxis::lds:
            with("off", [](auto& v) { v.lds = false; });
            with("on", [](auto&) {});
            break;
    }
    return spec;
}

struct AblationSetup {
    SynthConfig synth = [] {
        SynthConfig c;
        c.grid = GridSpec::global().window(1000, 4400, 128, 128);
        return c;
    }();
    int train_scenes = 400;
    int validation_scenes = 50;
    int pretrain_scenes = 400;
    TrainConfig train = [] {
        TrainConfig t;
        t.steps = 2000;
        return t;
    }();
    long pretrain_steps = 2000;
    int depth = 2;
    int base_width = 8;
    int reference_patch = 64;  // batch_size is quoted at this patch; other patches keep cells per batch fixed
    int eval_crop = 32;

    void validate() const {
        synth.validate();
        train.validate();
        if (train_scenes < 1 || validation_scenes < 1 || pretrain_scenes < 1)
            throw std::invalid_argument("ablation: scene counts must be positive");
        if (synth.grid.rows < 128 || synth.grid.cols < 128)
            throw std::invalid_argument("ablation: scenes must be at least 128x128 for the patch-size axis");
    }
};

struct AblationRow {
    std::string axis;
    std::string variant;
    ContingencyTable table;

    std::optional<double> csi(std::size_t k) const { return metrics(table.counts.at(k)).csi; }
};

/// Central rows x cols window of a record.
inline PatchRecord center_window(const PatchRecord& r, int rows, int cols) {
    const int r0 = (r.rows() - rows) / 2, c0 = (r.cols() - cols) / 2;
    PatchRecord out{crop(r.x, r0, c0, rows, cols), crop(r.y, r0, c0, rows, cols), crop(r.m, r0, c0, rows, cols),
                    r.origin_row + r0, r.origin_col + c0, r.t_start, r.t_end};
    return out;
}

using AblationProgress = std::function<void(const std::string& message)>;

/// Trains and evaluates every variant of the requested axes. Validation scenes are dense; each variant
/// sees the central window of its patch size (the reference patch unless the axis is patch_size), and
/// patch_size variants are scored on the central eval_crop x eval_crop cells only.
inline std::vector<AblationRow> run_ablation(const AblationSetup& setup, const std::vector<AblationAxis>& axes,
                                             const AblationProgress& progress = {}) {
    setup.validate();
    auto say = [&](const std::string& s) {
        if (progress) progress(s);
    };

    const auto scene_channels = synth_channels(setup.synth.channels);
    const int longwave = longwave_index(scene_channels);

    const auto validation = synth_records(setup.synth, {setup.validation_scenes, SynthTarget::dense, setup.synth.grid.rows, 1});
    std::map<int, std::vector<PatchRecord>> train_by_patch, pretrain_by_patch;
    auto train_data = [&](int patch) -> const std::vector<PatchRecord>& {
        auto it = train_by_patch.find(patch);
        if (it == train_by_patch.end())
            it = train_by_patch.emplace(patch, synth_records(setup.synth, {setup.train_scenes, SynthTarget::swath, patch, 0})).first;
        return it->second;
    };
    auto pretrain_data = [&](int patch) -> const std::vector<PatchRecord>& {
        auto it = pretrain_by_patch.find(patch);
        if (it == pretrain_by_patch.end())
            it = pretrain_by_patch.emplace(patch, synth_records(setup.synth, {setup.pretrain_scenes, SynthTarget::dense_noisy, patch, 2})).first;
        return it->second;
    };

    std::map<decltype(AblationVariant{}.training_key()), TwoStageModel<float>> trained;
    std::vector<AblationRow> rows;
    for (auto axis : axes) {
        for (const auto& v : ablation_spec(axis).variants) {
            auto key = v.training_key();
            if (!trained.count(key)) {
                TrainConfig cfg = setup.train;
                const double scale = static_cast<double>(setup.reference_patch) / v.patch;
                cfg.batch_size = std::max(1, static_cast<int>(std::lround(setup.train.batch_size * scale * scale)));
                TrainOptions opts;
                opts.depth = setup.depth;
                opts.base_width = setup.base_width;
                opts.augment = v.augment;
                opts.use_lds = v.lds;
                if (v.longwave_only) opts.input_channels = {longwave};
                std::optional<Checkpoint> init;
                if (v.pretrain) {
                    say("pretraining patch " + std::to_string(v.patch));
                    TrainConfig pre = cfg;
                    pre.stage = Stage::pretrain;
                    pre.steps = setup.pretrain_steps;
                    init = train(pre, opts, pretrain_data(v.patch)).checkpoint;
                    cfg.stage = Stage::finetune;
                }
                say("training " + to_string(axis) + "/" + v.name);
                trained.emplace(key, train(cfg, opts, train_data(v.patch), init).checkpoint.model);
            }
            std::vector<PatchRecord> val;
            for (const auto& r : validation) val.push_back(center_window(r, v.patch, v.patch));
            AblationRow row{to_string(axis), v.name,
                            evaluate_records(trained.at(key), std::span<const PatchRecord>(val), standard_thresholds(),
                                             v.center_crop_eval ? setup.eval_crop : 0)};
            say("evaluated " + row.axis + "/" + row.variant);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
    std::ostringstream out;
    out << "axis,variant,light,medium,heavy,extreme\n";
    for (const auto& r : rows) {
        out << r.axis << "," << r.variant;
        for (std::size_t k = 0; k < 4; ++k) out << "," << format_metric(r.csi(k));
        out << "\n";
    }
    return out.str();
}

}  // namespace oya
