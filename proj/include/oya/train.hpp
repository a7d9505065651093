#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "oya/checkpoint.hpp"
#include "oya/dataset.hpp"
#include "oya/eval.hpp"
#include "oya/kv_text.hpp"
#include "oya/losses.hpp"
#include "oya/model.hpp"
#include "oya/optim.hpp"
#include "oya/parallel.hpp"

namespace oya {

enum class Stage { pretrain, finetune, scratch };

inline std::string to_string(Stage s) {
    switch (s) {
        case Stage::pretrain: return "pretrain";
        case Stage::finetune: return "finetune";
        case Stage::scratch: return "scratch";
    }
    return "scratch";
}

inline Stage parse_stage(const std::string& s) {
    if (s == "pretrain") return Stage::pretrain;
    if (s == "finetune") return Stage::finetune;
    if (s == "scratch") return Stage::scratch;
    throw std::invalid_argument("unknown stage: " + s);
}

inline SourceStage result_tag(Stage s) {
    switch (s) {
        case Stage::pretrain: return SourceStage::pretrained;
        case Stage::finetune: return SourceStage::finetuned;
        case Stage::scratch: return SourceStage::scratch;
    }
    return SourceStage::scratch;
}

struct TrainConfig {
    double learning_rate = 1e-3;
    double weight_decay = 1e-4;
    int batch_size = 8;
    long steps = 2000;
    std::uint64_t seed = 7;
    std::optional<std::array<double, 2>> class_weights;  // {no-rain, rain}; unset = inverse frequency
    double decision_threshold = 0.5;
    Stage stage = Stage::scratch;

    void validate() const {
        if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
        if (!(weight_decay >= 0)) throw std::invalid_argument("weight_decay must be non-negative");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (steps < 0) throw std::invalid_argument("steps must be >= 0");
        if (class_weights && !((*class_weights)[0] > 0 && (*class_weights)[1] > 0))
            throw std::invalid_argument("class_weights must be positive");
        if (!(decision_threshold > 0 && decision_threshold < 1))
            throw std::invalid_argument("decision_threshold must lie in (0, 1)");
    }

    /// Reads a flat key/value config. Keys: learning_rate, weight_decay, batch_size, steps, seed,
    /// class_weights ("auto" or "w_norain,w_rain"), decision_threshold, stage. Unknown keys are errors.
    static TrainConfig from_kv(const KvDocument& doc) { return from_kv(doc, TrainConfig{}); }

    static TrainConfig from_kv(const KvDocument& doc, TrainConfig cfg) {
        for (const auto& [key, value] : doc.entries()) {
            if (key == "learning_rate")
                cfg.learning_rate = std::stod(value);
            else if (key == "weight_decay")
                cfg.weight_decay = std::stod(value);
            else if (key == "batch_size")
                cfg.batch_size = std::stoi(value);
            else if (key == "steps")
                cfg.steps = std::stol(value);
            else if (key == "seed")
                cfg.seed = std::stoull(value);
            else if (key == "class_weights") {
                if (value == "auto") {
                    cfg.class_weights.reset();
                } else {
                    auto w = parse_double_list(value);
                    if (w.size() != 2) throw std::invalid_argument("class_weights needs two values");
                    cfg.class_weights = std::array<double, 2>{w[0], w[1]};
                }
            } else if (key == "decision_threshold")
                cfg.decision_threshold = std::stod(value);
            else if (key == "stage")
                cfg.stage = parse_stage(value);
            else
                throw std::invalid_argument("unknown training config key: " + key);
        }
        cfg.validate();
        return cfg;
    }

    KvDocument to_kv() const {
        KvDocument doc;
        doc.add("learning_rate", format_double(learning_rate));
        doc.add("weight_decay", format_double(weight_decay));
        doc.add("batch_size", std::to_string(batch_size));
        doc.add("steps", std::to_string(steps));
        doc.add("seed", std::to_string(seed));
        doc.add("class_weights", class_weights ? format_double((*class_weights)[0]) + "," + format_double((*class_weights)[1]) : "auto");
        doc.add("decision_threshold", format_double(decision_threshold));
        doc.add("stage", to_string(stage));
        return doc;
    }
};

/// Architecture and data-handling switches that sit beside the optimizer config.
struct TrainOptions {
    int depth = 4;
    int base_width = 32;
    std::vector<int> input_channels;  // empty = all scene channels
    bool augment = true;
    bool use_lds = true;
    LDSConfig lds;
    long eval_interval = 0;  // 0 = callback never invoked
};

struct LossReport {
    long step = 0;
    double classifier_loss = 0.0;
    double regression_loss = 0.0;
    long examples_seen = 0;
};

inline std::string loss_csv_header() { return "step,classifier_loss,regression_loss,examples_seen"; }

inline std::string loss_csv_row(const LossReport& r) {
    return std::to_string(r.step) + "," + format_double(r.classifier_loss) + "," + format_double(r.regression_loss) + "," +
           std::to_string(r.examples_seen);
}

/// Inverse class frequency over valid cells, renormalized so the two weights average 1.
inline std::array<double, 2> inverse_frequency_weights(std::span<const PatchRecord> records) {
    double rain = 0, dry = 0;
    for (const auto& r : records)
        for (std::size_t i = 0; i < r.y.size(); ++i)
            if (r.m.data[i]) (r.y.data[i] >= kRainThreshold ? rain : dry) += 1;
    if (rain == 0 || dry == 0) return {1.0, 1.0};
    const double inv_dry = (rain + dry) / dry, inv_rain = (rain + dry) / rain;
    const double mean = 0.5 * (inv_dry + inv_rain);
    return {inv_dry / mean, inv_rain / mean};
}

/// Labels and weights one example contributes to the two losses.
template <class T>
struct ExampleTargets {
    Plane<std::uint8_t> valid;  // m
    Plane<std::uint8_t> rain;   // y >= rain threshold (on valid cells)
    Plane<std::uint8_t> rain_valid;
    Plane<T> log_rate;  // ln y on rain_valid cells, 0 elsewhere
    Plane<T> weight;    // regression weight on rain_valid cells

    std::size_t valid_count() const {
        std::size_t n = 0;
        for (auto v : valid.data) n += v != 0;
        return n;
    }
    std::size_t rain_count() const {
        std::size_t n = 0;
        for (auto v : rain_valid.data) n += v != 0;
        return n;
    }
};

template <class T>
ExampleTargets<T> make_targets(const PatchRecord& r, const LdsTable* lds) {
    const int H = r.rows(), W = r.cols();
    ExampleTargets<T> t{r.m, Plane<std::uint8_t>(H, W, 0), Plane<std::uint8_t>(H, W, 0), Plane<T>(H, W, T{0}),
                        Plane<T>(H, W, T{0})};
    for (std::size_t i = 0; i < r.y.size(); ++i) {
        if (!r.m.data[i] || !(r.y.data[i] >= kRainThreshold)) continue;
        t.rain.data[i] = 1;
        t.rain_valid.data[i] = 1;
        const double z = log_transform(r.y.data[i]);
        t.log_rate.data[i] = static_cast<T>(z);
        t.weight.data[i] = static_cast<T>(lds ? (*lds)(z) : 1.0);
    }
    return t;
}

struct ExampleLoss {
    LossValue classifier;
    LossValue regression;
};

/// Forward and backward of both networks on one prepared input. Gradients are scaled by the given
/// normalizers (typically 1 / valid cells and 1 / rain cells of the batch) and accumulated.
template <class T>
ExampleLoss example_gradients(const TwoStageModel<T>& model, const Volume<T>& input, const ExampleTargets<T>& tgt,
                              std::array<double, 2> class_weights, T classifier_scale, T regression_scale,
                              nn::Gradients<T>* classifier_grads, nn::Gradients<T>* regressor_grads) {
    ExampleLoss out;
    if (classifier_grads) {
        typename UNet<T>::Trace tr;
        auto logits = model.classifier.forward(input, tr);
        Volume<T> dlogits(2, logits.rows, logits.cols, T{0});
        out.classifier = weighted_ce_loss(tgt.valid, tgt.rain, logits, class_weights, &dlogits, classifier_scale);
        if (out.classifier.count) model.classifier.backward(tr, dlogits, *classifier_grads);
    }
    if (regressor_grads && tgt.rain_count() > 0) {
        typename UNet<T>::Trace tr;
        auto pred = model.regressor.forward(input, tr);
        Plane<T> zpred = pred.plane_copy(0);
        Plane<T> dz(zpred.rows, zpred.cols, T{0});
        out.regression = weighted_l2_loss(tgt.rain_valid, tgt.log_rate, zpred, tgt.weight, &dz, regression_scale);
        Volume<T> dpred(1, zpred.rows, zpred.cols);
        dpred.data = std::move(dz.data);
        model.regressor.backward(tr, dpred, *regressor_grads);
    }
    return out;
}

/// Contingency table of the two-stage estimate against every record's valid cells.
template <class T>
ContingencyTable evaluate_records(const TwoStageModel<T>& model, std::span<const PatchRecord> records,
                                  std::vector<double> thresholds = standard_thresholds(), int crop = 0) {
    std::vector<ContingencyTable> parts(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        const auto& r = records[i];
        auto out = model.predict(r.x);
        Plane<float> est(out.estimate.rows, out.estimate.cols);
        for (std::size_t j = 0; j < est.size(); ++j) est.data[j] = static_cast<float>(out.estimate.data[j]);
        if (crop > 0) {
            const int r0 = (r.rows() - crop) / 2, c0 = (r.cols() - crop) / 2;
            parts[i] = accumulate(oya::crop(r.m, r0, c0, crop, crop), oya::crop(r.y, r0, c0, crop, crop),
                                  oya::crop(est, r0, c0, crop, crop), thresholds);
        } else {
            parts[i] = accumulate(r.m, r.y, est, thresholds);
        }
    });
    auto total = ContingencyTable::empty(std::move(thresholds));
    for (const auto& p : parts) total = merge(total, p);
    return total;
}

/// Mean cross entropy (unit class weights) plus mean squared log-rate error on rain cells.
template <class T>
double combined_validation_loss(const TwoStageModel<T>& model, std::span<const PatchRecord> records) {
    std::vector<ExampleLoss> parts(records.size());
    parallel_for(records.size(), [&](std::size_t i) {
        auto in = model.prepare(records[i].x);
        auto tgt = make_targets<T>(records[i], nullptr);
        parts[i].classifier = weighted_ce_loss(tgt.valid, tgt.rain, model.classifier.forward(in), {1.0, 1.0});
        if (tgt.rain_count())
            parts[i].regression = weighted_l2_loss(tgt.rain_valid, tgt.log_rate, model.regressor.forward(in).plane_copy(0), tgt.weight);
    });
    LossValue c, r;
    for (const auto& p : parts) {
        c.sum += p.classifier.sum;
        c.count += p.classifier.count;
        r.sum += p.regression.sum;
        r.count += p.regression.count;
    }
    return c.mean() + r.mean();
}

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossReport> log;
    long rejected_steps = 0;
    std::vector<std::string> diagnostics;
};

/// Called after step 0 and every eval_interval steps with the current model; return false to stop.
using StepCallback = std::function<bool(long step, const TwoStageModel<float>& model)>;

inline TrainResult train(const TrainConfig& cfg, const TrainOptions& opts, std::span<const PatchRecord> data,
                         const std::optional<Checkpoint>& init = std::nullopt, const StepCallback& callback = {}) {
    cfg.validate();
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    const int scene_channels = data.front().x.channels;
    for (const auto& r : data)
        if (r.x.channels != scene_channels) throw std::invalid_argument("train: records disagree on channel count");

    std::vector<int> input_channels = opts.input_channels;
    if (input_channels.empty())
        for (int c = 0; c < scene_channels; ++c) input_channels.push_back(c);

    TrainResult result;
    if (cfg.stage == Stage::finetune) {
        if (!init) throw std::invalid_argument("train: fine-tuning needs a pretrained checkpoint");
        if (init->stage == SourceStage::scratch)
            throw std::invalid_argument("train: fine-tuning needs a pretrained checkpoint, got " + to_string(init->stage));
    }
    if (init) {
        const auto& c = init->model.classifier.config();
        if (c.depth != opts.depth || c.base_width != opts.base_width || init->model.input_channels != input_channels ||
            init->model.scene_channels() != scene_channels)
            throw std::invalid_argument("train: checkpoint architecture does not match the requested configuration");
        result.checkpoint = *init;
    } else {
        result.checkpoint.model =
            TwoStageModel<float>::create(scene_channels, input_channels, opts.depth, opts.base_width, cfg.seed);
        result.checkpoint.model.stats = ChannelStats::fit(data);
        result.checkpoint.seed = cfg.seed;
    }
    result.checkpoint.stage = result_tag(cfg.stage);
    auto& model = result.checkpoint.model;
    model.decision_threshold = cfg.decision_threshold;

    if (callback && !callback(0, model)) return result;
    if (cfg.steps == 0) return result;

    for (const auto& r : data)
        if (r.x.rows % model.classifier.config().granularity() || r.x.cols % model.classifier.config().granularity())
            throw std::invalid_argument("train: patch extent not divisible by 2^depth");

    const auto class_weights = cfg.class_weights ? *cfg.class_weights : inverse_frequency_weights(data);
    std::optional<LdsTable> lds;
    if (opts.use_lds) {
        auto z = rain_log_rates(data);
        if (!z.empty()) lds.emplace(z, opts.lds);
    }

    AdamWConfig adam{cfg.learning_rate, cfg.weight_decay};
    AdamWState<float> cstate(model.classifier.params()), rstate(model.regressor.params());
    nn::Gradients<float> cgrad(model.classifier.params()), rgrad(model.regressor.params());
    std::seed_seq seq{cfg.seed, std::uint64_t{0xba7c4}};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    long seen = 0;

    for (long step = 1; step <= cfg.steps; ++step) {
        std::vector<PatchRecord> batch;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto& rec = data[pick(rng)];
            batch.push_back(opts.augment ? augment(rec, sample_augment(rng)) : rec);
        }
        std::vector<ExampleTargets<float>> targets;
        std::size_t valid = 0, rain = 0;
        for (const auto& r : batch) {
            targets.push_back(make_targets<float>(r, lds ? &*lds : nullptr));
            valid += targets.back().valid_count();
            rain += targets.back().rain_count();
        }
        cgrad.zero();
        rgrad.zero();
        LossValue closs, rloss;
        const float cscale = valid ? 1.0f / static_cast<float>(valid) : 0.0f;
        const float rscale = rain ? 1.0f / static_cast<float>(rain) : 0.0f;
        for (std::size_t b = 0; b < batch.size(); ++b) {
            auto in = model.prepare(batch[b].x);
            auto l = example_gradients(model, in, targets[b], class_weights, cscale, rscale, &cgrad, &rgrad);
            closs.sum += l.classifier.sum;
            closs.count += l.classifier.count;
            rloss.sum += l.regression.sum;
            rloss.count += l.regression.count;
        }
        seen += cfg.batch_size;
        for (auto [params, grads, state, tag] :
             {std::tuple{&model.classifier.params(), &cgrad, &cstate, "classifier"},
              std::tuple{&model.regressor.params(), &rgrad, &rstate, "regressor"}}) {
            auto outcome = optimizer_step(*params, *grads, *state, adam);
            if (!outcome.applied) {
                ++result.rejected_steps;
                result.diagnostics.push_back("step " + std::to_string(step) + " " + tag + ": " + outcome.diagnostic);
            }
        }
        result.log.push_back({step, closs.mean(), rloss.mean(), seen});
        ++result.checkpoint.steps_trained;
        if (callback && opts.eval_interval > 0 && step % opts.eval_interval == 0 && !callback(step, model)) break;
    }
    return result;
}

}  // namespace oya
