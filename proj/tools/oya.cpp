// oya: command-line front end. Every subcommand writes into --out and is deterministic given its
// inputs and --seed.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "oya/ablation.hpp"
#include "oya/benchmark.hpp"
#include "oya/case_report.hpp"
#include "oya/checkpoint.hpp"
#include "oya/mosaic.hpp"
#include "oya/patch_store.hpp"
#include "oya/raw_io.hpp"
#include "oya/synthgen.hpp"
#include "oya/train.hpp"

namespace fs = std::filesystem;
using namespace oya;

namespace {

struct MissingInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_path(const std::string& path, const char* what) {
    if (path.empty()) throw MissingInput(std::string("missing ") + what);
    if (!fs::exists(path)) throw MissingInput(std::string(what) + " not found: " + path);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string grid_spec;
    std::string thresholds;

    void attach(CLI::App* app, bool out_required = true) {
        app->add_option("--config", config, "key = value config file; flags override it")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "seed for all randomness");
        auto* o = app->add_option("--out", out, "output directory");
        if (out_required) o->required();
        app->add_option("--grid-spec", grid_spec, "grid spec file (grid.* keys or bare keys)")->check(CLI::ExistingFile);
        app->add_option("--thresholds", thresholds, "comma-separated rain-rate thresholds in mm/h");
    }

    KvDocument config_doc() const { return config.empty() ? KvDocument{} : KvDocument::load(config); }

    std::vector<double> threshold_list() const {
        if (thresholds.empty()) return standard_thresholds();
        auto t = parse_double_list(thresholds);
        ContingencyTable::empty(t);  // validates ordering
        return t;
    }
};

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
    Common common;
    std::optional<int> channels, train_pairs, validation_pairs, pretrain_pairs, patch;
    std::optional<double> noise_level;
    bool raw = false;
};

int run_synth(const SynthArgs& a) {
    auto doc = a.common.config_doc();
    SynthConfig cfg;
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : doc.entries()) kv[k] = v;
    auto num = [&](const char* key, auto fallback) {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        kv.erase(it);
        return static_cast<decltype(fallback)>(std::stod(doc.get(key)));
    };
    cfg.seed = static_cast<std::uint64_t>(num("seed", static_cast<double>(cfg.seed)));
    cfg.channels = num("channels", cfg.channels);
    cfg.correlation_length = num("correlation_length", cfg.correlation_length);
    cfg.swath_width = num("swath_width", cfg.swath_width);
    cfg.noise_level = num("noise_level", cfg.noise_level);
    int train_pairs = num("train_pairs", 400), validation_pairs = num("validation_pairs", 50),
        pretrain_pairs = num("pretrain_pairs", 400), patch = num("patch", 0);
    if (!kv.empty()) throw std::invalid_argument("unknown synth config key: " + kv.begin()->first);

    if (!a.common.grid_spec.empty()) cfg.grid = load_grid_spec(a.common.grid_spec);
    if (a.common.seed) cfg.seed = *a.common.seed;
    if (a.channels) cfg.channels = *a.channels;
    if (a.noise_level) cfg.noise_level = *a.noise_level;
    if (a.train_pairs) train_pairs = *a.train_pairs;
    if (a.validation_pairs) validation_pairs = *a.validation_pairs;
    if (a.pretrain_pairs) pretrain_pairs = *a.pretrain_pairs;
    if (a.patch) patch = *a.patch;
    if (patch == 0) patch = std::min(cfg.grid.rows, cfg.grid.cols);
    cfg.validate();

    const fs::path out = a.common.out;
    const auto channels = synth_channels(cfg.channels);
    auto store = [&](const char* split, int count, SynthTarget target, std::uint64_t stream) {
        PatchStore s{cfg.grid, channels, split, synth_records(cfg, {count, target, patch, stream})};
        write_patch_store(out / split, s);
        std::cout << split << ": " << s.records.size() << " patches\n";
    };
    store("train", train_pairs, SynthTarget::swath, 0);
    store("validation", validation_pairs, SynthTarget::dense, 1);
    store("pretrain", pretrain_pairs, SynthTarget::dense_noisy, 2);
    if (a.raw) {
        RawCollection raw{cfg.grid, channels, std::vector<RawEntry>(static_cast<std::size_t>(train_pairs))};
        SynthDatasetSpec spec{train_pairs, SynthTarget::swath, patch, 0};
        parallel_for(raw.entries.size(), [&](std::size_t i) {
            auto p = generate_pair(pair_config(cfg, spec, i));
            raw.entries[i] = {std::move(p.scene), std::move(p.swath)};
        });
        write_raw_collection(out / "raw", raw);
        std::cout << "raw: " << raw.entries.size() << " scenes\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// build-dataset

struct BuildArgs {
    Common common;
    std::string raw;
    int patch = 128;
    std::string train_years;
    std::string validation_years = "2022";
};

std::set<int> parse_years(const std::string& s) {
    std::set<int> out;
    for (const auto& f : split_char(s, ','))
        if (!KvDocument::trim(f).empty()) out.insert(std::stoi(f));
    return out;
}

int run_build_dataset(const BuildArgs& a) {
    require_path(a.raw, "raw collection");
    auto raw = read_raw_collection(a.raw);
    GridSpec target = a.common.grid_spec.empty() ? raw.grid : load_grid_spec(a.common.grid_spec);
    std::vector<std::vector<PatchRecord>> per(raw.entries.size());
    parallel_for(per.size(), [&](std::size_t i) {
        const auto& e = raw.entries[i];
        per[i] = tile_patches(collocate(e.scene, e.swath, target), a.patch, e.scene.t_start, e.scene.t_end);
    });
    std::vector<PatchRecord> all;
    for (auto& v : per)
        for (auto& r : v) all.push_back(std::move(r));

    auto validation_years = parse_years(a.validation_years);
    std::set<int> train_years = parse_years(a.train_years);
    if (a.train_years.empty())
        for (const auto& r : all)
            if (!validation_years.count(year_of(r.t_start))) train_years.insert(year_of(r.t_start));
    auto split = split_by_period(all, train_years, validation_years);

    const fs::path out = a.common.out;
    for (auto [name, records] : {std::pair{"train", &split.train}, std::pair{"validation", &split.validation}}) {
        write_patch_store(out / name, PatchStore{target, raw.channels, name, *records});
        const auto thresholds = IntensityThresholds::from_vector(a.common.threshold_list());
        write_text(out / (std::string("histogram_") + name + ".txt"),
                   records->empty() ? std::string("class,count,fraction\n") : histogram_table(class_histogram(*records, thresholds)));
        std::cout << name << ": " << records->size() << " patches\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
    Common common;
    std::string data, validation, init;
    std::optional<long> steps;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
    std::optional<std::string> stage;
    int depth = 2;
    int base_width = 8;
    std::string channels = "all";
    bool no_augment = false;
    bool no_lds = false;
    long eval_interval = 0;
};

std::vector<int> parse_channel_selection(const std::string& s, const std::vector<ChannelDescriptor>& channels) {
    std::vector<int> out;
    if (s == "all") return out;
    if (s == "longwave") return {channel_index(channels, "longwave_window")};
    for (const auto& f : split_char(s, ',')) {
        const auto name = KvDocument::trim(f);
        bool numeric = !name.empty() && std::all_of(name.begin(), name.end(), [](unsigned char ch) { return std::isdigit(ch); });
        out.push_back(numeric ? std::stoi(name) : channel_index(channels, name));
    }
    return out;
}

Stage stage_for(SourceStage tag) {
    switch (tag) {
        case SourceStage::pretrained: return Stage::pretrain;
        case SourceStage::finetuned: return Stage::finetune;
        case SourceStage::scratch: return Stage::scratch;
    }
    return Stage::scratch;
}

int run_train(const TrainArgs& a) {
    require_path(a.data, "training store");
    auto doc = a.common.config_doc();
    auto cfg = TrainConfig::from_kv(doc);
    std::optional<Checkpoint> init;
    if (!a.init.empty()) {
        require_path(a.init, "init checkpoint");
        init = load_checkpoint(a.init);
        // Without an explicit stage or threshold, training continues in the checkpoint's own terms.
        if (!doc.has("stage")) cfg.stage = stage_for(init->stage);
        if (!doc.has("decision_threshold")) cfg.decision_threshold = init->model.decision_threshold;
    }
    if (a.common.seed) cfg.seed = *a.common.seed;
    if (a.steps) cfg.steps = *a.steps;
    if (a.batch_size) cfg.batch_size = *a.batch_size;
    if (a.learning_rate) cfg.learning_rate = *a.learning_rate;
    if (a.stage) cfg.stage = parse_stage(*a.stage);
    cfg.validate();

    auto store = read_patch_store(a.data);
    TrainOptions opts;
    opts.depth = a.depth;
    opts.base_width = a.base_width;
    opts.augment = !a.no_augment;
    opts.use_lds = !a.no_lds;
    opts.input_channels = parse_channel_selection(a.channels, store.channels);
    if (init) {
        opts.depth = init->model.classifier.config().depth;
        opts.base_width = init->model.classifier.config().base_width;
        if (a.channels == "all") opts.input_channels = init->model.input_channels;
    }

    std::optional<PatchStore> validation;
    std::ostringstream curve;
    StepCallback callback;
    if (!a.validation.empty()) {
        require_path(a.validation, "validation store");
        validation = read_patch_store(a.validation);
        opts.eval_interval = a.eval_interval > 0 ? a.eval_interval : 100;
        curve << "step,csi,combined_loss\n";
        callback = [&](long step, const TwoStageModel<float>& m) {
            std::span<const PatchRecord> v(validation->records);
            curve << step << "," << format_metric(validation_csi(m, v)) << "," << format_double(combined_validation_loss(m, v)) << "\n";
            return true;
        };
    }

    auto result = train(cfg, opts, store.records, init, callback);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    save_checkpoint(out / "checkpoint", result.checkpoint);
    std::ostringstream log;
    log << loss_csv_header() << "\n";
    for (const auto& r : result.log) log << loss_csv_row(r) << "\n";
    write_text(out / "loss.csv", log.str());
    write_text(out / "train_config.txt", cfg.to_kv().str());
    if (validation) write_text(out / "validation.csv", curve.str());
    for (const auto& d : result.diagnostics) std::cerr << "warning: " << d << "\n";
    std::cout << "trained " << result.log.size() << " steps, stage " << to_string(result.checkpoint.stage) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// evaluate / infer

struct EvalArgs {
    Common common;
    std::string truth, pred, checkpoint;
    bool csi_map = false;
};

std::vector<Plane<float>> predict_store(const Checkpoint& ck, const PatchStore& store) {
    std::vector<Plane<float>> out(store.records.size());
    parallel_for(out.size(), [&](std::size_t i) { out[i] = ck.model.predict(store.records[i].x).estimate; });
    return out;
}

int run_evaluate(const EvalArgs& a) {
    require_path(a.truth, "truth store");
    if (a.pred.empty() == a.checkpoint.empty()) throw std::invalid_argument("evaluate needs exactly one of --pred or --checkpoint");
    auto truth = read_patch_store(a.truth);
    std::vector<Plane<float>> preds;
    if (!a.pred.empty()) {
        require_path(a.pred, "prediction store");
        auto p = read_patch_store(a.pred);
        if (p.records.size() != truth.records.size())
            throw std::invalid_argument("prediction store has " + std::to_string(p.records.size()) + " records, truth has " +
                                        std::to_string(truth.records.size()));
        for (std::size_t i = 0; i < p.records.size(); ++i) {
            const auto &t = truth.records[i], &q = p.records[i];
            if (t.origin_row != q.origin_row || t.origin_col != q.origin_col || t.t_start != q.t_start || !t.y.same_shape(q.y))
                throw std::invalid_argument("prediction record " + std::to_string(i) + " does not line up with the truth record");
            preds.push_back(q.y);
        }
    } else {
        require_path(a.checkpoint, "checkpoint");
        preds = predict_store(load_checkpoint(a.checkpoint), truth);
    }
    auto thresholds = a.common.threshold_list();
    auto table = ContingencyTable::empty(thresholds);
    for (std::size_t i = 0; i < preds.size(); ++i) accumulate_into(table, truth.records[i].m, truth.records[i].y, preds[i]);
    const fs::path out = a.common.out;
    fs::create_directories(out);
    write_text(out / "metrics.csv", metric_csv(metrics(table)));
    if (a.csi_map) {
        CsiMap map(truth.grid.rows, truth.grid.cols, thresholds.front());
        for (std::size_t i = 0; i < preds.size(); ++i) {
            const auto& r = truth.records[i];
            map.add_at(r.origin_row, r.origin_col, r.m, r.y, preds[i]);
        }
        auto csi = map.csi();
        ArrayWriter w;
        w.write(csi);
        w.save((out / "csi_map.f32").string());
        write_text(out / "csi_map.ppm", render_ppm(csi, score_color));
    }
    std::cout << metric_csv(metrics(table));
    return 0;
}

struct InferArgs {
    Common common;
    std::string checkpoint, data;
};

int run_infer(const InferArgs& a) {
    require_path(a.checkpoint, "checkpoint");
    require_path(a.data, "input store");
    auto ck = load_checkpoint(a.checkpoint);
    auto in = read_patch_store(a.data);
    auto preds = predict_store(ck, in);
    PatchStore out{in.grid, in.channels, "prediction", {}};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& r = in.records[i];
        out.records.push_back({r.x, std::move(preds[i]), Plane<std::uint8_t>(r.rows(), r.cols(), 1), r.origin_row, r.origin_col,
                               r.t_start, r.t_end});
    }
    write_patch_store(a.common.out, out);
    std::cout << "predicted " << out.records.size() << " patches\n";
    return 0;
}

// ---------------------------------------------------------------------------
// mosaic

struct MosaicArgs {
    Common common;
    std::vector<std::string> inputs;
    double radius = kDefaultViewRadius;
};

int run_mosaic(const MosaicArgs& a) {
    struct Source {
        std::string id;
        double sub_lon;
        PatchStore store;
    };
    std::vector<Source> sources;
    for (const auto& spec : a.inputs) {
        auto at = spec.rfind('@');
        if (at == std::string::npos) throw std::invalid_argument("--input expects STORE@SUB_LONGITUDE, got " + spec);
        auto path = spec.substr(0, at);
        require_path(path, "prediction store");
        sources.push_back({spec, std::stod(spec.substr(at + 1)), read_patch_store(path)});
    }
    GridSpec grid = a.common.grid_spec.empty() ? sources.front().store.grid : load_grid_spec(a.common.grid_spec);
    for (const auto& s : sources)
        if (!(s.store.grid == grid)) throw std::invalid_argument("store " + s.id + " is not on the mosaic grid");

    std::set<std::int64_t> times;
    for (const auto& s : sources)
        for (const auto& r : s.store.records) times.insert(to_unix(r.t_start));

    std::vector<Plane<std::uint8_t>> disks;
    for (const auto& s : sources) disks.push_back(coverage_mask(s.sub_lon, a.radius, grid));

    const fs::path out = a.common.out;
    fs::create_directories(out);
    KvDocument manifest;
    manifest.add("format", "oya-global-products");
    manifest.add("version", "1");
    write_grid_spec(manifest, grid);
    manifest.add("max_view_radius", format_double(a.radius));
    for (std::size_t k = 0; k < sources.size(); ++k)
        manifest.add("satellite", sources[k].id + " " + format_double(sources[k].sub_lon));
    for (auto t : times) {
        std::vector<SatelliteEstimate> estimates;
        std::vector<std::string> contributors;
        for (std::size_t k = 0; k < sources.size(); ++k) {
            SatelliteEstimate e{Plane<float>(grid.rows, grid.cols, 0.0f), Plane<std::uint8_t>(grid.rows, grid.cols, 0)};
            bool any = false;
            for (const auto& r : sources[k].store.records) {
                if (to_unix(r.t_start) != t) continue;
                for (int i = 0; i < r.rows(); ++i)
                    for (int j = 0; j < r.cols(); ++j) {
                        const int gr = r.origin_row + i, gc = r.origin_col + j;
                        if (gr < 0 || gc < 0 || gr >= grid.rows || gc >= grid.cols || !r.m(i, j)) continue;
                        if (!disks[k](gr, gc)) continue;
                        e.rates(gr, gc) = r.y(i, j);
                        e.coverage(gr, gc) = 1;
                        any = true;
                    }
            }
            if (any) {
                estimates.push_back(std::move(e));
                contributors.push_back(sources[k].id);
            }
        }
        if (estimates.empty()) continue;
        auto product = merge_global(estimates);
        const std::string name = "product_" + std::to_string(t) + ".oyap";
        write_text(out / name, encode_global_product(product));
        std::string line = name + " " + std::to_string(t);
        for (const auto& c : contributors) line += " " + c;
        manifest.add("product", line);
    }
    manifest.save((out / "manifest.txt").string());
    std::cout << "wrote " << manifest.all("product").size() << " products\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ablate

struct AblateArgs {
    Common common;
    std::string axis = "all";
    long steps = 2000;
    long pretrain_steps = 2000;
    int train_scenes = 400, validation_scenes = 50, pretrain_scenes = 400;
    int depth = 2, base_width = 8;
};

int run_ablate(const AblateArgs& a) {
    AblationSetup setup;
    if (a.common.seed) {
        setup.synth.seed = *a.common.seed;
        setup.train.seed = *a.common.seed;
    }
    if (!a.common.grid_spec.empty()) setup.synth.grid = load_grid_spec(a.common.grid_spec);
    setup.train.steps = a.steps;
    setup.pretrain_steps = a.pretrain_steps;
    setup.train_scenes = a.train_scenes;
    setup.validation_scenes = a.validation_scenes;
    setup.pretrain_scenes = a.pretrain_scenes;
    setup.depth = a.depth;
    setup.base_width = a.base_width;
    std::vector<AblationAxis> axes;
    if (a.axis == "all")
        axes.assign(kAblationAxes.begin(), kAblationAxes.end());
    else
        axes.push_back(parse_ablation_axis(a.axis));
    auto rows = run_ablation(setup, axes, [](const std::string& m) { std::cerr << m << "\n"; });
    fs::create_directories(a.common.out);
    const auto csv = ablation_csv(rows);
    write_text(fs::path(a.common.out) / "ablation.csv", csv);
    std::cout << csv;
    return 0;
}

// ---------------------------------------------------------------------------
// case-report

struct CaseArgs {
    Common common;
    std::string checkpoint, raw;
    std::size_t scene = 0;
};

int run_case_report(const CaseArgs& a) {
    require_path(a.checkpoint, "checkpoint");
    require_path(a.raw, "raw collection");
    auto ck = load_checkpoint(a.checkpoint);
    auto raw = read_raw_collection(a.raw);
    if (a.scene >= raw.entries.size())
        throw std::invalid_argument("scene index " + std::to_string(a.scene) + " out of range (" + std::to_string(raw.entries.size()) + " scenes)");
    const auto& e = raw.entries[a.scene];
    auto pair = collocate(e.scene, e.swath);
    auto rep = case_report(e.scene, pair, {{"oya", ck.model.predict(e.scene.data).estimate}}, a.common.threshold_list());
    write_case_report(a.common.out, rep);
    std::cout << metric_csv(rep.metrics.at("oya"));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oya: two-stage satellite precipitation retrieval"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate synthetic patch stores");
    synth.common.attach(s);
    s->add_option("--channels", synth.channels, "number of channels (1-11)");
    s->add_option("--train-pairs", synth.train_pairs);
    s->add_option("--validation-pairs", synth.validation_pairs);
    s->add_option("--pretrain-pairs", synth.pretrain_pairs);
    s->add_option("--patch", synth.patch, "patch size (default: scene size)");
    s->add_option("--noise-level", synth.noise_level, "pretraining target noise");
    s->add_flag("--raw", synth.raw, "also write the training scenes and swaths ungridded");

    BuildArgs build;
    auto* b = app.add_subcommand("build-dataset", "collocate raw scenes with swaths and tile into patch stores");
    build.common.attach(b);
    b->add_option("--raw", build.raw, "raw collection directory")->required();
    b->add_option("--patch", build.patch, "patch size");
    b->add_option("--train-years", build.train_years, "comma-separated years (default: all non-validation years)");
    b->add_option("--validation-years", build.validation_years, "comma-separated years");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train the two-stage model");
    tr.common.attach(t);
    t->add_option("--data", tr.data, "training patch store")->required();
    t->add_option("--validation", tr.validation, "validation store for a CSI curve");
    t->add_option("--eval-interval", tr.eval_interval, "steps between validation evaluations");
    t->add_option("--init", tr.init, "checkpoint to start from");
    t->add_option("--steps", tr.steps);
    t->add_option("--batch-size", tr.batch_size);
    t->add_option("--learning-rate", tr.learning_rate);
    t->add_option("--stage", tr.stage, "pretrain | finetune | scratch");
    t->add_option("--depth", tr.depth, "U-Net depth");
    t->add_option("--base-width", tr.base_width, "U-Net base width");
    t->add_option("--channels", tr.channels, "all | longwave | comma-separated indices or names");
    t->add_flag("--no-augment", tr.no_augment);
    t->add_flag("--no-lds", tr.no_lds);

    EvalArgs ev;
    auto* e = app.add_subcommand("evaluate", "categorical scores of predictions against a truth store");
    ev.common.attach(e);
    e->add_option("--truth", ev.truth, "truth patch store")->required();
    e->add_option("--pred", ev.pred, "prediction patch store");
    e->add_option("--checkpoint", ev.checkpoint, "checkpoint to predict with");
    e->add_flag("--csi-map", ev.csi_map, "write a per-cell CSI map at the first threshold");

    InferArgs inf;
    auto* i = app.add_subcommand("infer", "predict rain rates for every record of a store");
    inf.common.attach(i);
    i->add_option("--checkpoint", inf.checkpoint)->required();
    i->add_option("--data", inf.data, "input patch store")->required();

    MosaicArgs mo;
    auto* m = app.add_subcommand("mosaic", "merge per-satellite predictions into global products");
    mo.common.attach(m);
    m->add_option("--input", mo.inputs, "STORE@SUB_LONGITUDE, repeatable")->required();
    m->add_option("--radius", mo.radius, "maximum viewing radius in great-circle degrees");

    AblateArgs ab;
    auto* a = app.add_subcommand("ablate", "train and score the design-choice ablations");
    ab.common.attach(a);
    a->add_option("axis", ab.axis, "channels | augmentation | pretraining | patch_size | lds | all")
        ->check(CLI::IsMember({"channels", "augmentation", "pretraining", "patch_size", "lds", "all"}));
    a->add_option("--steps", ab.steps);
    a->add_option("--pretrain-steps", ab.pretrain_steps);
    a->add_option("--train-scenes", ab.train_scenes);
    a->add_option("--validation-scenes", ab.validation_scenes);
    a->add_option("--pretrain-scenes", ab.pretrain_scenes);
    a->add_option("--depth", ab.depth);
    a->add_option("--base-width", ab.base_width);

    CaseArgs cs;
    auto* c = app.add_subcommand("case-report", "fields, images and scores for one overpass");
    cs.common.attach(c);
    c->add_option("--checkpoint", cs.checkpoint)->required();
    c->add_option("--raw", cs.raw, "raw collection directory")->required();
    c->add_option("--scene", cs.scene, "scene index in the raw collection");

    CLI11_PARSE(app, argc, argv);
    try {
        if (s->parsed()) return run_synth(synth);
        if (b->parsed()) return run_build_dataset(build);
        if (t->parsed()) return run_train(tr);
        if (e->parsed()) return run_evaluate(ev);
        if (i->parsed()) return run_infer(inf);
        if (m->parsed()) return run_mosaic(mo);
        if (a->parsed()) return run_ablate(ab);
        if (c->parsed()) return run_case_report(cs);
    } catch (const MissingInput& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
