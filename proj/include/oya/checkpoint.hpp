#pragma once

#include <filesystem>
#include <string>

#include "oya/binary_io.hpp"
#include "oya/kv_text.hpp"
#include "oya/model.hpp"

namespace oya {

enum class SourceStage { scratch, pretrained, finetuned };

inline std::string to_string(SourceStage s) {
    switch (s) {
        case SourceStage::scratch: return "scratch";
        case SourceStage::pretrained: return "pretrained";
        case SourceStage::finetuned: return "finetuned";
    }
    return "scratch";
}

inline SourceStage parse_source_stage(const std::string& s) {
    if (s == "scratch") return SourceStage::scratch;
    if (s == "pretrained") return SourceStage::pretrained;
    if (s == "finetuned") return SourceStage::finetuned;
    throw std::invalid_argument("unknown checkpoint stage: " + s);
}

struct Checkpoint {
    TwoStageModel<float> model;
    SourceStage stage = SourceStage::scratch;
    long steps_trained = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
    return out;
}

inline std::string join_ints(const std::vector<int>& v, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + std::to_string(v[i]);
    return out;
}

inline void add_arrays(KvDocument& doc, ArrayWriter& blob, std::size_t& offset, const std::string& prefix,
                       const UNet<float>& net) {
    for (const auto& p : net.params()) {
        doc.add("array", prefix + p.name + " " + std::to_string(offset) + " " + std::to_string(p.size()) + " " +
                             join_ints(p.shape, "x"));
        blob.f32(p.value);
        offset += p.size();
    }
}

inline void load_arrays(const KvDocument& doc, const std::vector<float>& blob, const std::string& prefix,
                        UNet<float>& net) {
    std::size_t found = 0;
    for (const auto& line : doc.all("array")) {
        auto tok = split_ws(line);
        if (tok.size() != 4) throw std::runtime_error("bad array line: " + line);
        if (tok[0].rfind(prefix, 0) != 0) continue;
        auto name = tok[0].substr(prefix.size());
        auto offset = std::stoull(tok[1]), count = std::stoull(tok[2]);
        nn::Param<float>* target = nullptr;
        for (auto& p : net.params())
            if (p.name == name) target = &p;
        if (!target) throw std::runtime_error("checkpoint array " + tok[0] + " has no counterpart in the architecture");
        if (count != target->size() || tok[3] != join_ints(target->shape, "x"))
            throw std::runtime_error("checkpoint array " + tok[0] + " has shape " + tok[3] + ", architecture expects " +
                                     join_ints(target->shape, "x"));
        if (offset + count > blob.size()) throw std::runtime_error("checkpoint array " + tok[0] + " runs past params.bin");
        std::copy(blob.begin() + static_cast<std::ptrdiff_t>(offset),
                  blob.begin() + static_cast<std::ptrdiff_t>(offset + count), target->value.begin());
        ++found;
    }
    if (found != net.params().size()) throw std::runtime_error("checkpoint is missing arrays for " + prefix);
}

}  // namespace detail

/// Writes dir/manifest.txt and dir/params.bin (concatenated little-endian float32 arrays).
inline void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ck) {
    std::filesystem::create_directories(dir);
    const auto& m = ck.model;
    const auto& cfg = m.classifier.config();
    KvDocument doc;
    doc.add("format", "oya-checkpoint");
    doc.add("version", "1");
    doc.add("stage", to_string(ck.stage));
    doc.add("steps_trained", std::to_string(ck.steps_trained));
    doc.add("seed", std::to_string(ck.seed));
    doc.add("unet.in_channels", std::to_string(cfg.in_channels));
    doc.add("unet.depth", std::to_string(cfg.depth));
    doc.add("unet.base_width", std::to_string(cfg.base_width));
    doc.add("input_channels", detail::join_ints(m.input_channels));
    doc.add("channel_mean", detail::join_doubles(m.stats.mean));
    doc.add("channel_std", detail::join_doubles(m.stats.stddev));
    doc.add("decision_threshold", format_double(m.decision_threshold));
    doc.add("combine_mode", m.combine_mode == CombineMode::hard ? "hard" : "soft");
    ArrayWriter blob;
    std::size_t offset = 0;
    detail::add_arrays(doc, blob, offset, "classifier.", m.classifier);
    detail::add_arrays(doc, blob, offset, "regressor.", m.regressor);
    doc.save((dir / "manifest.txt").string());
    blob.save((dir / "params.bin").string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    auto manifest = dir / "manifest.txt";
    if (!std::filesystem::exists(manifest)) throw std::runtime_error("no checkpoint manifest at " + manifest.string());
    auto doc = KvDocument::load(manifest.string());
    if (doc.get("format") != "oya-checkpoint" || doc.get("version") != "1")
        throw std::runtime_error(manifest.string() + ": not a version-1 checkpoint");
    UNetConfig cfg{std::stoi(doc.get("unet.in_channels")), std::stoi(doc.get("unet.depth")),
                   std::stoi(doc.get("unet.base_width")), 2};
    Checkpoint ck;
    ck.stage = parse_source_stage(doc.get("stage"));
    ck.steps_trained = std::stol(doc.get("steps_trained"));
    ck.seed = std::stoull(doc.get("seed"));
    auto& m = ck.model;
    m.classifier = UNet<float>(cfg);
    cfg.out_channels = 1;
    m.regressor = UNet<float>(cfg);
    for (double c : parse_double_list(doc.get("input_channels"))) m.input_channels.push_back(static_cast<int>(c));
    m.stats.mean = parse_double_list(doc.get("channel_mean"));
    m.stats.stddev = parse_double_list(doc.get("channel_std"));
    m.decision_threshold = std::stod(doc.get("decision_threshold"));
    m.combine_mode = doc.get("combine_mode") == "soft" ? CombineMode::soft : CombineMode::hard;
    if (m.stats.mean.size() != m.stats.stddev.size())
        throw std::runtime_error("checkpoint channel statistics are inconsistent");
    if (static_cast<int>(m.input_channels.size()) != cfg.in_channels)
        throw std::runtime_error("checkpoint input_channels disagree with unet.in_channels");
    for (int c : m.input_channels)
        if (c < 0 || c >= m.scene_channels()) throw std::runtime_error("checkpoint input channel out of range");
    auto bytes = read_file_bytes((dir / "params.bin").string());
    if (bytes.size() % 4) throw std::runtime_error("params.bin is not a whole number of float32 values");
    ArrayReader rd(bytes, (dir / "params.bin").string());
    auto blob = rd.f32(bytes.size() / 4);
    detail::load_arrays(doc, blob, "classifier.", m.classifier);
    detail::load_arrays(doc, blob, "regressor.", m.regressor);
    return ck;
}

}  // namespace oya
