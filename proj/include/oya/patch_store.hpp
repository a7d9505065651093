#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "oya/binary_io.hpp"
#include "oya/grid.hpp"
#include "oya/kv_text.hpp"

namespace oya {

/// A directory holding manifest.txt plus one .oyap file per record.
/// Each record file is three headed arrays in order: x (float32, C planes), y (float32), m (uint8).
struct PatchStore {
    GridSpec grid;
    std::vector<ChannelDescriptor> channels;
    std::string split = "train";
    std::vector<PatchRecord> records;
};

inline void write_grid_spec(KvDocument& doc, const GridSpec& g, const std::string& prefix = "grid.") {
    doc.add(prefix + "lat_min", format_double(g.lat_min));
    doc.add(prefix + "lat_max", format_double(g.lat_max));
    doc.add(prefix + "lon_min", format_double(g.lon_min));
    doc.add(prefix + "lon_max", format_double(g.lon_max));
    doc.add(prefix + "spacing", format_double(g.spacing));
    doc.add(prefix + "rows", std::to_string(g.rows));
    doc.add(prefix + "cols", std::to_string(g.cols));
}

inline GridSpec read_grid_spec(const KvDocument& doc, const std::string& prefix = "grid.") {
    GridSpec g;
    g.lat_min = std::stod(doc.get(prefix + "lat_min"));
    g.lat_max = std::stod(doc.get(prefix + "lat_max"));
    g.lon_min = std::stod(doc.get(prefix + "lon_min"));
    g.lon_max = std::stod(doc.get(prefix + "lon_max"));
    g.spacing = std::stod(doc.get(prefix + "spacing"));
    if (doc.has(prefix + "rows")) {
        g.rows = std::stoi(doc.get(prefix + "rows"));
        g.cols = std::stoi(doc.get(prefix + "cols"));
    } else {
        g = GridSpec::make(g.lat_min, g.lat_max, g.lon_min, g.lon_max, g.spacing);
    }
    if (!g.valid()) throw std::runtime_error("grid spec rows/cols inconsistent with extent and spacing");
    return g;
}

inline GridSpec load_grid_spec(const std::string& path) {
    auto doc = KvDocument::load(path);
    std::string prefix = doc.has("grid.lat_min") ? "grid." : "";
    return read_grid_spec(doc, prefix);
}

inline std::string channel_line(const ChannelDescriptor& c) {
    return c.name + " " + format_double(c.center_wavelength) + " " + to_string(c.category);
}

inline ChannelDescriptor parse_channel_line(const std::string& line) {
    auto tok = split_ws(line);
    if (tok.size() != 3) throw std::runtime_error("bad channel line: " + line);
    return {tok[0], std::stod(tok[1]), parse_channel_category(tok[2])};
}

inline std::string record_file_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "record_%06zu.oyap", i);
    return buf;
}

inline std::string encode_record(const PatchRecord& r) {
    ArrayWriter w;
    w.write(r.x);
    w.write(r.y);
    w.write(r.m);
    return w.bytes();
}

inline PatchRecord decode_record(const std::string& bytes, const std::string& origin = "<memory>") {
    ArrayReader rd(bytes, origin);
    PatchRecord r;
    r.x = rd.volume();
    r.y = rd.plane_f32();
    r.m = rd.plane_u8();
    if (!rd.at_end()) throw std::runtime_error(origin + ": trailing bytes");
    if (r.x.rows != r.y.rows || r.x.cols != r.y.cols || !r.m.same_shape(r.y))
        throw std::runtime_error(origin + ": arrays disagree in shape");
    return r;
}

inline KvDocument store_manifest(const PatchStore& s) {
    KvDocument doc;
    doc.add("format", "oya-patch-store");
    doc.add("version", "1");
    doc.add("split", s.split);
    write_grid_spec(doc, s.grid);
    for (const auto& c : s.channels) doc.add("channel", channel_line(c));
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        const auto& r = s.records[i];
        doc.add("record", record_file_name(i) + " " + std::to_string(r.origin_row) + " " + std::to_string(r.origin_col) +
                              " " + std::to_string(to_unix(r.t_start)) + " " + std::to_string(to_unix(r.t_end)));
    }
    return doc;
}

inline void write_patch_store(const std::filesystem::path& dir, const PatchStore& s) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        if (s.records[i].x.channels != static_cast<int>(s.channels.size()))
            throw std::invalid_argument("write_patch_store: record channel count differs from descriptors");
        auto path = (dir / record_file_name(i)).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        auto bytes = encode_record(s.records[i]);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw std::runtime_error("write failed: " + path);
    }
    store_manifest(s).save((dir / "manifest.txt").string());
}

inline PatchStore read_patch_store(const std::filesystem::path& dir) {
    auto manifest = dir / "manifest.txt";
    if (!std::filesystem::exists(manifest)) throw std::runtime_error("no patch store manifest at " + manifest.string());
    auto doc = KvDocument::load(manifest.string());
    if (doc.get("format") != "oya-patch-store" || doc.get("version") != "1")
        throw std::runtime_error(manifest.string() + ": not a version-1 patch store");
    PatchStore s;
    s.split = doc.get("split");
    s.grid = read_grid_spec(doc);
    for (const auto& line : doc.all("channel")) s.channels.push_back(parse_channel_line(line));
    validate_channels(s.channels);
    for (const auto& line : doc.all("record")) {
        auto tok = split_ws(line);
        if (tok.size() != 5) throw std::runtime_error("bad record line: " + line);
        auto path = (dir / tok[0]).string();
        auto r = decode_record(read_file_bytes(path), path);
        if (r.x.channels != static_cast<int>(s.channels.size()))
            throw std::runtime_error(path + ": channel count differs from manifest");
        r.origin_row = std::stoi(tok[1]);
        r.origin_col = std::stoi(tok[2]);
        r.t_start = from_unix(std::stoll(tok[3]));
        r.t_end = from_unix(std::stoll(tok[4]));
        s.records.push_back(std::move(r));
    }
    return s;
}

}  // namespace oya
