#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oya/binary_io.hpp"
#include "oya/patch_store.hpp"

namespace oya {

/// Un-gridded inputs for build-dataset: a directory with raw.txt, one scene array per entry and one
/// swath CSV (lat,lon,time,rate with time in unix seconds) per entry. All scenes share one grid.
struct RawEntry {
    GeoScene scene;
    PrecipSwath swath;
};

struct RawCollection {
    GridSpec grid;
    std::vector<ChannelDescriptor> channels;
    std::vector<RawEntry> entries;
};

inline std::string swath_csv(const PrecipSwath& s) {
    std::ostringstream out;
    out << "lat,lon,time,rate\n";
    for (const auto& p : s.samples)
        out << format_double(p.lat) << "," << format_double(p.lon) << "," << to_unix(p.time) << "," << format_double(p.rate) << "\n";
    return out.str();
}

inline PrecipSwath parse_swath_csv(const std::string& text, const std::string& origin = "<swath>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || KvDocument::trim(line) != "lat,lon,time,rate")
        throw std::runtime_error(origin + ": expected header lat,lon,time,rate");
    PrecipSwath s;
    while (std::getline(in, line)) {
        if (KvDocument::trim(line).empty()) continue;
        auto f = split_char(line, ',');
        if (f.size() != 4) throw std::runtime_error(origin + ": bad swath row: " + line);
        s.samples.push_back({std::stod(f[0]), std::stod(f[1]), from_unix(std::stoll(f[2])), std::stod(f[3])});
    }
    s.validate();
    return s;
}

inline void write_raw_collection(const std::filesystem::path& dir, const RawCollection& c) {
    std::filesystem::create_directories(dir);
    KvDocument doc;
    doc.add("format", "oya-raw");
    doc.add("version", "1");
    write_grid_spec(doc, c.grid);
    for (const auto& ch : c.channels) doc.add("channel", channel_line(ch));
    for (std::size_t i = 0; i < c.entries.size(); ++i) {
        const auto& e = c.entries[i];
        if (!(e.scene.grid == c.grid)) throw std::invalid_argument("write_raw_collection: scene not on the collection grid");
        char scene_name[32], swath_name[32];
        std::snprintf(scene_name, sizeof scene_name, "scene_%06zu.oyap", i);
        std::snprintf(swath_name, sizeof swath_name, "swath_%06zu.csv", i);
        ArrayWriter w;
        w.write(e.scene.data);
        w.save((dir / scene_name).string());
        std::ofstream(dir / swath_name, std::ios::binary | std::ios::trunc) << swath_csv(e.swath);
        doc.add("scene", std::string(scene_name) + " " + swath_name + " " + std::to_string(to_unix(e.scene.t_start)) + " " +
                             std::to_string(to_unix(e.scene.t_end)));
    }
    doc.save((dir / "raw.txt").string());
}

inline RawCollection read_raw_collection(const std::filesystem::path& dir) {
    auto manifest = dir / "raw.txt";
    if (!std::filesystem::exists(manifest)) throw std::runtime_error("no raw collection manifest at " + manifest.string());
    auto doc = KvDocument::load(manifest.string());
    if (doc.get("format") != "oya-raw" || doc.get("version") != "1")
        throw std::runtime_error(manifest.string() + ": not a version-1 raw collection");
    RawCollection c;
    c.grid = read_grid_spec(doc);
    for (const auto& line : doc.all("channel")) c.channels.push_back(parse_channel_line(line));
    for (const auto& line : doc.all("scene")) {
        auto tok = split_ws(line);
        if (tok.size() != 4) throw std::runtime_error("bad scene line: " + line);
        RawEntry e;
        auto scene_path = (dir / tok[0]).string();
        ArrayReader r(read_file_bytes(scene_path), scene_path);
        e.scene.data = r.volume();
        e.scene.grid = c.grid;
        e.scene.channels = c.channels;
        e.scene.t_start = from_unix(std::stoll(tok[2]));
        e.scene.t_end = from_unix(std::stoll(tok[3]));
        e.scene.validate();
        auto swath_path = (dir / tok[1]).string();
        e.swath = parse_swath_csv(read_file_bytes(swath_path), swath_path);
        c.entries.push_back(std::move(e));
    }
    return c;
}

}  // namespace oya
