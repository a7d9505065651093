#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace oya {

/// Ordered "key = value" document. Keys may repeat (record lines); '#' starts a comment line.
class KvDocument {
public:
    void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    bool has(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return true;
        return false;
    }

    const std::string& get(const std::string& key) const {
        for (const auto& [k, v] : entries_)
            if (k == key) return v;
        throw std::runtime_error("missing key: " + key);
    }

    std::string get_or(const std::string& key, std::string fallback) const { return has(key) ? get(key) : fallback; }

    std::vector<std::string> all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_)
            if (k == key) out.push_back(v);
        return out;
    }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
        return out;
    }

    static KvDocument parse(const std::string& text) {
        KvDocument doc;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw std::runtime_error("line " + std::to_string(lineno) + ": expected key = value");
            doc.add(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        return doc;
    }

    static KvDocument load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << str();
        if (!out) throw std::runtime_error("write failed: " + path);
    }

    static std::string trim(const std::string& s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return {};
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    return buf;
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::vector<std::string> split_char(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(KvDocument::trim(cur));
    return out;
}

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    for (const auto& tok : split_char(s, ','))
        if (!tok.empty()) out.push_back(std::stod(tok));
    return out;
}

}  // namespace oya
