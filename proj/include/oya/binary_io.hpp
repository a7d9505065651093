#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/array.hpp"

namespace oya {

/// 16-byte array header: "OYAP", version u16 = 1, rows u16, cols u16, channels u16, 4 reserved zero bytes.
/// All fields little-endian. The payload that follows is float32 or uint8 depending on position in the file.
struct ArrayHeader {
    std::uint16_t rows = 0;
    std::uint16_t cols = 0;
    std::uint16_t channels = 0;

    static constexpr std::array<char, 4> magic{'O', 'Y', 'A', 'P'};
    static constexpr std::uint16_t version = 1;
    static constexpr std::size_t size = 16;
};

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

inline std::uint16_t get_u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

inline std::uint16_t checked_u16(int v, const char* what) {
    if (v < 0 || v > 0xffff) throw std::out_of_range(std::string("array ") + what + " does not fit in u16");
    return static_cast<std::uint16_t>(v);
}

}  // namespace detail

class ArrayWriter {
public:
    void header(int channels, int rows, int cols) {
        buf_.append(ArrayHeader::magic.data(), 4);
        detail::put_u16(buf_, ArrayHeader::version);
        detail::put_u16(buf_, detail::checked_u16(rows, "rows"));
        detail::put_u16(buf_, detail::checked_u16(cols, "cols"));
        detail::put_u16(buf_, detail::checked_u16(channels, "channels"));
        buf_.append(4, '\0');
    }

    void f32(std::span<const float> values) {
        for (float f : values) {
            auto bits = std::bit_cast<std::uint32_t>(f);
            for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
        }
    }

    void u8(std::span<const std::uint8_t> values) { buf_.append(reinterpret_cast<const char*>(values.data()), values.size()); }

    void write(const Volume<float>& v) {
        header(v.channels, v.rows, v.cols);
        f32(v.data);
    }
    void write(const Plane<float>& p) {
        header(1, p.rows, p.cols);
        f32(p.data);
    }
    void write(const Plane<std::uint8_t>& p) {
        header(1, p.rows, p.cols);
        u8(p.data);
    }

    const std::string& bytes() const { return buf_; }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path);
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        if (!out) throw std::runtime_error("write failed: " + path);
    }

private:
    std::string buf_;
};

class ArrayReader {
public:
    explicit ArrayReader(std::string bytes, std::string origin = "<memory>")
        : buf_(std::move(bytes)), origin_(std::move(origin)) {}

    static ArrayReader open(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return ArrayReader(ss.str(), path);
    }

    ArrayHeader header() {
        auto p = take(ArrayHeader::size);
        if (std::memcmp(p, ArrayHeader::magic.data(), 4) != 0) fail("bad magic");
        if (detail::get_u16(p + 4) != ArrayHeader::version) fail("unsupported version");
        return ArrayHeader{detail::get_u16(p + 6), detail::get_u16(p + 8), detail::get_u16(p + 10)};
    }

    std::vector<float> f32(std::size_t n) {
        auto p = take(n * 4);
        std::vector<float> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(p[4 * i + b]) << (8 * b);
            out[i] = std::bit_cast<float>(bits);
        }
        return out;
    }

    std::vector<std::uint8_t> u8(std::size_t n) {
        auto p = take(n);
        return {p, p + n};
    }

    Volume<float> volume() {
        auto h = header();
        Volume<float> v(h.channels, h.rows, h.cols);
        v.data = f32(v.size());
        return v;
    }
    Plane<float> plane_f32() {
        auto h = header();
        if (h.channels != 1) fail("expected a single-channel float array");
        Plane<float> p(h.rows, h.cols);
        p.data = f32(p.size());
        return p;
    }
    Plane<std::uint8_t> plane_u8() {
        auto h = header();
        if (h.channels != 1) fail("expected a single-channel byte array");
        Plane<std::uint8_t> p(h.rows, h.cols);
        p.data = u8(p.size());
        return p;
    }

    bool at_end() const { return pos_ == buf_.size(); }

private:
    const unsigned char* take(std::size_t n) {
        if (pos_ + n > buf_.size()) fail("truncated");
        auto p = reinterpret_cast<const unsigned char*>(buf_.data() + pos_);
        pos_ += n;
        return p;
    }
    [[noreturn]] void fail(const std::string& why) const { throw std::runtime_error(origin_ + ": " + why); }

    std::string buf_;
    std::string origin_;
    std::size_t pos_ = 0;
};

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace oya
