#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace oya {

/// Row-major 2-D raster. Row 0 is the northernmost row of whatever window it covers.
template <class T>
struct Plane {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Plane() = default;
    Plane(int r, int c, T fill = T{}) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
        if (r < 0 || c < 0) throw std::invalid_argument("Plane: negative extent");
    }

    std::size_t size() const { return data.size(); }
    T& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    const T& operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool same_shape(int r, int c) const { return rows == r && cols == c; }
    template <class U>
    bool same_shape(const Plane<U>& o) const { return rows == o.rows && cols == o.cols; }

    friend bool operator==(const Plane&, const Plane&) = default;
};

/// Channel-major stack of planes (C x H x W), the layout the convolution kernels expect.
template <class T>
struct Volume {
    int channels = 0;
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Volume() = default;
    Volume(int c, int r, int w, T fill = T{})
        : channels(c), rows(r), cols(w), data(static_cast<std::size_t>(c) * r * w, fill) {
        if (c < 0 || r < 0 || w < 0) throw std::invalid_argument("Volume: negative extent");
    }

    std::size_t plane_size() const { return static_cast<std::size_t>(rows) * cols; }
    std::size_t size() const { return data.size(); }

    T& operator()(int c, int r, int w) { return data[c * plane_size() + static_cast<std::size_t>(r) * cols + w]; }
    const T& operator()(int c, int r, int w) const {
        return data[c * plane_size() + static_cast<std::size_t>(r) * cols + w];
    }

    std::span<T> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
    std::span<const T> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }

    Plane<T> plane_copy(int c) const {
        Plane<T> p(rows, cols);
        auto src = plane(c);
        std::copy(src.begin(), src.end(), p.data.begin());
        return p;
    }

    friend bool operator==(const Volume&, const Volume&) = default;
};

template <class T>
Plane<T> crop(const Plane<T>& p, int row0, int col0, int rows, int cols) {
    if (row0 < 0 || col0 < 0 || row0 + rows > p.rows || col0 + cols > p.cols)
        throw std::out_of_range("crop: window outside plane");
    Plane<T> out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) out(r, c) = p(row0 + r, col0 + c);
    return out;
}

template <class T>
Volume<T> crop(const Volume<T>& v, int row0, int col0, int rows, int cols) {
    if (row0 < 0 || col0 < 0 || row0 + rows > v.rows || col0 + cols > v.cols)
        throw std::out_of_range("crop: window outside volume");
    Volume<T> out(v.channels, rows, cols);
    for (int ch = 0; ch < v.channels; ++ch)
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) out(ch, r, c) = v(ch, row0 + r, col0 + c);
    return out;
}

/// Keeps only the listed channels, in the listed order.
template <class T>
Volume<T> select_channels(const Volume<T>& v, std::span<const int> channels) {
    Volume<T> out(static_cast<int>(channels.size()), v.rows, v.cols);
    for (std::size_t i = 0; i < channels.size(); ++i) {
        int src = channels[i];
        if (src < 0 || src >= v.channels) throw std::out_of_range("select_channels: bad channel index");
        auto from = v.plane(src);
        std::copy(from.begin(), from.end(), out.plane(static_cast<int>(i)).begin());
    }
    return out;
}

}  // namespace oya
