#pragma once

// Convolution building blocks with hand-written backward passes. Activations are
// channel-major volumes; convolutions lower to GEMM through im2col.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/array.hpp"

namespace oya::nn {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <class T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;

    std::size_t size() const { return value.size(); }
};

template <class T>
class ParamSet {
public:
    std::size_t add(std::string name, std::vector<int> shape) {
        std::size_t n = 1;
        for (int d : shape) n *= static_cast<std::size_t>(d);
        params_.push_back(Param<T>{std::move(name), std::move(shape), std::vector<T>(n, T{0})});
        return params_.size() - 1;
    }

    Param<T>& operator[](std::size_t i) { return params_[i]; }
    const Param<T>& operator[](std::size_t i) const { return params_[i]; }
    std::size_t size() const { return params_.size(); }
    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.size();
        return n;
    }

    const Param<T>* find(const std::string& name) const {
        for (const auto& p : params_)
            if (p.name == name) return &p;
        return nullptr;
    }

private:
    std::vector<Param<T>> params_;
};

/// Gradient buffers shaped like a ParamSet.
template <class T>
struct Gradients {
    std::vector<std::vector<T>> g;

    Gradients() = default;
    explicit Gradients(const ParamSet<T>& ps) {
        for (const auto& p : ps) g.emplace_back(p.size(), T{0});
    }
    void zero() {
        for (auto& v : g) std::fill(v.begin(), v.end(), T{0});
    }
    void scale(T s) {
        for (auto& v : g)
            for (auto& x : v) x *= s;
    }
};

// ---------------------------------------------------------------------------

/// 'Same'-padded k x k convolution, stride 1. Weight is (out x in*k*k), bias is (out).
/// Fills col (C*k*k x H*W) with the zero-padded k x k neighbourhoods of x.
template <class T>
void im2col(const Volume<T>& x, int k, std::vector<T>& col) {
    const int C = x.channels, H = x.rows, W = x.cols, pad = k / 2;
    const std::size_t hw = static_cast<std::size_t>(H) * W;
    col.resize(static_cast<std::size_t>(C) * k * k * hw);
    for (int ci = 0; ci < C; ++ci)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                T* dst = col.data() + ((static_cast<std::size_t>(ci) * k + ky) * k + kx) * hw;
                const int dy = ky - pad, dx = kx - pad;
                const int c0 = std::max(0, -dx), c1 = std::max(c0, std::min(W, W - dx));
                for (int r = 0; r < H; ++r) {
                    T* row = dst + static_cast<std::size_t>(r) * W;
                    const int sr = r + dy;
                    if (sr < 0 || sr >= H) {
                        std::fill(row, row + W, T{0});
                        continue;
                    }
                    std::fill(row, row + c0, T{0});
                    if (c1 > c0)
                        std::memcpy(row + c0, &x(ci, sr, c0 + dx), sizeof(T) * static_cast<std::size_t>(c1 - c0));
                    std::fill(row + c1, row + W, T{0});
                }
            }
}

template <class T>
struct Conv {
    int in = 0;
    int out = 0;
    int k = 3;
    std::size_t weight = 0;
    std::size_t bias = 0;

    void register_params(ParamSet<T>& ps, const std::string& prefix) {
        weight = ps.add(prefix + ".weight", {out, in, k, k});
        bias = ps.add(prefix + ".bias", {out});
    }

    template <class Rng>
    void init(ParamSet<T>& ps, Rng& rng, double gain = 2.0) const {
        std::normal_distribution<double> dist(0.0, std::sqrt(gain / (in * k * k)));
        for (auto& w : ps[weight].value) w = static_cast<T>(dist(rng));
        std::fill(ps[bias].value.begin(), ps[bias].value.end(), T{0});
    }

    void im2col(const Volume<T>& x, std::vector<T>& col) const { nn::im2col(x, k, col); }

    Volume<T> forward(const ParamSet<T>& ps, const Volume<T>& x, std::vector<T>& col) const {
        if (x.channels != in) throw std::invalid_argument("Conv: input channel mismatch");
        const std::size_t hw = x.plane_size();
        Volume<T> y(out, x.rows, x.cols);
        MatMap<T> ym(y.data.data(), out, static_cast<Eigen::Index>(hw));
        ConstMatMap<T> wm(ps[weight].value.data(), out, in * k * k);
        if (k == 1) {
            ConstMatMap<T> xm(x.data.data(), in, static_cast<Eigen::Index>(hw));
            ym.noalias() = wm * xm;
        } else {
            im2col(x, col);
            ConstMatMap<T> cm(col.data(), in * k * k, static_cast<Eigen::Index>(hw));
            ym.noalias() = wm * cm;
        }
        const auto& b = ps[bias].value;
        for (int co = 0; co < out; ++co) {
            auto p = y.plane(co);
            for (auto& v : p) v += b[co];
        }
        return y;
    }

    /// Accumulates parameter gradients; returns dL/dx when want_dx, otherwise an empty volume.
    Volume<T> backward(const ParamSet<T>& ps, const Volume<T>& x, const std::vector<T>& col, const Volume<T>& dy,
                       Gradients<T>& grads, bool want_dx = true) const {
        const std::size_t hw = dy.plane_size();
        ConstMatMap<T> dym(dy.data.data(), out, static_cast<Eigen::Index>(hw));
        MatMap<T> dwm(grads.g[weight].data(), out, in * k * k);
        auto& db = grads.g[bias];
        for (int co = 0; co < out; ++co) {
            // plain loop: a vectorized reduction would sum in an alignment-dependent order
            T sum{0};
            for (T v : dy.plane(co)) sum += v;
            db[co] += sum;
        }
        const T* src = k == 1 ? x.data.data() : col.data();
        ConstMatMap<T> cm(src, in * k * k, static_cast<Eigen::Index>(hw));
        dwm.noalias() += dym * cm.transpose();
        if (!want_dx) return {};
        ConstMatMap<T> wm(ps[weight].value.data(), out, in * k * k);
        Volume<T> dx(in, dy.rows, dy.cols);
        if (k == 1) {
            MatMap<T> dxm(dx.data.data(), in, static_cast<Eigen::Index>(hw));
            dxm.noalias() = wm.transpose() * dym;
        } else {
            // dx is dy correlated with the spatially flipped, channel-transposed kernel.
            RowMat<T> flipped(in, out * k * k);
            const auto& w = ps[weight].value;
            for (int co = 0; co < out; ++co)
                for (int ci = 0; ci < in; ++ci)
                    for (int t = 0; t < k * k; ++t)
                        flipped(ci, co * k * k + (k * k - 1 - t)) = w[(static_cast<std::size_t>(co) * in + ci) * k * k + t];
            std::vector<T> dcol;
            nn::im2col(dy, k, dcol);
            ConstMatMap<T> dcm(dcol.data(), out * k * k, static_cast<Eigen::Index>(hw));
            MatMap<T> dxm(dx.data.data(), in, static_cast<Eigen::Index>(hw));
            dxm.noalias() = flipped * dcm;
        }
        return dx;
    }
};

/// 2x2 stride-2 transposed convolution. Weight rows are ordered (out, dy, dx), columns are input channels.
template <class T>
struct UpConv {
    int in = 0;
    int out = 0;
    std::size_t weight = 0;
    std::size_t bias = 0;

    void register_params(ParamSet<T>& ps, const std::string& prefix) {
        weight = ps.add(prefix + ".weight", {out, 2, 2, in});
        bias = ps.add(prefix + ".bias", {out});
    }

    template <class Rng>
    void init(ParamSet<T>& ps, Rng& rng) const {
        std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / in));
        for (auto& w : ps[weight].value) w = static_cast<T>(dist(rng));
        std::fill(ps[bias].value.begin(), ps[bias].value.end(), T{0});
    }

    Volume<T> forward(const ParamSet<T>& ps, const Volume<T>& x) const {
        if (x.channels != in) throw std::invalid_argument("UpConv: input channel mismatch");
        const int H = x.rows, W = x.cols;
        const std::size_t hw = x.plane_size();
        RowMat<T> expanded(out * 4, static_cast<Eigen::Index>(hw));
        ConstMatMap<T> wm(ps[weight].value.data(), out * 4, in);
        ConstMatMap<T> xm(x.data.data(), in, static_cast<Eigen::Index>(hw));
        expanded.noalias() = wm * xm;
        Volume<T> y(out, 2 * H, 2 * W);
        const auto& b = ps[bias].value;
        for (int co = 0; co < out; ++co)
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb) {
                    const T* src = expanded.data() + static_cast<std::size_t>(co * 4 + a * 2 + bb) * hw;
                    for (int i = 0; i < H; ++i)
                        for (int j = 0; j < W; ++j) y(co, 2 * i + a, 2 * j + bb) = src[i * W + j] + b[co];
                }
        return y;
    }

    Volume<T> backward(const ParamSet<T>& ps, const Volume<T>& x, const Volume<T>& dy, Gradients<T>& grads) const {
        const int H = x.rows, W = x.cols;
        const std::size_t hw = x.plane_size();
        RowMat<T> dexp(out * 4, static_cast<Eigen::Index>(hw));
        auto& db = grads.g[bias];
        for (int co = 0; co < out; ++co) {
            T sum{0};
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb) {
                    T* dst = dexp.data() + static_cast<std::size_t>(co * 4 + a * 2 + bb) * hw;
                    for (int i = 0; i < H; ++i)
                        for (int j = 0; j < W; ++j) {
                            T v = dy(co, 2 * i + a, 2 * j + bb);
                            dst[i * W + j] = v;
                            sum += v;
                        }
                }
            db[co] += sum;
        }
        ConstMatMap<T> xm(x.data.data(), in, static_cast<Eigen::Index>(hw));
        MatMap<T> dwm(grads.g[weight].data(), out * 4, in);
        dwm.noalias() += dexp * xm.transpose();
        ConstMatMap<T> wm(ps[weight].value.data(), out * 4, in);
        Volume<T> dx(in, H, W);
        MatMap<T> dxm(dx.data.data(), in, static_cast<Eigen::Index>(hw));
        dxm.noalias() = wm.transpose() * dexp;
        return dx;
    }
};

/// ELU with alpha = 1; smooth to first order, so finite-difference checks stay clean.
/// Runs in fixed-size chunks through an aligned buffer: Eigen evaluates the unaligned head of a buffer
/// with the scalar exp and the rest with the packet exp, which round differently, so working in place
/// would make results depend on where the allocator put the activations.
template <class T>
void elu_inplace(Volume<T>& v) {
    constexpr std::size_t kChunk = 1024;
    alignas(64) T buf[kChunk];
    for (std::size_t off = 0; off < v.data.size(); off += kChunk) {
        const std::size_t n = std::min(kChunk, v.data.size() - off);
        std::copy_n(v.data.data() + off, n, buf);
        Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>, Eigen::Aligned64> a(buf, static_cast<Eigen::Index>(n));
        a = a.max(T{0}) + (a.min(T{0}).exp() - T{1});
        std::copy_n(buf, n, v.data.data() + off);
    }
}

/// Multiplies dy by the ELU derivative, written in terms of the activation output.
template <class T>
void elu_backward_inplace(const Volume<T>& y, Volume<T>& dy) {
    const auto n = static_cast<Eigen::Index>(dy.data.size());
    Eigen::Map<const Eigen::Array<T, Eigen::Dynamic, 1>> a(y.data.data(), n);
    Eigen::Map<Eigen::Array<T, Eigen::Dynamic, 1>> d(dy.data.data(), n);
    d *= a.min(T{0}) + T{1};
}

template <class T>
Volume<T> avg_pool2(const Volume<T>& x) {
    if (x.rows % 2 || x.cols % 2) throw std::invalid_argument("avg_pool2: odd spatial extent");
    Volume<T> y(x.channels, x.rows / 2, x.cols / 2);
    for (int c = 0; c < x.channels; ++c)
        for (int i = 0; i < y.rows; ++i)
            for (int j = 0; j < y.cols; ++j)
                y(c, i, j) = T(0.25) * (x(c, 2 * i, 2 * j) + x(c, 2 * i, 2 * j + 1) + x(c, 2 * i + 1, 2 * j) +
                                        x(c, 2 * i + 1, 2 * j + 1));
    return y;
}

template <class T>
void avg_pool2_backward_add(const Volume<T>& dy, Volume<T>& dx) {
    for (int c = 0; c < dy.channels; ++c)
        for (int i = 0; i < dy.rows; ++i)
            for (int j = 0; j < dy.cols; ++j) {
                T g = T(0.25) * dy(c, i, j);
                dx(c, 2 * i, 2 * j) += g;
                dx(c, 2 * i, 2 * j + 1) += g;
                dx(c, 2 * i + 1, 2 * j) += g;
                dx(c, 2 * i + 1, 2 * j + 1) += g;
            }
}

template <class T>
Volume<T> concat_channels(const Volume<T>& a, const Volume<T>& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("concat_channels: extent mismatch");
    Volume<T> out(a.channels + b.channels, a.rows, a.cols);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
    return out;
}

}  // namespace oya::nn
