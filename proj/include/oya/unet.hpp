#pragma once

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/nn.hpp"

namespace oya {

struct UNetConfig {
    int in_channels = 8;
    int depth = 4;
    int base_width = 32;
    int out_channels = 1;

    void validate() const {
        if (in_channels < 1) throw std::invalid_argument("UNetConfig: in_channels must be >= 1");
        if (depth < 1) throw std::invalid_argument("UNetConfig: depth must be >= 1");
        if (base_width < 1) throw std::invalid_argument("UNetConfig: base_width must be >= 1");
        if (out_channels < 1) throw std::invalid_argument("UNetConfig: out_channels must be >= 1");
    }
    int width(int level) const { return base_width << level; }
    int granularity() const { return 1 << depth; }

    friend bool operator==(const UNetConfig&, const UNetConfig&) = default;
};

/// Encoder-decoder network: per level two 3x3 conv + ELU, 2x2 average-pool down, 2x2 transposed-conv up,
/// concatenation skips from encoder level k to decoder level k, and a 1x1 output head.
template <class T>
class UNet {
public:
    /// Activations kept by a training forward pass for the backward pass.
    struct Trace {
        struct Block {
            Volume<T> in;
            std::vector<T> col0, col1;
            Volume<T> act0, act1;
        };
        std::vector<Block> enc;
        Block mid;
        std::vector<Volume<T>> up_in;
        std::vector<Block> dec;
        Volume<T> head_in;
    };

    UNet() = default;

    explicit UNet(const UNetConfig& cfg) : cfg_(cfg) {
        cfg.validate();
        int in = cfg.in_channels;
        for (int k = 0; k < cfg.depth; ++k) {
            enc_.push_back(make_block(in, cfg.width(k), "enc" + std::to_string(k)));
            in = cfg.width(k);
        }
        mid_ = make_block(in, cfg.width(cfg.depth), "mid");
        dec_.resize(cfg.depth);
        up_.resize(cfg.depth);
        for (int k = cfg.depth - 1; k >= 0; --k) {
            up_[k] = nn::UpConv<T>{cfg.width(k + 1), cfg.width(k)};
            up_[k].register_params(params_, "dec" + std::to_string(k) + ".up");
            dec_[k] = make_block(2 * cfg.width(k), cfg.width(k), "dec" + std::to_string(k));
        }
        head_ = nn::Conv<T>{cfg.width(0), cfg.out_channels, 1};
        head_.register_params(params_, "head");
    }

    const UNetConfig& config() const { return cfg_; }
    nn::ParamSet<T>& params() { return params_; }
    const nn::ParamSet<T>& params() const { return params_; }

    void init(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (auto& b : enc_) init_block(b, rng);
        init_block(mid_, rng);
        for (int k = cfg_.depth - 1; k >= 0; --k) {
            up_[k].init(params_, rng);
            init_block(dec_[k], rng);
        }
        head_.init(params_, rng, 1.0);
    }

    void check_input(const Volume<T>& x) const {
        if (x.channels != cfg_.in_channels)
            throw std::invalid_argument("UNet: expected " + std::to_string(cfg_.in_channels) + " input channels, got " +
                                        std::to_string(x.channels));
        if (x.rows < 1 || x.cols < 1 || x.rows % cfg_.granularity() || x.cols % cfg_.granularity())
            throw std::invalid_argument("UNet: spatial extent must be a positive multiple of " +
                                        std::to_string(cfg_.granularity()));
    }

    Volume<T> forward(const Volume<T>& x) const {
        Trace scratch;
        return forward(x, scratch);
    }

    Volume<T> forward(const Volume<T>& x, Trace& tr) const {
        check_input(x);
        tr.enc.assign(cfg_.depth, {});
        tr.dec.assign(cfg_.depth, {});
        tr.up_in.assign(cfg_.depth, {});
        Volume<T> h = x;
        for (int k = 0; k < cfg_.depth; ++k) {
            block_forward(enc_[k], std::move(h), tr.enc[k]);
            h = nn::avg_pool2(tr.enc[k].act1);
        }
        block_forward(mid_, std::move(h), tr.mid);
        const Volume<T>* below = &tr.mid.act1;
        for (int k = cfg_.depth - 1; k >= 0; --k) {
            tr.up_in[k] = *below;
            auto u = up_[k].forward(params_, tr.up_in[k]);
            block_forward(dec_[k], nn::concat_channels(tr.enc[k].act1, u), tr.dec[k]);
            below = &tr.dec[k].act1;
        }
        tr.head_in = *below;
        std::vector<T> unused;
        return head_.forward(params_, tr.head_in, unused);
    }

    /// Accumulates dL/dparams into grads given dL/doutput.
    void backward(const Trace& tr, const Volume<T>& dout, nn::Gradients<T>& grads) const {
        std::vector<T> unused;
        Volume<T> d = head_.backward(params_, tr.head_in, unused, dout, grads);
        std::vector<Volume<T>> dskip(cfg_.depth);
        for (int k = 0; k < cfg_.depth; ++k) {
            Volume<T> dcat = block_backward(dec_[k], tr.dec[k], std::move(d), grads, true);
            const int skip_ch = cfg_.width(k);
            dskip[k] = Volume<T>(skip_ch, dcat.rows, dcat.cols);
            Volume<T> du(dcat.channels - skip_ch, dcat.rows, dcat.cols);
            std::copy(dcat.data.begin(), dcat.data.begin() + static_cast<std::ptrdiff_t>(dskip[k].size()),
                      dskip[k].data.begin());
            std::copy(dcat.data.begin() + static_cast<std::ptrdiff_t>(dskip[k].size()), dcat.data.end(),
                      du.data.begin());
            d = up_[k].backward(params_, tr.up_in[k], du, grads);
        }
        d = block_backward(mid_, tr.mid, std::move(d), grads, true);
        for (int k = cfg_.depth - 1; k >= 0; --k) {
            Volume<T> dact = std::move(dskip[k]);
            nn::avg_pool2_backward_add(d, dact);
            d = block_backward(enc_[k], tr.enc[k], std::move(dact), grads, k > 0);
        }
    }

private:
    struct Block {
        nn::Conv<T> c0, c1;
    };

    Block make_block(int in, int out, const std::string& prefix) {
        Block b{nn::Conv<T>{in, out, 3}, nn::Conv<T>{out, out, 3}};
        b.c0.register_params(params_, prefix + ".conv0");
        b.c1.register_params(params_, prefix + ".conv1");
        return b;
    }

    template <class Rng>
    void init_block(const Block& b, Rng& rng) {
        b.c0.init(params_, rng);
        b.c1.init(params_, rng);
    }

    void block_forward(const Block& b, Volume<T> in, typename Trace::Block& t) const {
        t.in = std::move(in);
        t.act0 = b.c0.forward(params_, t.in, t.col0);
        nn::elu_inplace(t.act0);
        t.act1 = b.c1.forward(params_, t.act0, t.col1);
        nn::elu_inplace(t.act1);
    }

    Volume<T> block_backward(const Block& b, const typename Trace::Block& t, Volume<T> dact1, nn::Gradients<T>& grads,
                             bool want_dx) const {
        nn::elu_backward_inplace(t.act1, dact1);
        Volume<T> dact0 = b.c1.backward(params_, t.act0, t.col1, dact1, grads);
        nn::elu_backward_inplace(t.act0, dact0);
        return b.c0.backward(params_, t.in, t.col0, dact0, grads, want_dx);
    }

    UNetConfig cfg_;
    nn::ParamSet<T> params_;
    std::vector<Block> enc_;
    Block mid_;
    std::vector<nn::UpConv<T>> up_;
    std::vector<Block> dec_;
    nn::Conv<T> head_;
};

/// Copies parameter values between precisions; architectures must match.
template <class To, class From>
UNet<To> convert(const UNet<From>& src) {
    UNet<To> dst(src.config());
    for (std::size_t i = 0; i < src.params().size(); ++i) {
        const auto& s = src.params()[i].value;
        auto& d = dst.params()[i].value;
        for (std::size_t j = 0; j < s.size(); ++j) d[j] = static_cast<To>(s[j]);
    }
    return dst;
}

}  // namespace oya
