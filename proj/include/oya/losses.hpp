#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "oya/array.hpp"
#include "oya/model.hpp"

namespace oya {

/// Sum of per-cell losses over the valid cells, and how many cells contributed.
struct LossValue {
    double sum = 0.0;
    std::size_t count = 0;

    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

/// Masked squared error: sum over m = 1 cells of (y_pred - y)^2. If grad is given, adds scale * dL/dy_pred.
template <class T>
LossValue masked_l2_loss(const Plane<std::uint8_t>& m, const Plane<T>& y, const Plane<T>& y_pred, Plane<T>* grad = nullptr,
                         T scale = T{1}) {
    if (!m.same_shape(y) || !m.same_shape(y_pred)) throw std::invalid_argument("masked_l2_loss: shape mismatch");
    if (grad && !grad->same_shape(y)) throw std::invalid_argument("masked_l2_loss: gradient shape mismatch");
    LossValue out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.data[i]) continue;
        double d = static_cast<double>(y_pred.data[i]) - static_cast<double>(y.data[i]);
        out.sum += d * d;
        ++out.count;
        if (grad) grad->data[i] += scale * T(2) * (y_pred.data[i] - y.data[i]);
    }
    return out;
}

/// Per-cell softmax cross entropy times the class weight of the cell's label, summed over m = 1 cells.
/// rain_labels: 1 for rain, 0 for no rain. class_weights = {w_norain, w_rain}.
template <class T>
LossValue weighted_ce_loss(const Plane<std::uint8_t>& m, const Plane<std::uint8_t>& rain_labels, const Volume<T>& logits,
                           std::array<double, 2> class_weights, Volume<T>* grad = nullptr, T scale = T{1}) {
    if (logits.channels != 2) throw std::invalid_argument("weighted_ce_loss: expected two logit channels");
    if (!m.same_shape(rain_labels) || !m.same_shape(logits.rows, logits.cols))
        throw std::invalid_argument("weighted_ce_loss: shape mismatch");
    if (grad && (grad->channels != 2 || grad->rows != logits.rows || grad->cols != logits.cols))
        throw std::invalid_argument("weighted_ce_loss: gradient shape mismatch");
    auto no = logits.plane(kNoRainLogit);
    auto yes = logits.plane(kRainLogit);
    LossValue out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.data[i]) continue;
        const double a = no[i], b = yes[i];
        const double hi = std::max(a, b);
        const double lse = hi + std::log(std::exp(a - hi) + std::exp(b - hi));
        const bool rain = rain_labels.data[i] != 0;
        const double w = class_weights[rain ? 1 : 0];
        out.sum += w * (lse - (rain ? b : a));
        ++out.count;
        if (grad) {
            const double p_yes = std::exp(b - lse), p_no = std::exp(a - lse);
            grad->plane(kNoRainLogit)[i] += scale * static_cast<T>(w * (p_no - (rain ? 0.0 : 1.0)));
            grad->plane(kRainLogit)[i] += scale * static_cast<T>(w * (p_yes - (rain ? 1.0 : 0.0)));
        }
    }
    return out;
}

/// Weighted squared error on rain cells, with one weight per cell held in a plane.
template <class T>
LossValue weighted_l2_loss(const Plane<std::uint8_t>& m_rain, const Plane<T>& z, const Plane<T>& z_pred,
                           const Plane<T>& weight, Plane<T>* grad = nullptr, T scale = T{1}) {
    if (!m_rain.same_shape(z) || !m_rain.same_shape(z_pred) || !m_rain.same_shape(weight))
        throw std::invalid_argument("weighted_l2_loss: shape mismatch");
    LossValue out;
    for (std::size_t i = 0; i < m_rain.size(); ++i) {
        if (!m_rain.data[i]) continue;
        double d = static_cast<double>(z_pred.data[i]) - static_cast<double>(z.data[i]);
        out.sum += static_cast<double>(weight.data[i]) * d * d;
        ++out.count;
        if (grad) grad->data[i] += scale * weight.data[i] * T(2) * (z_pred.data[i] - z.data[i]);
    }
    return out;
}

/// LDS-weighted regression loss. sample_weights lists one weight per m_rain cell in raster order.
template <class T>
LossValue lds_weighted_regression_loss(const Plane<std::uint8_t>& m_rain, const Plane<T>& z, const Plane<T>& z_pred,
                                       std::span<const double> sample_weights, Plane<T>* grad = nullptr,
                                       T scale = T{1}) {
    Plane<T> w(m_rain.rows, m_rain.cols, T{0});
    std::size_t k = 0;
    for (std::size_t i = 0; i < m_rain.size(); ++i) {
        if (!m_rain.data[i]) continue;
        if (k >= sample_weights.size()) throw std::invalid_argument("lds_weighted_regression_loss: fewer weights than rain cells");
        w.data[i] = static_cast<T>(sample_weights[k++]);
    }
    if (k != sample_weights.size()) throw std::invalid_argument("lds_weighted_regression_loss: more weights than rain cells");
    return weighted_l2_loss(m_rain, z, z_pred, w, grad, scale);
}

}  // namespace oya
