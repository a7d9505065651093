#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oya/array.hpp"
#include "oya/dataset.hpp"
#include "oya/kv_text.hpp"

namespace oya {

struct Contingency {
    std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }
    Contingency& operator+=(const Contingency& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        tn += o.tn;
        return *this;
    }
    friend bool operator==(const Contingency&, const Contingency&) = default;
};

/// Per-threshold counts. A default-constructed table with thresholds set and zero counts is the merge identity.
struct ContingencyTable {
    std::vector<double> thresholds;
    std::vector<Contingency> counts;

    static ContingencyTable empty(std::vector<double> thresholds) {
        for (std::size_t i = 1; i < thresholds.size(); ++i)
            if (!(thresholds[i] > thresholds[i - 1])) throw std::invalid_argument("thresholds must be strictly increasing");
        ContingencyTable t;
        t.counts.assign(thresholds.size(), {});
        t.thresholds = std::move(thresholds);
        return t;
    }

    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

inline std::vector<double> standard_thresholds() { return IntensityThresholds{}.as_vector(); }

/// Classifies one valid cell against one threshold; comparisons are >= on both sides.
inline void tally(Contingency& c, double truth, double pred, double threshold) {
    const bool t = truth >= threshold, p = pred >= threshold;
    if (t && p)
        ++c.tp;
    else if (p)
        ++c.fp;
    else if (t)
        ++c.fn;
    else
        ++c.tn;
}

template <class T>
void accumulate_into(ContingencyTable& table, const Plane<std::uint8_t>& m, const Plane<T>& y_true, const Plane<T>& y_pred) {
    if (!m.same_shape(y_true) || !m.same_shape(y_pred)) throw std::invalid_argument("accumulate: shape mismatch");
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.data[i]) continue;
        for (std::size_t k = 0; k < table.thresholds.size(); ++k)
            tally(table.counts[k], y_true.data[i], y_pred.data[i], table.thresholds[k]);
    }
}

/// Contingency counts over m = 1 cells; cells with m = 0 are excluded entirely.
template <class T>
ContingencyTable accumulate(const Plane<std::uint8_t>& m, const Plane<T>& y_true, const Plane<T>& y_pred,
                            std::vector<double> thresholds = standard_thresholds()) {
    auto table = ContingencyTable::empty(std::move(thresholds));
    accumulate_into(table, m, y_true, y_pred);
    return table;
}

inline ContingencyTable merge(const ContingencyTable& a, const ContingencyTable& b) {
    if (a.thresholds != b.thresholds) throw std::invalid_argument("merge: threshold sets differ");
    ContingencyTable out = a;
    for (std::size_t k = 0; k < out.counts.size(); ++k) out.counts[k] += b.counts[k];
    return out;
}

inline ContingencyTable merge(const std::vector<ContingencyTable>& tables) {
    if (tables.empty()) throw std::invalid_argument("merge: no tables");
    ContingencyTable out = tables.front();
    for (std::size_t i = 1; i < tables.size(); ++i) out = merge(out, tables[i]);
    return out;
}

/// nullopt marks a metric whose denominator is zero.
struct Metrics {
    std::optional<double> csi, pod, far, bias;
};

struct MetricReport {
    std::vector<double> thresholds;
    std::vector<Metrics> rows;
    std::vector<Contingency> counts;
};

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

inline Metrics metrics(const Contingency& c) {
    return {ratio(c.tp, c.tp + c.fp + c.fn), ratio(c.tp, c.tp + c.fn), ratio(c.fp, c.tp + c.fp),
            ratio(c.tp + c.fp, c.tp + c.fn)};
}

inline MetricReport metrics(const ContingencyTable& table) {
    MetricReport r{table.thresholds, {}, table.counts};
    for (const auto& c : table.counts) r.rows.push_back(metrics(c));
    return r;
}

inline std::string format_metric(const std::optional<double>& v) { return v ? format_double(*v) : "undefined"; }

inline std::string metric_csv_header() { return "threshold,CSI,POD,FAR,Bias,TP,FP,FN,TN"; }

inline std::string metric_csv_row(double threshold, const Metrics& m, const Contingency& c) {
    std::ostringstream out;
    out << format_double(threshold) << "," << format_metric(m.csi) << "," << format_metric(m.pod) << ","
        << format_metric(m.far) << "," << format_metric(m.bias) << "," << c.tp << "," << c.fp << "," << c.fn << "," << c.tn;
    return out.str();
}

inline std::string metric_csv(const MetricReport& r) {
    std::string out = metric_csv_header() + "\n";
    for (std::size_t k = 0; k < r.rows.size(); ++k) out += metric_csv_row(r.thresholds[k], r.rows[k], r.counts[k]) + "\n";
    return out;
}

/// Per-cell contingency accumulation at one threshold across a stream of pairs on a fixed grid.
/// Memory is one counter set per cell, independent of stream length.
class CsiMap {
public:
    CsiMap(int rows, int cols, double threshold) : threshold_(threshold), cells_(rows, cols) {}

    template <class T>
    void add(const Plane<std::uint8_t>& m, const Plane<T>& y_true, const Plane<T>& y_pred) {
        if (!m.same_shape(cells_) || !m.same_shape(y_true) || !m.same_shape(y_pred))
            throw std::invalid_argument("CsiMap::add: pair is not on the map grid");
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.data[i]) tally(cells_.data[i], y_true.data[i], y_pred.data[i], threshold_);
    }

    /// Adds a pair whose top-left cell sits at (row0, col0) of the map grid.
    template <class T>
    void add_at(int row0, int col0, const Plane<std::uint8_t>& m, const Plane<T>& y_true, const Plane<T>& y_pred) {
        if (!m.same_shape(y_true) || !m.same_shape(y_pred)) throw std::invalid_argument("CsiMap::add_at: shape mismatch");
        if (row0 < 0 || col0 < 0 || row0 + m.rows > cells_.rows || col0 + m.cols > cells_.cols)
            throw std::invalid_argument("CsiMap::add_at: pair extends past the map grid");
        for (int r = 0; r < m.rows; ++r)
            for (int c = 0; c < m.cols; ++c)
                if (m(r, c)) tally(cells_(row0 + r, col0 + c), y_true(r, c), y_pred(r, c), threshold_);
    }

    void merge(const CsiMap& o) {
        if (!o.cells_.same_shape(cells_) || o.threshold_ != threshold_) throw std::invalid_argument("CsiMap::merge: incompatible maps");
        for (std::size_t i = 0; i < cells_.size(); ++i) cells_.data[i] += o.cells_.data[i];
    }

    const Contingency& cell(int r, int c) const { return cells_(r, c); }
    double threshold() const { return threshold_; }

    /// CSI per cell; NaN where undefined.
    Plane<float> csi() const {
        Plane<float> out(cells_.rows, cells_.cols, std::numeric_limits<float>::quiet_NaN());
        for (std::size_t i = 0; i < cells_.size(); ++i)
            if (auto v = metrics(cells_.data[i]).csi) out.data[i] = static_cast<float>(*v);
        return out;
    }

private:
    double threshold_;
    Plane<Contingency> cells_;
};

}  // namespace oya
