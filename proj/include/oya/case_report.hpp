#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "oya/binary_io.hpp"
#include "oya/eval.hpp"
#include "oya/grid.hpp"
#include "oya/raster_image.hpp"

namespace oya {

/// Everything needed to show one overpass: the fields, their images and a metric table per product.
struct CaseReport {
    std::map<std::string, Plane<float>> fields;  // includes "truth" (NaN off-swath)
    std::map<std::string, MetricReport> metrics;
    std::map<std::string, std::string> images;  // P6 pixmaps, includes "scene" and "truth"
};

inline CaseReport case_report(const GeoScene& scene, const GriddedPair& pair,
                              const std::map<std::string, Plane<float>>& predictions_by_product,
                              std::vector<double> thresholds = standard_thresholds()) {
    if (pair.y.rows != scene.grid.rows || pair.y.cols != scene.grid.cols)
        throw std::invalid_argument("case_report: pair is not on the scene window");
    CaseReport rep;
    Plane<float> truth = pair.y;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (!pair.m.data[i]) truth.data[i] = std::numeric_limits<float>::quiet_NaN();
    for (const auto& [name, field] : predictions_by_product) {
        if (name == "truth" || name == "scene") throw std::invalid_argument("case_report: reserved product name " + name);
        if (!field.same_shape(pair.y)) throw std::invalid_argument("case_report: product " + name + " is not on the scene window");
        rep.fields[name] = field;
        rep.metrics[name] = metrics(accumulate(pair.m, pair.y, field, thresholds));
        rep.images[name] = render_ppm(field, rate_color);
    }
    rep.images["truth"] = render_ppm(truth, rate_color);
    rep.fields["truth"] = std::move(truth);
    const int C = scene.data.channels;
    rep.images["scene"] = render_false_color(scene.data, {0, C > 1 ? 1 : 0, C - 1});
    return rep;
}

inline void write_case_report(const std::filesystem::path& dir, const CaseReport& rep) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, field] : rep.fields) {
        ArrayWriter w;
        w.write(field);
        w.save((dir / (name + ".f32")).string());
    }
    for (const auto& [name, img] : rep.images) {
        std::ofstream out(dir / (name + ".ppm"), std::ios::binary | std::ios::trunc);
        out.write(img.data(), static_cast<std::streamsize>(img.size()));
    }
    std::ofstream csv(dir / "metrics.csv", std::ios::trunc);
    csv << "product," << metric_csv_header() << "\n";
    for (const auto& [name, r] : rep.metrics)
        for (std::size_t k = 0; k < r.rows.size(); ++k)
            csv << name << "," << metric_csv_row(r.thresholds[k], r.rows[k], r.counts[k]) << "\n";
}

}  // namespace oya
