#pragma once

// Central-difference gradient checks shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "oya/nn.hpp"

namespace oya::testing {

struct GradCheck {
    int checked = 0;
    double max_rel_error = 0.0;
    double max_abs_grad = 0.0;
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps coordinates with vanishing gradient from
/// turning round-off into a large relative error.
inline double rel_error(double analytic, double numeric, double floor = 1e-6) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

/// Compares analytic gradients against central differences on `samples` coordinates drawn
/// uniformly over all parameters (every coordinate when samples exceeds the parameter count).
inline GradCheck check_params(nn::ParamSet<double>& ps, const nn::Gradients<double>& analytic,
                              const std::function<double()>& loss, int samples, std::uint64_t seed, double h = 1e-5) {
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = 0; j < ps[i].size(); ++j) coords.emplace_back(i, j);
    if (samples < static_cast<int>(coords.size())) {
        std::mt19937_64 rng(seed);
        std::shuffle(coords.begin(), coords.end(), rng);
        coords.resize(static_cast<std::size_t>(samples));
    }
    GradCheck out;
    for (auto [i, j] : coords) {
        double& v = ps[i].value[j];
        const double keep = v;
        v = keep + h;
        const double up = loss();
        v = keep - h;
        const double down = loss();
        v = keep;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic.g[i][j];
        out.max_rel_error = std::max(out.max_rel_error, rel_error(a, numeric));
        out.max_abs_grad = std::max(out.max_abs_grad, std::abs(a));
        ++out.checked;
    }
    return out;
}

/// Same check for a plain vector of inputs.
inline GradCheck check_vector(std::vector<double>& x, const std::vector<double>& analytic,
                              const std::function<double()>& loss, double h = 1e-5) {
    GradCheck out;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double keep = x[j];
        x[j] = keep + h;
        const double up = loss();
        x[j] = keep - h;
        const double down = loss();
        x[j] = keep;
        out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic[j], (up - down) / (2 * h)));
        out.max_abs_grad = std::max(out.max_abs_grad, std::abs(analytic[j]));
        ++out.checked;
    }
    return out;
}

}  // namespace oya::testing
