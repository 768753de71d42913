#include "wavestereo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ws::metrics {

DepthMetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double clip_min,
                                 double clip_max) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionError("depth_metrics: map dimensions differ");
    if (!(clip_min > 0.0) || !(clip_min < clip_max))
        throw DomainError("depth_metrics: need 0 < clip_min < clip_max");

    double abs_rel = 0.0, sq_rel = 0.0, sq = 0.0, lg = 0.0;
    std::size_t n = 0, d1 = 0, d2 = 0, d3 = 0;
    const std::size_t total = pred.values().size();
    for (std::size_t i = 0; i < total; ++i) {
        if (!pred.mask()[i] || !gt.mask()[i]) continue;
        const double g = gt.values()[i];
        if (g < clip_min || g > clip_max) continue;
        const double p = pred.values()[i];
        const double diff = std::abs(p - g);
        abs_rel += diff / g;
        sq_rel += diff * diff / g;
        sq += diff * diff;
        lg += std::abs(std::log10(p) - std::log10(g));
        const double ratio = std::max(p / g, g / p);
        if (ratio < 1.25) ++d1;
        if (ratio < 1.25 * 1.25) ++d2;
        if (ratio < 1.25 * 1.25 * 1.25) ++d3;
        ++n;
    }
    if (n == 0)
        throw DegenerateInputError("depth_metrics: no jointly valid pixels in clip range");
    const double inv = 1.0 / static_cast<double>(n);
    DepthMetricsReport r;
    r.abs_rel = abs_rel * inv;
    r.sq_rel = sq_rel * inv;
    r.rmse = std::sqrt(sq * inv);
    r.log10 = lg * inv;
    r.delta1 = static_cast<double>(d1) * inv;
    r.delta2 = static_cast<double>(d2) * inv;
    r.delta3 = static_cast<double>(d3) * inv;
    r.n_valid = n;
    return r;
}

AngularErrorMap angular_error_map(const NormalMap& pred, const NormalMap& gt) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionError("angular_error_map: map dimensions differ");
    const std::size_t n = pred.mask().size();
    AngularErrorMap out;
    out.width = pred.width();
    out.height = pred.height();
    out.degrees.assign(n, 0.0f);
    out.mask.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!pred.mask()[i] || !gt.mask()[i]) continue;
        double dot = 0.0;
        for (int c = 0; c < 3; ++c)
            dot += static_cast<double>(pred.vectors()[3 * i + c]) * gt.vectors()[3 * i + c];
        dot = std::clamp(dot, -1.0, 1.0);
        out.degrees[i] = static_cast<float>(std::acos(dot) * 180.0 / std::numbers::pi);
        out.mask[i] = 1;
    }
    return out;
}

NormalMetricsReport normal_metrics(const NormalMap& pred, const NormalMap& gt) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionError("normal_metrics: map dimensions differ");
    // Angles in full double precision (the float map is for visualization).
    std::vector<double> angles;
    const std::size_t n = pred.mask().size();
    angles.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!pred.mask()[i] || !gt.mask()[i]) continue;
        double dot = 0.0;
        for (int c = 0; c < 3; ++c)
            dot += static_cast<double>(pred.vectors()[3 * i + c]) * gt.vectors()[3 * i + c];
        angles.push_back(std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / std::numbers::pi);
    }
    if (angles.empty())
        throw DegenerateInputError("normal_metrics: no jointly valid pixels");

    double mean = 0.0, sq = 0.0;
    std::size_t a = 0, b = 0, c = 0;
    for (double t : angles) {
        mean += t;
        sq += t * t;
        if (t < 11.25) ++a;
        if (t < 22.5) ++b;
        if (t < 30.0) ++c;
    }
    const double inv = 1.0 / static_cast<double>(angles.size());

    // Lower median for even counts: deterministic and documented.
    std::vector<double> sorted = angles;
    std::nth_element(sorted.begin(), sorted.begin() + (sorted.size() - 1) / 2, sorted.end());

    NormalMetricsReport r;
    r.mean_deg = mean * inv;
    r.median_deg = sorted[(sorted.size() - 1) / 2];
    r.rmse_deg = std::sqrt(sq * inv);
    r.pct_11_25 = static_cast<double>(a) * inv;
    r.pct_22_5 = static_cast<double>(b) * inv;
    r.pct_30 = static_cast<double>(c) * inv;
    r.n_valid = angles.size();
    return r;
}

} // namespace ws::metrics
