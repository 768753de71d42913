#pragma once

#include <vector>

#include "wavestereo/core.hpp"

namespace ws::metrics {

/// Depth evaluation statistics over jointly valid pixels after ground-truth
/// range clipping. Thresholds delta_i use the strict inequality
/// max(pred/gt, gt/pred) < 1.25^i.
struct DepthMetricsReport {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;  // meters
    double log10 = 0.0;
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    std::size_t n_valid = 0;
};

/// Angular statistics of a normal comparison, in degrees, plus the strict
/// sub-threshold fractions.
struct NormalMetricsReport {
    double mean_deg = 0.0;
    double median_deg = 0.0; // lower median for even counts
    double rmse_deg = 0.0;
    double pct_11_25 = 0.0;
    double pct_22_5 = 0.0;
    double pct_30 = 0.0;
    std::size_t n_valid = 0;
};

/// Evaluates predicted depth against ground truth. Pixels are used when both
/// maps are valid and the ground-truth depth lies inside [clip_min, clip_max].
DepthMetricsReport depth_metrics(const DepthMap& pred, const DepthMap& gt, double clip_min,
                                 double clip_max);

/// Per-pixel angular error in degrees, arccos of the clamped dot product.
/// Mask is the intersection of both inputs' masks.
struct AngularErrorMap {
    int width = 0, height = 0;
    std::vector<float> degrees;
    std::vector<std::uint8_t> mask;
};

AngularErrorMap angular_error_map(const NormalMap& pred, const NormalMap& gt);

NormalMetricsReport normal_metrics(const NormalMap& pred, const NormalMap& gt);

} // namespace ws::metrics
