#pragma once

#include <optional>

#include "wavestereo/core.hpp"
#include "wavestereo/stereo.hpp"
#include "wavestereo/wavelet.hpp"

namespace ws::pipeline {

/// End-to-end matching options: cost metric and window, optional
/// wavelet-enhanced preprocessing, SGM aggregation on the mean-normalized
/// volume, disparity selection, sub-pixel refinement and the left-right check.
struct MatchOptions {
    stereo::MatchConfig match;
    bool use_sgm = true;
    enum class Estimator { Wta, SoftArgmin };
    Estimator estimator = Estimator::Wta;
    bool subpixel = true; // applies to the WTA path only
    bool lr_check = true;
    double lr_tol = 1.0;
    // Wavelet-enhanced preprocessing of both views: identity kernels at this
    // many levels (0 disables), or fully custom parameters.
    int wt_levels = 0;
    std::optional<wavelet::WtConvParams> wt_params;
};

struct MatchResult {
    DisparityMap disparity;
    DepthMap depth;
};

Image hflip(const Image& img);
DisparityMap hflip(const DisparityMap& disp);

/// Left-view disparity for a rectified pair (no depth conversion).
DisparityMap compute_disparity(const Image& left, const Image& right,
                               const MatchOptions& opts);

/// Full pipeline: disparity (with optional left-right occlusion masking, the
/// right map computed by swapping roles on mirrored images) followed by the
/// depth conversion D = fx * B / d.
MatchResult match_stereo(const Image& left, const Image& right, const StereoRig& rig,
                         MatchOptions opts);

/// Map conversions for PFM interchange: depth uses value > 0 as valid
/// (invalid pixels store 0), disparity uses value >= 0 (invalid pixels store
/// -1).
DepthMap depth_from_image(const Image& img);
Image image_from_depth(const DepthMap& depth);
DisparityMap disparity_from_image(const Image& img);
Image image_from_disparity(const DisparityMap& disp);

} // namespace ws::pipeline
