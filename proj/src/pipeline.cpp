#include "wavestereo/pipeline.hpp"

#include <cmath>

namespace ws::pipeline {

Image hflip(const Image& img) {
    const int w = img.width(), h = img.height();
    std::vector<float> out(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out[static_cast<std::size_t>(y) * w + x] = img.at(w - 1 - x, y);
    return Image(w, h, std::move(out));
}

DisparityMap hflip(const DisparityMap& disp) {
    const int w = disp.width(), h = disp.height();
    std::vector<float> vals(disp.values().size());
    std::vector<std::uint8_t> mask(disp.mask().size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            vals[i] = disp.value(w - 1 - x, y);
            mask[i] = disp.valid(w - 1 - x, y) ? 1 : 0;
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

DisparityMap compute_disparity(const Image& left, const Image& right,
                               const MatchOptions& opts) {
    Image l = left, r = right;
    if (opts.wt_params || opts.wt_levels > 0) {
        const wavelet::WtConvParams params =
            opts.wt_params ? *opts.wt_params : wavelet::WtConvParams::identity(opts.wt_levels);
        l = wavelet::wtconv_forward(l, params);
        r = wavelet::wtconv_forward(r, params);
    }
    stereo::CostVolume cv = stereo::normalize_mean(stereo::build_cost_volume(l, r, opts.match));
    if (opts.use_sgm) cv = stereo::sgm_aggregate(cv, opts.match);
    if (opts.estimator == MatchOptions::Estimator::SoftArgmin)
        return stereo::soft_argmin(cv, opts.match.softmin_temperature);
    DisparityMap d = stereo::wta_disparity(cv);
    if (opts.subpixel) d = stereo::subpixel_refine(cv, d);
    return d;
}

MatchResult match_stereo(const Image& left, const Image& right, const StereoRig& rig,
                         MatchOptions opts) {
    opts.match.d_max = rig.max_disparity;
    DisparityMap disp = compute_disparity(left, right, opts);
    if (opts.lr_check) {
        // Right-reference disparity by mirroring: matching hflip(right) against
        // hflip(left) searches the negated warp direction.
        const DisparityMap disp_right =
            hflip(compute_disparity(hflip(right), hflip(left), opts));
        disp = stereo::lr_consistency(disp, disp_right, opts.lr_tol);
    }
    return MatchResult{disp, stereo::disparity_to_depth(disp, rig)};
}

DepthMap depth_from_image(const Image& img) {
    const std::size_t n = img.size();
    std::vector<float> vals(img.data().begin(), img.data().end());
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (vals[i] > 0.0f) mask[i] = 1;
    return DepthMap(img.width(), img.height(), std::move(vals), std::move(mask));
}

Image image_from_depth(const DepthMap& depth) {
    std::vector<float> vals(depth.values().begin(), depth.values().end());
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (!depth.mask()[i]) vals[i] = 0.0f;
    return Image(depth.width(), depth.height(), std::move(vals));
}

DisparityMap disparity_from_image(const Image& img) {
    const std::size_t n = img.size();
    std::vector<float> vals(img.data().begin(), img.data().end());
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (vals[i] >= 0.0f) mask[i] = 1;
        else vals[i] = 0.0f;
    }
    return DisparityMap(img.width(), img.height(), std::move(vals), std::move(mask));
}

Image image_from_disparity(const DisparityMap& disp) {
    std::vector<float> vals(disp.values().begin(), disp.values().end());
    for (std::size_t i = 0; i < vals.size(); ++i)
        if (!disp.mask()[i]) vals[i] = -1.0f;
    return Image(disp.width(), disp.height(), std::move(vals));
}

} // namespace ws::pipeline
