#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wavestereo/core.hpp"

namespace ws::stereo {

enum class CostMetric { SSD, SAD, NCC };

CostMetric cost_metric_from_string(std::string_view s);
std::string to_string(CostMetric m);

/// Per-pixel, per-disparity matching costs, disparity-contiguous layout
/// ((y * W + x) * D + d). All costs are finite and non-negative; entries whose
/// warp left the right image (or whose NCC window was degenerate) carry the
/// volume's max penalty and are flagged.
class CostVolume {
public:
    CostVolume(int disparities, int height, int width, CostMetric metric,
               std::vector<float> costs, std::vector<std::uint8_t> flagged,
               float max_penalty);

    int disparities() const noexcept { return d_; }
    int height() const noexcept { return h_; }
    int width() const noexcept { return w_; }
    CostMetric metric() const noexcept { return metric_; }
    float max_penalty() const noexcept { return max_penalty_; }

    float cost(int d, int y, int x) const { return costs_[idx(d, y, x)]; }
    bool flagged(int d, int y, int x) const { return flagged_[idx(d, y, x)] != 0; }

    std::span<const float> costs() const noexcept { return costs_; }
    std::span<const std::uint8_t> flags() const noexcept { return flagged_; }

    std::size_t idx(int d, int y, int x) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(d_) +
               static_cast<std::size_t>(d);
    }

private:
    int d_ = 0, h_ = 0, w_ = 0;
    CostMetric metric_ = CostMetric::SAD;
    std::vector<float> costs_;
    std::vector<std::uint8_t> flagged_;
    float max_penalty_ = 0.0f;
};

/// Matching configuration. Default penalties assume a volume normalized to
/// mean cost 1 (see normalize_mean): on such volumes well-matched costs sit
/// near 0.05-0.3, so the penalties must live at that scale to regularize
/// without flattening sub-pixel structure.
struct MatchConfig {
    CostMetric metric = CostMetric::SAD;
    int window = 7;  // odd; window 1 degenerates to per-pixel differences
    int d_max = 64;  // number of disparity hypotheses (d in [0, d_max))
    double sgm_p1 = 0.1;
    double sgm_p2 = 0.4;
    int paths = 8; // 4 or 8
    double softmin_temperature = 1.0;

    void validate() const;
};

/// cost(d, y, x) = window dissimilarity between the left patch at (x, y) and
/// the right patch at (x - d, y). Window samples clamp to the image; pixels
/// whose correspondence x - d falls outside the right image are flagged. NCC
/// is stored as 1 - ncc in [0, 2]; windows with degenerate variance are
/// flagged at the max penalty.
CostVolume build_cost_volume(const Image& left, const Image& right, const MatchConfig& cfg);

/// Scales costs so the mean over non-flagged entries is 1 (flagged entries are
/// rescaled by the same factor). Makes the default SGM penalties
/// metric-independent.
CostVolume normalize_mean(const CostVolume& cv);

/// Per-pixel argmin over disparity, ties broken toward the smaller disparity.
/// Pixels with no unflagged hypothesis are masked invalid.
DisparityMap wta_disparity(const CostVolume& cv);

/// One directional dynamic-programming pass of semi-global aggregation:
///   L(p, d) = C(p, d) + min(L(q, d), L(q, d +- 1) + P1, min_k L(q, k) + P2)
///           - min_k L(q, k)
/// along direction (dx, dy), where q is the previous pixel on the path.
/// Exposed for tests; sgm_aggregate sums 4 or 8 of these in a fixed order.
std::vector<float> sgm_aggregate_path(const CostVolume& cv, int dx, int dy, double p1,
                                      double p2);

CostVolume sgm_aggregate(const CostVolume& cv, const MatchConfig& cfg);

/// Softmax-weighted expected disparity per pixel:
///   d* = sum_d d * softmax_d(-cost / temperature).
/// Always lies in [0, D-1]. Pixels with every hypothesis flagged are masked.
DisparityMap soft_argmin(const CostVolume& cv, double temperature);

/// Parabola fit through the costs at (d-1, d, d+1) around each integer WTA
/// disparity; the vertex offset is clamped to [-0.5, 0.5]. Boundary
/// disparities (0 and D-1) are left unrefined.
DisparityMap subpixel_refine(const CostVolume& cv, const DisparityMap& disp);

/// Masks left-map pixels whose round-trip disparity disagrees:
/// |d_L(x) - d_R(x - d_L(x))| > tol, or whose correspondence is invalid or out
/// of bounds (treated as an infinite difference).
DisparityMap lr_consistency(const DisparityMap& disp_left, const DisparityMap& disp_right,
                            double tol);

/// D = fx * baseline / d. Pixels with d below eps_d, or depth outside the
/// rig's [min_depth, max_depth], are masked invalid rather than erroring.
DepthMap disparity_to_depth(const DisparityMap& disp, const StereoRig& rig,
                            double eps_d = 1e-6);

/// d = fx * baseline / D, masking depths outside the rig range.
DisparityMap depth_to_disparity(const DepthMap& depth, const StereoRig& rig);

} // namespace ws::stereo
