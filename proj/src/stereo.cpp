#include "wavestereo/stereo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace ws::stereo {

namespace {

constexpr double kNccVarEpsPerPixel = 1e-10;

// Splits [0, count) across two workers. Outputs must be disjoint per item so
// the result is independent of scheduling.
template <typename Fn>
void parallel_halves(int count, Fn&& fn) {
    if (count < 2 || std::thread::hardware_concurrency() < 2) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    const int mid = count / 2;
    std::thread worker([&] {
        for (int i = 0; i < mid; ++i) fn(i);
    });
    for (int i = mid; i < count; ++i) fn(i);
    worker.join();
}

// Window sum with replicate-clamped sampling over a w x h plane, via padded
// prefix sums; O(1) per output sample.
std::vector<double> box_sum(const std::vector<double>& p, int w, int h, int r) {
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    std::vector<double> prefix(static_cast<std::size_t>(std::max(w, h)) + 2 * r + 1);
    // Horizontal pass.
    for (int y = 0; y < h; ++y) {
        const double* row = p.data() + static_cast<std::size_t>(y) * w;
        prefix[0] = 0.0;
        for (int i = 0; i < w + 2 * r; ++i)
            prefix[i + 1] = prefix[i] + row[std::clamp(i - r, 0, w - 1)];
        double* out = tmp.data() + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) out[x] = prefix[x + 2 * r + 1] - prefix[x];
    }
    // Vertical pass.
    std::vector<double> res(static_cast<std::size_t>(w) * h);
    for (int x = 0; x < w; ++x) {
        prefix[0] = 0.0;
        for (int i = 0; i < h + 2 * r; ++i)
            prefix[i + 1] =
                prefix[i] + tmp[static_cast<std::size_t>(std::clamp(i - r, 0, h - 1)) * w + x];
        for (int y = 0; y < h; ++y)
            res[static_cast<std::size_t>(y) * w + x] = prefix[y + 2 * r + 1] - prefix[y];
    }
    return res;
}

} // namespace

CostMetric cost_metric_from_string(std::string_view s) {
    if (s == "ssd") return CostMetric::SSD;
    if (s == "sad") return CostMetric::SAD;
    if (s == "ncc") return CostMetric::NCC;
    throw ConfigError("unknown cost metric '" + std::string(s) + "'");
}

std::string to_string(CostMetric m) {
    switch (m) {
    case CostMetric::SSD: return "ssd";
    case CostMetric::SAD: return "sad";
    case CostMetric::NCC: return "ncc";
    }
    return "?";
}

CostVolume::CostVolume(int disparities, int height, int width, CostMetric metric,
                       std::vector<float> costs, std::vector<std::uint8_t> flagged,
                       float max_penalty)
    : d_(disparities), h_(height), w_(width), metric_(metric), costs_(std::move(costs)),
      flagged_(std::move(flagged)), max_penalty_(max_penalty) {
    if (d_ < 1 || h_ < 1 || w_ < 1)
        throw DimensionError("CostVolume: dimensions must be >= 1");
    const std::size_t n = static_cast<std::size_t>(d_) * h_ * w_;
    if (costs_.size() != n || flagged_.size() != n)
        throw DimensionError("CostVolume: payload size mismatch");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(costs_[i]) || costs_[i] < 0.0f)
            throw DataError("CostVolume: cost at flat index " + std::to_string(i) +
                            " must be finite and >= 0");
}

void MatchConfig::validate() const {
    if (window < 1 || window % 2 == 0)
        throw DomainError("MatchConfig: window must be odd and >= 1");
    if (d_max < 1) throw DomainError("MatchConfig: d_max must be >= 1");
    if (!(sgm_p1 > 0.0) || !(sgm_p2 >= sgm_p1))
        throw DomainError("MatchConfig: need 0 < P1 <= P2");
    if (paths != 4 && paths != 8) throw DomainError("MatchConfig: paths must be 4 or 8");
    if (!(softmin_temperature > 0.0))
        throw DomainError("MatchConfig: softmin temperature must be > 0");
}

CostVolume build_cost_volume(const Image& left, const Image& right, const MatchConfig& cfg) {
    cfg.validate();
    if (left.width() != right.width() || left.height() != right.height())
        throw DimensionError("build_cost_volume: image dimensions differ");
    const int w = left.width(), h = left.height(), dmax = cfg.d_max;
    if (cfg.window > w || cfg.window > h)
        throw DimensionError("build_cost_volume: window larger than image");
    const int r = cfg.window / 2;
    const double npix = static_cast<double>(cfg.window) * cfg.window;

    const std::size_t total = static_cast<std::size_t>(dmax) * h * w;
    std::vector<float> costs(total, 0.0f);
    std::vector<std::uint8_t> flags(total, 0);

    auto slot = [&](int d, int y, int x) {
        return (static_cast<std::size_t>(y) * w + x) * static_cast<std::size_t>(dmax) + d;
    };

    // Each disparity writes disjoint slots, so the planes may be computed
    // concurrently without affecting the result.
    std::vector<double> max_per_d(static_cast<std::size_t>(dmax), 0.0);
    std::vector<std::uint8_t> any_per_d(static_cast<std::size_t>(dmax), 0);
    parallel_halves(dmax, [&](int d) {
        double max_valid = 0.0;
        bool any_valid = false;
        std::vector<double> pl, pr, pll, prr, plr, diff;
        const int sw = w - d; // overlap strip: x in [d, w)
        if (sw <= 0) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) flags[slot(d, y, x)] = 1;
            return;
        }
        const std::size_t sn = static_cast<std::size_t>(sw) * h;
        if (cfg.metric == CostMetric::NCC) {
            pl.resize(sn);
            pr.resize(sn);
            pll.resize(sn);
            prr.resize(sn);
            plr.resize(sn);
            for (int y = 0; y < h; ++y)
                for (int s = 0; s < sw; ++s) {
                    const double a = left.at(d + s, y);
                    const double b = right.at(s, y);
                    const std::size_t i = static_cast<std::size_t>(y) * sw + s;
                    pl[i] = a;
                    pr[i] = b;
                    pll[i] = a * a;
                    prr[i] = b * b;
                    plr[i] = a * b;
                }
            const auto sl = box_sum(pl, sw, h, r);
            const auto sr = box_sum(pr, sw, h, r);
            const auto sll = box_sum(pll, sw, h, r);
            const auto srr = box_sum(prr, sw, h, r);
            const auto slr = box_sum(plr, sw, h, r);
            for (int y = 0; y < h; ++y)
                for (int s = 0; s < sw; ++s) {
                    const std::size_t i = static_cast<std::size_t>(y) * sw + s;
                    const double var_l = sll[i] - sl[i] * sl[i] / npix;
                    const double var_r = srr[i] - sr[i] * sr[i] / npix;
                    const std::size_t out = slot(d, y, d + s);
                    if (var_l <= kNccVarEpsPerPixel * npix ||
                        var_r <= kNccVarEpsPerPixel * npix) {
                        flags[out] = 1;
                        continue;
                    }
                    const double cov = slr[i] - sl[i] * sr[i] / npix;
                    const double ncc = cov / std::sqrt(var_l * var_r);
                    const double c = std::clamp(1.0 - ncc, 0.0, 2.0);
                    costs[out] = static_cast<float>(c);
                    max_valid = std::max(max_valid, c);
                    any_valid = true;
                }
        } else {
            diff.resize(sn);
            for (int y = 0; y < h; ++y)
                for (int s = 0; s < sw; ++s) {
                    const double e = static_cast<double>(left.at(d + s, y)) - right.at(s, y);
                    diff[static_cast<std::size_t>(y) * sw + s] =
                        cfg.metric == CostMetric::SSD ? e * e : std::abs(e);
                }
            const auto sums = box_sum(diff, sw, h, r);
            for (int y = 0; y < h; ++y)
                for (int s = 0; s < sw; ++s) {
                    const double c = sums[static_cast<std::size_t>(y) * sw + s];
                    costs[slot(d, y, d + s)] = static_cast<float>(c);
                    max_valid = std::max(max_valid, c);
                    any_valid = true;
                }
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < d; ++x) flags[slot(d, y, x)] = 1;
        max_per_d[static_cast<std::size_t>(d)] = max_valid;
        any_per_d[static_cast<std::size_t>(d)] = any_valid ? 1 : 0;
    });

    double max_valid = 0.0;
    bool any_valid = false;
    for (int d = 0; d < dmax; ++d) {
        max_valid = std::max(max_valid, max_per_d[static_cast<std::size_t>(d)]);
        any_valid = any_valid || any_per_d[static_cast<std::size_t>(d)] != 0;
    }

    const float penalty = cfg.metric == CostMetric::NCC ? 2.0f
                          : any_valid                   ? static_cast<float>(max_valid)
                                                        : 1.0f;
    for (std::size_t i = 0; i < total; ++i)
        if (flags[i]) costs[i] = penalty;
    return CostVolume(dmax, h, w, cfg.metric, std::move(costs), std::move(flags), penalty);
}

CostVolume normalize_mean(const CostVolume& cv) {
    double sum = 0.0;
    std::size_t count = 0;
    const std::size_t n = cv.costs().size();
    for (std::size_t i = 0; i < n; ++i) {
        if (cv.flags()[i]) continue;
        sum += cv.costs()[i];
        ++count;
    }
    if (count == 0 || sum <= 0.0) return cv; // nothing to scale
    const double scale = static_cast<double>(count) / sum;
    std::vector<float> costs(n);
    for (std::size_t i = 0; i < n; ++i)
        costs[i] = static_cast<float>(cv.costs()[i] * scale);
    return CostVolume(cv.disparities(), cv.height(), cv.width(), cv.metric(),
                      std::move(costs),
                      std::vector<std::uint8_t>(cv.flags().begin(), cv.flags().end()),
                      static_cast<float>(cv.max_penalty() * scale));
}

DisparityMap wta_disparity(const CostVolume& cv) {
    const int w = cv.width(), h = cv.height(), dmax = cv.disparities();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<float> vals(n, 0.0f);
    std::vector<std::uint8_t> mask(n, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int best = -1;
            float best_cost = std::numeric_limits<float>::infinity();
            for (int d = 0; d < dmax; ++d) {
                if (cv.flagged(d, y, x)) continue;
                const float c = cv.cost(d, y, x);
                if (c < best_cost) { // strict: ties keep the smaller disparity
                    best_cost = c;
                    best = d;
                }
            }
            if (best < 0) continue;
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            vals[i] = static_cast<float>(best);
            mask[i] = 1;
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

std::vector<float> sgm_aggregate_path(const CostVolume& cv, int dx, int dy, double p1,
                                      double p2) {
    if ((dx == 0 && dy == 0) || dx < -1 || dx > 1 || dy < -1 || dy > 1)
        throw DomainError("sgm_aggregate_path: direction components must be in {-1,0,1}");
    const int w = cv.width(), h = cv.height(), dmax = cv.disparities();
    std::vector<float> L(cv.costs().size());
    const float* cost = cv.costs().data();
    float* out = L.data();
    const float fp1 = static_cast<float>(p1), fp2 = static_cast<float>(p2);

    const int y0 = dy >= 0 ? 0 : h - 1, y1 = dy >= 0 ? h : -1, ys = dy >= 0 ? 1 : -1;
    const int x0 = dx >= 0 ? 0 : w - 1, x1 = dx >= 0 ? w : -1, xs = dx >= 0 ? 1 : -1;

    // Minimum over disparities of the predecessor L, maintained while writing
    // so no second scan over the disparity axis is needed. The predecessor
    // lives either in the current row (horizontal component) or the
    // previously finished row, so two row buffers suffice.
    std::vector<float> prev_row_min(static_cast<std::size_t>(w));
    std::vector<float> cur_row_min(static_cast<std::size_t>(w));

    for (int y = y0; y != y1; y += ys) {
        for (int x = x0; x != x1; x += xs) {
            const std::size_t p =
                (static_cast<std::size_t>(y) * w + x) * static_cast<std::size_t>(dmax);
            const int qx = x - dx, qy = y - dy;
            float cur_min = std::numeric_limits<float>::infinity();
            if (qx < 0 || qx >= w || qy < 0 || qy >= h) {
                for (int d = 0; d < dmax; ++d) {
                    out[p + d] = cost[p + d];
                    cur_min = std::min(cur_min, out[p + d]);
                }
                cur_row_min[static_cast<std::size_t>(x)] = cur_min;
                continue;
            }
            const std::size_t q =
                (static_cast<std::size_t>(qy) * w + qx) * static_cast<std::size_t>(dmax);
            const float minq = qy == y ? cur_row_min[static_cast<std::size_t>(qx)]
                                       : prev_row_min[static_cast<std::size_t>(qx)];
            const float jump = minq + fp2;
            const float* Lq = out + q;
            for (int d = 0; d < dmax; ++d) {
                float best = Lq[d];
                if (d > 0) best = std::min(best, Lq[d - 1] + fp1);
                if (d + 1 < dmax) best = std::min(best, Lq[d + 1] + fp1);
                best = std::min(best, jump);
                const float v = cost[p + d] + best - minq;
                out[p + d] = v;
                cur_min = std::min(cur_min, v);
            }
            cur_row_min[static_cast<std::size_t>(x)] = cur_min;
        }
        std::swap(prev_row_min, cur_row_min);
    }
    return L;
}

CostVolume sgm_aggregate(const CostVolume& cv, const MatchConfig& cfg) {
    cfg.validate();
    static constexpr int kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1},
                                        {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    const std::size_t n = cv.costs().size();
    std::vector<float> agg(n, 0.0f);
    // Paths are independent sweeps; run them two at a time and sum the
    // results in fixed path order so the output never depends on scheduling.
    for (int p = 0; p < cfg.paths; p += 2) {
        std::vector<float> a, b;
        const bool pair = p + 1 < cfg.paths;
        std::thread worker([&] {
            a = sgm_aggregate_path(cv, kDirs[p][0], kDirs[p][1], cfg.sgm_p1, cfg.sgm_p2);
        });
        if (pair)
            b = sgm_aggregate_path(cv, kDirs[p + 1][0], kDirs[p + 1][1], cfg.sgm_p1,
                                   cfg.sgm_p2);
        worker.join();
        for (std::size_t i = 0; i < n; ++i) agg[i] += a[i];
        if (pair)
            for (std::size_t i = 0; i < n; ++i) agg[i] += b[i];
    }
    float max_cost = 0.0f;
    for (float c : agg) max_cost = std::max(max_cost, c);
    return CostVolume(cv.disparities(), cv.height(), cv.width(), cv.metric(), std::move(agg),
                      std::vector<std::uint8_t>(cv.flags().begin(), cv.flags().end()),
                      max_cost);
}

DisparityMap soft_argmin(const CostVolume& cv, double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw DomainError("soft_argmin: temperature must be > 0");
    const int w = cv.width(), h = cv.height(), dmax = cv.disparities();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<float> vals(n, 0.0f);
    std::vector<std::uint8_t> mask(n, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double min_cost = std::numeric_limits<double>::infinity();
            for (int d = 0; d < dmax; ++d)
                if (!cv.flagged(d, y, x)) min_cost = std::min<double>(min_cost, cv.cost(d, y, x));
            if (!std::isfinite(min_cost)) continue; // every hypothesis flagged
            double wsum = 0.0, dsum = 0.0;
            for (int d = 0; d < dmax; ++d) {
                if (cv.flagged(d, y, x)) continue;
                const double p = std::exp(-(cv.cost(d, y, x) - min_cost) / temperature);
                wsum += p;
                dsum += p * d;
            }
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            vals[i] = static_cast<float>(dsum / wsum);
            mask[i] = 1;
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

DisparityMap subpixel_refine(const CostVolume& cv, const DisparityMap& disp) {
    if (disp.width() != cv.width() || disp.height() != cv.height())
        throw DimensionError("subpixel_refine: disparity/volume dimensions differ");
    const int w = cv.width(), h = cv.height(), dmax = cv.disparities();
    std::vector<float> vals(disp.values().begin(), disp.values().end());
    std::vector<std::uint8_t> mask(disp.mask().begin(), disp.mask().end());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disp.valid(x, y)) continue;
            const int d = static_cast<int>(std::lround(disp.value(x, y)));
            if (d <= 0 || d >= dmax - 1) continue; // boundary disparities stay integer
            const double cm = cv.cost(d - 1, y, x);
            const double c0 = cv.cost(d, y, x);
            const double cp = cv.cost(d + 1, y, x);
            const double curvature = cm + cp - 2.0 * c0;
            if (curvature <= 0.0) continue; // flat or non-convex neighborhood
            const double offset = std::clamp((cm - cp) / (2.0 * curvature), -0.5, 0.5);
            vals[disp.idx(x, y)] = static_cast<float>(d + offset);
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

DisparityMap lr_consistency(const DisparityMap& disp_left, const DisparityMap& disp_right,
                            double tol) {
    if (disp_left.width() != disp_right.width() ||
        disp_left.height() != disp_right.height())
        throw DimensionError("lr_consistency: map dimensions differ");
    const int w = disp_left.width(), h = disp_left.height();
    std::vector<float> vals(disp_left.values().begin(), disp_left.values().end());
    std::vector<std::uint8_t> mask(disp_left.mask().begin(), disp_left.mask().end());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disp_left.valid(x, y)) continue;
            const double dl = disp_left.value(x, y);
            const int xr = static_cast<int>(std::lround(x - dl));
            double diff = std::numeric_limits<double>::infinity();
            if (xr >= 0 && xr < w && disp_right.valid(xr, y))
                diff = std::abs(dl - disp_right.value(xr, y));
            if (diff > tol) mask[disp_left.idx(x, y)] = 0;
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

DepthMap disparity_to_depth(const DisparityMap& disp, const StereoRig& rig, double eps_d) {
    const int w = disp.width(), h = disp.height();
    const double fb = rig.intrinsics.fx * rig.baseline;
    std::vector<float> vals(static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disp.valid(x, y)) continue;
            const double d = disp.value(x, y);
            if (d <= eps_d) continue;
            const double z = fb / d;
            if (z < rig.min_depth || z > rig.max_depth) continue;
            const std::size_t i = disp.idx(x, y);
            vals[i] = static_cast<float>(z);
            mask[i] = 1;
        }
    return DepthMap(w, h, std::move(vals), std::move(mask));
}

DisparityMap depth_to_disparity(const DepthMap& depth, const StereoRig& rig) {
    const int w = depth.width(), h = depth.height();
    const double fb = rig.intrinsics.fx * rig.baseline;
    std::vector<float> vals(static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!depth.valid(x, y)) continue;
            const double z = depth.value(x, y);
            if (z < rig.min_depth || z > rig.max_depth) continue;
            const std::size_t i = depth.idx(x, y);
            vals[i] = static_cast<float>(fb / z);
            mask[i] = 1;
        }
    return DisparityMap(w, h, std::move(vals), std::move(mask));
}

} // namespace ws::stereo
