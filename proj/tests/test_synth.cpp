#include <doctest.h>

#include <cmath>

#include "wavestereo/geometry.hpp"
#include "wavestereo/metrics.hpp"
#include "wavestereo/config.hpp"
#include "wavestereo/pipeline.hpp"
#include "wavestereo/rng.hpp"
#include "wavestereo/synth.hpp"
#include "wavestereo/wavelet.hpp"

using namespace ws;
using namespace ws::synth;

namespace {

SceneSpec base_spec(SceneKind kind, int size = 64) {
    SceneSpec spec;
    spec.kind = kind;
    spec.width = size;
    spec.height = size;
    spec.rig = StereoRig(CameraIntrinsics(150.0, 150.0, (size - 1) / 2.0, (size - 1) / 2.0),
                         0.25, 64, 0.5, 15.0);
    return spec;
}

} // namespace

TEST_CASE("gen_scene fronto plane") {
    SceneSpec spec = base_spec(SceneKind::FrontoPlane);
    spec.plane_c = 5.0;
    const SynthScene s = gen_scene(spec);
    const double d0 = 150.0 * 0.25 / 5.0; // fx b / z = 7.5 px
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            CHECK(s.depth_gt.value(x, y) == doctest::Approx(5.0));
            CHECK(s.normal_gt.nz(x, y) == doctest::Approx(-1.0));
            CHECK(s.disparity_gt.value(x, y) == doctest::Approx(d0).epsilon(1e-6));
        }
}

TEST_CASE("gen_scene inclined plane matches the closed forms") {
    SceneSpec spec = base_spec(SceneKind::InclinedPlane);
    spec.plane_a = 0.5;
    spec.plane_c = 5.0;
    const SynthScene s = gen_scene(spec);
    const double norm = std::sqrt(1.25);
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            const double want = 5.0 / (1.0 - 0.5 * (x - 31.5) / 150.0);
            CHECK(s.depth_gt.value(x, y) == doctest::Approx(want).epsilon(1e-6));
            CHECK(s.normal_gt.nx(x, y) == doctest::Approx(0.5 / norm).epsilon(1e-6));
            CHECK(s.normal_gt.nz(x, y) == doctest::Approx(-1.0 / norm).epsilon(1e-6));
        }
    // d = fx * B / Z identity between generated depth and disparity
    for (int x = 0; x < 64; ++x)
        CHECK(s.disparity_gt.value(x, 3) ==
              doctest::Approx(150.0 * 0.25 / s.depth_gt.value(x, 3)).epsilon(1e-6));
}

TEST_CASE("gen_scene rejects out-of-range surfaces") {
    SceneSpec spec = base_spec(SceneKind::FrontoPlane);
    spec.plane_c = 20.0; // beyond max_depth
    CHECK_THROWS_AS(gen_scene(spec), DomainError);
    spec.plane_c = 0.1;
    CHECK_THROWS_AS(gen_scene(spec), DomainError);
}

TEST_CASE("gen_scene fbm terrain is deterministic per seed") {
    SceneSpec spec = base_spec(SceneKind::FbmTerrain);
    spec.fbm_base_depth = 6.0;
    spec.fbm_amplitude = 0.8;
    spec.seed = 99;
    const SynthScene a = gen_scene(spec);
    const SynthScene b = gen_scene(spec);
    for (std::size_t i = 0; i < a.depth_gt.values().size(); ++i)
        CHECK(a.depth_gt.values()[i] == b.depth_gt.values()[i]);
    spec.seed = 100;
    const SynthScene c = gen_scene(spec);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.depth_gt.values().size(); ++i)
        any_diff |= a.depth_gt.values()[i] != c.depth_gt.values()[i];
    CHECK(any_diff);
}

TEST_CASE("analytic normals agree with the plane-fit operator on smooth scenes") {
    SceneSpec spec = base_spec(SceneKind::InclinedPlane, 96);
    spec.plane_a = 0.3;
    spec.plane_c = 5.0;
    const SynthScene s = gen_scene(spec);
    const NormalMap fitted =
        geometry::normals_from_depth(s.depth_gt, spec.rig.intrinsics, 5);
    const metrics::NormalMetricsReport r = metrics::normal_metrics(fitted, s.normal_gt);
    CHECK(r.mean_deg < 1.0);
}

TEST_CASE("render_stereo") {
    SUBCASE("zero-disparity scene renders identical views with no occlusion") {
        SceneSpec spec = base_spec(SceneKind::FrontoPlane);
        spec.plane_c = 5.0;
        SynthScene s = gen_scene(spec);
        // Degenerate no-parallax limit, constructed directly.
        s.disparity_gt = DisparityMap(
            64, 64, std::vector<float>(64 * 64, 0.0f), std::vector<std::uint8_t>(64 * 64, 1));
        render_stereo(s, spec.texture);
        for (std::size_t i = 0; i < s.left.size(); ++i)
            CHECK(s.left.data()[i] == s.right.data()[i]);
        for (std::uint8_t o : s.occlusion) CHECK(o == 0);
    }
    SUBCASE("integer-disparity fronto plane: right is an exact shift of left") {
        SceneSpec spec = base_spec(SceneKind::FrontoPlane);
        spec.plane_c = 5.0; // d0 = 150 * 0.25 / 5 = 7.5 -> use baseline 0.2 for 6 px
        spec.rig = StereoRig(spec.rig.intrinsics, 0.2, 64, 0.5, 15.0); // d0 = 6.0
        SynthScene s = gen_scene(spec);
        render_stereo(s, spec.texture);
        const int d0 = 6;
        for (int y = 0; y < 64; ++y)
            for (int x = d0; x < 64; ++x)
                CHECK(s.right.at(x - d0, y) == s.left.at(x, y));
        // left pixels whose correspondence leaves the frame are flagged
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < d0; ++x) CHECK(s.occlusion[s.depth_gt.idx(x, y)] == 1);
    }
    SUBCASE("sphere in front of a plane produces the z-buffer occlusion set") {
        SceneSpec spec = base_spec(SceneKind::Sphere, 96);
        spec.sphere_cz = 5.0;
        spec.sphere_cx = 0.4;
        spec.sphere_r = 1.0;
        spec.background_c = 9.0;
        SynthScene s = gen_scene(spec);
        render_stereo(s, spec.texture);

        // brute-force recount: a left pixel is occluded iff its rounded warp
        // target leaves the frame or another strictly nearer pixel splats onto
        // every target it touches.
        const int w = 96, h = 96;
        std::vector<double> zbuf(static_cast<std::size_t>(w) * h,
                                 std::numeric_limits<double>::infinity());
        auto targets = [&](int x, int y, int& x0, int& x1, double& w0, double& w1) {
            const double t = x - static_cast<double>(s.disparity_gt.value(x, y));
            const double f = std::floor(t);
            x0 = static_cast<int>(f);
            x1 = x0 + 1;
            w1 = t - f;
            w0 = 1.0 - w1;
        };
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int x0, x1;
                double w0, w1;
                targets(x, y, x0, x1, w0, w1);
                const double z = s.depth_gt.value(x, y);
                if (w0 > 0.0 && x0 >= 0 && x0 < w)
                    zbuf[static_cast<std::size_t>(y) * w + x0] =
                        std::min(zbuf[static_cast<std::size_t>(y) * w + x0], z);
                if (w1 > 0.0 && x1 >= 0 && x1 < w)
                    zbuf[static_cast<std::size_t>(y) * w + x1] =
                        std::min(zbuf[static_cast<std::size_t>(y) * w + x1], z);
            }
        std::size_t occluded = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                int x0, x1;
                double w0, w1;
                targets(x, y, x0, x1, w0, w1);
                const double z = s.depth_gt.value(x, y);
                bool in_frame = false, visible = false;
                for (const auto& [xt, wt] : {std::pair{x0, w0}, std::pair{x1, w1}}) {
                    if (wt <= 0.0 || xt < 0 || xt >= w) continue;
                    in_frame = true;
                    if (z <= zbuf[static_cast<std::size_t>(y) * w + xt] *
                                 (1.0 + kOcclusionDepthMargin))
                        visible = true;
                }
                const bool want = !in_frame || !visible;
                CHECK(s.occlusion[s.depth_gt.idx(x, y)] == (want ? 1 : 0));
                occluded += want;
            }
        CHECK(occluded > 0); // the parallax shadow is non-empty
    }
    SUBCASE("rendering is deterministic for a fixed seed") {
        SceneSpec spec = base_spec(SceneKind::FbmTerrain);
        spec.seed = 5;
        SynthScene a = gen_scene(spec), b = gen_scene(spec);
        render_stereo(a, spec.texture);
        render_stereo(b, spec.texture);
        for (std::size_t i = 0; i < a.left.size(); ++i) {
            CHECK(a.left.data()[i] == b.left.data()[i]);
            CHECK(a.right.data()[i] == b.right.data()[i]);
        }
    }
}

TEST_CASE("pipeline variants: soft-argmin estimator and wavelet preprocessing") {
    SceneSpec spec = base_spec(SceneKind::InclinedPlane, 96);
    spec.rig = StereoRig(CameraIntrinsics(140.0, 140.0, 47.5, 47.5), 0.4, 24, 0.5, 15.0);
    spec.plane_a = 0.3;
    spec.plane_c = 4.0;
    SynthScene s = gen_scene(spec);
    render_stereo(s, spec.texture);

    auto fraction_within = [&](const DisparityMap& d, double tol) {
        std::size_t n = 0, ok = 0;
        for (int y = 0; y < 96; ++y)
            for (int x = 0; x < 96; ++x) {
                if (s.occlusion[s.depth_gt.idx(x, y)]) continue;
                ++n;
                if (d.valid(x, y) &&
                    std::abs(d.value(x, y) - s.disparity_gt.value(x, y)) <= tol)
                    ++ok;
            }
        return static_cast<double>(ok) / static_cast<double>(n);
    };

    SUBCASE("soft-argmin disparity stays close to ground truth") {
        pipeline::MatchOptions opts;
        opts.estimator = pipeline::MatchOptions::Estimator::SoftArgmin;
        const pipeline::MatchResult res =
            pipeline::match_stereo(s.left, s.right, s.rig, opts);
        CHECK(fraction_within(res.disparity, 1.0) > 0.95);
    }
    SUBCASE("custom wavelet operator config feeds the preprocessing stage") {
        using namespace ws::wavelet;
        cfg::KeyValueConfig kv = cfg::KeyValueConfig::parse(
            "levels = 2\nkernel_size = 3\nbetas = 0.5,0.5\n");
        pipeline::MatchOptions opts;
        opts.wt_params = cfg::wtconv_params_from_config(kv);
        const pipeline::MatchResult res =
            pipeline::match_stereo(s.left, s.right, s.rig, opts);
        CHECK(fraction_within(res.disparity, 1.0) > 0.95);
    }
}

TEST_CASE("left-right masking covers the rendered occlusion set minus a boundary ring") {
    // Matching with the left-right check must mask (at least) the pixels the
    // renderer knows are occluded, away from a small ring where the
    // comparison straddles the boundary.
    SceneSpec spec = base_spec(SceneKind::Sphere, 160);
    spec.rig = StereoRig(CameraIntrinsics(200.0, 200.0, 79.5, 79.5), 0.4, 32, 0.5, 15.0);
    spec.sphere_cz = 5.0;
    spec.sphere_cx = 0.3;
    spec.sphere_r = 0.9;
    spec.background_c = 8.0;
    SynthScene s = gen_scene(spec);
    render_stereo(s, spec.texture);

    pipeline::MatchOptions opts;
    const pipeline::MatchResult res = pipeline::match_stereo(s.left, s.right, s.rig, opts);

    // A 3-px ring absorbs the window-induced fattening at the boundary, where
    // wrong-but-consistent matches legitimately survive the check.
    const int w = 160, h = 160, ring = 3;
    std::size_t interior_occluded = 0, violations = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!s.occlusion[s.depth_gt.idx(x, y)]) continue;
            bool interior = true; // occluded and >ring away from any unoccluded pixel
            for (int dy = -ring; dy <= ring && interior; ++dy)
                for (int dx = -ring; dx <= ring; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
                    if (!s.occlusion[s.depth_gt.idx(xx, yy)]) {
                        interior = false;
                        break;
                    }
                }
            if (!interior) continue;
            ++interior_occluded;
            if (res.disparity.valid(x, y)) ++violations;
        }
    REQUIRE(interior_occluded > 100);
    CHECK(violations == 0);
}

TEST_CASE("texture spectra shift to low frequencies as the falloff exponent grows") {
    SceneSpec spec = base_spec(SceneKind::FrontoPlane, 128);
    spec.plane_c = 5.0;
    double prev_ratio = 2.0;
    double first = 0.0, last = 0.0;
    for (double falloff : {0.0, 0.8, 1.6, 2.4}) {
        spec.texture.falloff = falloff;
        spec.texture.seed = 11;
        SynthScene s = gen_scene(spec);
        render_stereo(s, spec.texture);
        const auto r = wavelet::frequency_energy_ratio(s.left, 0.1);
        CHECK(r.ratio < prev_ratio);
        prev_ratio = r.ratio;
        if (falloff == 0.0) first = r.ratio;
        last = r.ratio;
    }
    // The range spans rough (high-frequency-rich) through gently varying
    // (low-frequency-dominant) regimes.
    CHECK(first > 0.3);
    CHECK(last < 0.15);
}

TEST_CASE("add_noise") {
    SceneSpec spec = base_spec(SceneKind::FrontoPlane);
    spec.plane_c = 5.0;
    const SynthScene s = gen_scene(spec);
    SUBCASE("sigma 0 is the identity") {
        const DepthMap n = add_noise(s.depth_gt, 0.0, 3);
        for (std::size_t i = 0; i < n.values().size(); ++i)
            CHECK(n.values()[i] == s.depth_gt.values()[i]);
    }
    SUBCASE("fixed seed reproduces the field; different seeds differ") {
        const DepthMap a = add_noise(s.depth_gt, 0.02, 3);
        const DepthMap b = add_noise(s.depth_gt, 0.02, 3);
        const DepthMap c = add_noise(s.depth_gt, 0.02, 4);
        bool any_diff = false;
        for (std::size_t i = 0; i < a.values().size(); ++i) {
            CHECK(a.values()[i] == b.values()[i]);
            any_diff |= a.values()[i] != c.values()[i];
        }
        CHECK(any_diff);
    }
    SUBCASE("sample statistics match sigma within 10% on a large field") {
        SceneSpec big = base_spec(SceneKind::FrontoPlane, 512);
        big.plane_c = 5.0;
        const SynthScene sb = gen_scene(big);
        const DepthMap noisy = add_noise(sb.depth_gt, 0.02, 17);
        double mean = 0.0;
        const std::size_t n = noisy.values().size();
        std::vector<double> rel(n);
        for (std::size_t i = 0; i < n; ++i) {
            rel[i] = static_cast<double>(noisy.values()[i]) / sb.depth_gt.values()[i] - 1.0;
            mean += rel[i];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double r : rel) var += (r - mean) * (r - mean);
        const double sd = std::sqrt(var / static_cast<double>(n - 1));
        CHECK(sd == doctest::Approx(0.02).epsilon(0.10));
    }
    SUBCASE("negative sigma rejected") {
        CHECK_THROWS_AS(add_noise(s.depth_gt, -0.1, 0), DomainError);
    }
}
