#include "wavestereo/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavestereo/geometry.hpp"
#include "wavestereo/rng.hpp"
#include "wavestereo/stereo.hpp"

namespace ws::synth {

namespace {

double smoothstep5(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// Seeded value noise on an integer lattice with quintic interpolation.
double value_noise(double x, double y, std::uint64_t seed) {
    const double fx = std::floor(x), fy = std::floor(y);
    const auto ix = static_cast<std::int64_t>(fx);
    const auto iy = static_cast<std::int64_t>(fy);
    const double tx = smoothstep5(x - fx), ty = smoothstep5(y - fy);
    const double v00 = hash_to_unit(ix, iy, seed);
    const double v10 = hash_to_unit(ix + 1, iy, seed);
    const double v01 = hash_to_unit(ix, iy + 1, seed);
    const double v11 = hash_to_unit(ix + 1, iy + 1, seed);
    const double a = v00 + (v10 - v00) * tx;
    const double b = v01 + (v11 - v01) * tx;
    return a + (b - a) * ty;
}

// Octave sum normalized to [-1, 1]; per-octave amplitude given by `amp`.
template <typename AmpFn>
double fbm(double x, double y, std::uint64_t seed, int octaves, AmpFn amp) {
    double acc = 0.0, norm = 0.0, freq = 1.0;
    for (int o = 0; o < octaves; ++o) {
        const double a = amp(o);
        acc += a * value_noise(x * freq, y * freq, seed + static_cast<std::uint64_t>(o));
        norm += a;
        freq *= 2.0;
    }
    return norm > 0.0 ? acc / norm : 0.0;
}

} // namespace

SceneKind scene_kind_from_string(std::string_view s) {
    if (s == "fronto_plane") return SceneKind::FrontoPlane;
    if (s == "inclined_plane") return SceneKind::InclinedPlane;
    if (s == "sphere") return SceneKind::Sphere;
    if (s == "fbm_terrain") return SceneKind::FbmTerrain;
    throw ConfigError("unknown scene kind '" + std::string(s) + "'");
}

std::string to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::FrontoPlane: return "fronto_plane";
    case SceneKind::InclinedPlane: return "inclined_plane";
    case SceneKind::Sphere: return "sphere";
    case SceneKind::FbmTerrain: return "fbm_terrain";
    }
    return "?";
}

void TextureParams::validate() const {
    if (!(contrast >= 0.0) || contrast > 0.5)
        throw DomainError("TextureParams: contrast must lie in [0, 0.5]");
    if (!(falloff >= 0.0)) throw DomainError("TextureParams: falloff must be >= 0");
    if (octaves < 1) throw DomainError("TextureParams: octaves must be >= 1");
    if (!(base_frequency > 0.0))
        throw DomainError("TextureParams: base_frequency must be > 0");
}

void SceneSpec::validate() const {
    if (width < 2 || height < 2) throw DimensionError("SceneSpec: scene must be >= 2x2");
    rig.intrinsics.validate_for_size(width, height);
    texture.validate();
    if (kind == SceneKind::Sphere && !(sphere_r > 0.0))
        throw DomainError("SceneSpec: sphere radius must be > 0");
    if (kind == SceneKind::FbmTerrain &&
        (fbm_octaves < 1 || !(fbm_gain > 0.0) || !(fbm_frequency > 0.0)))
        throw DomainError("SceneSpec: fbm parameters must be positive");
}

StereoRig default_rig(int width, int height) {
    return StereoRig(CameraIntrinsics(595.90, 595.90, (width - 1) / 2.0, (height - 1) / 2.0),
                     0.270, 64, 0.5, 15.0);
}

SynthScene gen_scene(const SceneSpec& spec) {
    spec.validate();
    const int w = spec.width, h = spec.height;
    const CameraIntrinsics& k = spec.rig.intrinsics;
    const std::size_t n = static_cast<std::size_t>(w) * h;

    std::vector<float> depth(n, 0.0f);
    std::vector<std::uint8_t> dmask(n, 1);
    std::vector<float> normals(3 * n, 0.0f);
    std::vector<std::uint8_t> nmask(n, 1);

    auto set_normal = [&](std::size_t i, double nx, double ny, double nz) {
        const double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
        normals[3 * i + 0] = static_cast<float>(nx / norm);
        normals[3 * i + 1] = static_cast<float>(ny / norm);
        normals[3 * i + 2] = static_cast<float>(nz / norm);
    };

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            const double du = (x - k.cx) / k.fx;
            const double dv = (y - k.cy) / k.fy;
            double z = 0.0;
            switch (spec.kind) {
            case SceneKind::FrontoPlane:
                z = spec.plane_c;
                set_normal(i, 0.0, 0.0, -1.0);
                break;
            case SceneKind::InclinedPlane: {
                // Z = a X + c along the ray X = Z du  =>  Z = c / (1 - a du).
                const double denom = 1.0 - spec.plane_a * du;
                if (!(denom > 1e-9))
                    throw DomainError("gen_scene: inclined plane behind the camera");
                z = spec.plane_c / denom;
                set_normal(i, spec.plane_a, 0.0, -1.0);
                break;
            }
            case SceneKind::Sphere: {
                // Ray p = t (du, dv, 1) against the sphere, then the background.
                const double a = du * du + dv * dv + 1.0;
                const double b = du * spec.sphere_cx + dv * spec.sphere_cy + spec.sphere_cz;
                const double c = spec.sphere_cx * spec.sphere_cx +
                                 spec.sphere_cy * spec.sphere_cy +
                                 spec.sphere_cz * spec.sphere_cz - spec.sphere_r * spec.sphere_r;
                const double disc = b * b - a * c;
                double t = -1.0;
                if (disc >= 0.0) t = (b - std::sqrt(disc)) / a;
                if (t > 0.0 && t < spec.background_c) {
                    z = t; // ray z-component is 1
                    const double nx = (t * du - spec.sphere_cx) / spec.sphere_r;
                    const double ny = (t * dv - spec.sphere_cy) / spec.sphere_r;
                    const double nz = (t - spec.sphere_cz) / spec.sphere_r;
                    // Near the silhouette of an off-axis sphere the visible
                    // normal can point away from the camera axis; those pixels
                    // cannot carry the nz <= 0 convention and are masked.
                    if (nz <= 0.0)
                        set_normal(i, nx, ny, nz);
                    else
                        nmask[i] = 0;
                } else {
                    z = spec.background_c;
                    set_normal(i, 0.0, 0.0, -1.0);
                }
                break;
            }
            case SceneKind::FbmTerrain:
                z = spec.fbm_base_depth +
                    spec.fbm_amplitude *
                        fbm(x * spec.fbm_frequency, y * spec.fbm_frequency, spec.seed,
                            spec.fbm_octaves,
                            [&](int o) { return std::pow(spec.fbm_gain, o); });
                break;
            }
            if (z < spec.rig.min_depth || z > spec.rig.max_depth)
                throw DomainError("gen_scene: surface depth " + std::to_string(z) +
                                  " outside the rig depth window");
            depth[i] = static_cast<float>(z);
        }
    }

    SynthScene scene;
    scene.rig = spec.rig;
    scene.depth_gt = DepthMap(w, h, std::move(depth), std::move(dmask));
    if (spec.kind == SceneKind::FbmTerrain) {
        // No tractable closed form; the plane-fit operator is the documented
        // ground-truth oracle for fbm normals.
        scene.normal_gt = geometry::normals_from_depth(scene.depth_gt, k, 5);
    } else {
        scene.normal_gt = NormalMap(w, h, std::move(normals), std::move(nmask));
    }
    scene.disparity_gt = stereo::depth_to_disparity(scene.depth_gt, spec.rig);
    scene.left = Image::filled(w, h, 0.5f);
    scene.right = Image::filled(w, h, 0.5f);
    scene.occlusion.assign(n, 0);
    return scene;
}

void render_stereo(SynthScene& scene, const TextureParams& tex) {
    tex.validate();
    const int w = scene.depth_gt.width(), h = scene.depth_gt.height();
    const CameraIntrinsics& k = scene.rig.intrinsics;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const double inv_falloff_base = std::pow(2.0, -tex.falloff);

    // Texture attached to the surface's (X, Y) coordinates so both views
    // sample the same pattern.
    auto texture_at = [&](double px, double py) {
        const double v =
            fbm(px * tex.base_frequency, py * tex.base_frequency, tex.seed, tex.octaves,
                [&](int o) { return std::pow(inv_falloff_base, o); });
        return static_cast<float>(std::clamp(0.5 + tex.contrast * v, 0.0, 1.0));
    };

    // Left view: texture evaluated on the surface point of each pixel ray.
    std::vector<float> left(n, 0.5f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!scene.depth_gt.valid(x, y)) continue;
            const double z = scene.depth_gt.value(x, y);
            left[static_cast<std::size_t>(y) * w + x] =
                texture_at(z * (x - k.cx) / k.fx, z * (y - k.cy) / k.fy);
        }

    // Right view: forward warp with bilinear splatting. Pass 1 builds a
    // per-target z-buffer; pass 2 accumulates contributions that are within
    // the depth margin of the nearest surface.
    std::vector<double> zbuf(n, std::numeric_limits<double>::infinity());
    std::vector<double> num(n, 0.0), den(n, 0.0);
    scene.occlusion.assign(n, 0);

    auto splat_targets = [&](double t, int& x0, double& w0, int& x1, double& w1) {
        const double f = std::floor(t);
        x0 = static_cast<int>(f);
        x1 = x0 + 1;
        w1 = t - f;
        w0 = 1.0 - w1;
    };

    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (!scene.disparity_gt.valid(x, y)) continue;
            const double z = scene.depth_gt.value(x, y);
            int x0, x1;
            double w0, w1;
            splat_targets(x - static_cast<double>(scene.disparity_gt.value(x, y)), x0, w0, x1,
                          w1);
            if (x0 >= 0 && x0 < w && w0 > 0.0) zbuf[row + x0] = std::min(zbuf[row + x0], z);
            if (x1 >= 0 && x1 < w && w1 > 0.0) zbuf[row + x1] = std::min(zbuf[row + x1], z);
        }
        for (int x = 0; x < w; ++x) {
            if (!scene.disparity_gt.valid(x, y)) continue;
            const double z = scene.depth_gt.value(x, y);
            const double t = x - static_cast<double>(scene.disparity_gt.value(x, y));
            int x0, x1;
            double w0, w1;
            splat_targets(t, x0, w0, x1, w1);
            bool in_frame = false, visible = false;
            for (const auto& [xt, wt] : {std::pair{x0, w0}, std::pair{x1, w1}}) {
                if (wt <= 0.0 || xt < 0 || xt >= w) continue;
                in_frame = true;
                if (z <= zbuf[row + xt] * (1.0 + kOcclusionDepthMargin)) {
                    visible = true;
                    num[row + xt] += wt * left[row + x];
                    den[row + xt] += wt;
                }
            }
            if (!in_frame || !visible) scene.occlusion[row + x] = 1;
        }
    }

    // Disocclusion holes continue the background surface: take the depth of
    // the nearest splatted pixel on the row (deeper side wins), place the
    // revealed point on the right-camera ray at that depth and sample the
    // texture there. The right camera sits at +baseline along X, so a right
    // pixel (x, y) at depth z sees the left-frame point
    // (B + z (x - cx) / fx, z (y - cy) / fy, z).
    std::vector<float> right(n, 0.5f);
    for (int y = 0; y < h; ++y) {
        const std::size_t row = static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
            if (den[row + x] > 1e-9) {
                right[row + x] = static_cast<float>(num[row + x] / den[row + x]);
                continue;
            }
            double z_bg = 0.0;
            for (int off = 1; off < w; ++off) {
                const bool has_r = x + off < w && den[row + x + off] > 1e-9;
                const bool has_l = x - off >= 0 && den[row + x - off] > 1e-9;
                if (!has_r && !has_l) continue;
                const double zr = has_r ? zbuf[row + x + off] : 0.0;
                const double zl = has_l ? zbuf[row + x - off] : 0.0;
                z_bg = std::max(zr, zl);
                break;
            }
            if (z_bg > 0.0)
                right[row + x] = texture_at(
                    scene.rig.baseline + z_bg * (x - k.cx) / k.fx, z_bg * (y - k.cy) / k.fy);
        }
    }

    scene.left = Image(w, h, std::move(left));
    scene.right = Image(w, h, std::move(right));
}

DepthMap add_noise(const DepthMap& depth, double sigma_rel, std::uint64_t seed) {
    if (!(sigma_rel >= 0.0)) throw DomainError("add_noise: sigma_rel must be >= 0");
    if (sigma_rel == 0.0) return depth;
    Rng rng(seed);
    const std::size_t n = depth.values().size();
    std::vector<float> vals(n);
    std::vector<std::uint8_t> mask(depth.mask().begin(), depth.mask().end());
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = rng.gaussian(); // drawn for every pixel to keep the
                                          // stream independent of the mask
        if (!mask[i]) {
            vals[i] = depth.values()[i];
            continue;
        }
        vals[i] = static_cast<float>(
            std::max(static_cast<double>(depth.values()[i]) * (1.0 + sigma_rel * xi), 1e-6));
    }
    return DepthMap(depth.width(), depth.height(), std::move(vals), std::move(mask));
}

} // namespace ws::synth
