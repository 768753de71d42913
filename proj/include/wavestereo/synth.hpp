#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wavestereo/core.hpp"

namespace ws::synth {

enum class SceneKind { FrontoPlane, InclinedPlane, Sphere, FbmTerrain };

SceneKind scene_kind_from_string(std::string_view s);
std::string to_string(SceneKind kind);

/// Procedural surface texture: seeded value-noise octaves attached to the
/// surface's (X, Y) coordinates so both views sample the same pattern. Octave
/// o runs at spatial frequency base_frequency * 2^o with amplitude
/// 2^(-o * falloff); a larger falloff exponent concentrates energy at low
/// frequencies (Mars-like spectra), a smaller one adds high-frequency detail.
struct TextureParams {
    double contrast = 0.3;       // intensity swing around 0.5
    double falloff = 1.2;        // spectral falloff exponent
    int octaves = 6;
    double base_frequency = 2.0; // lattice cells per meter at octave 0
    std::uint64_t seed = 1;

    void validate() const;
};

/// Parametric scene description. Fronto and inclined planes and the sphere
/// have closed-form depth and normals; fbm terrain is a seeded value-noise
/// heightfield whose normal ground truth comes from the plane-fit operator.
struct SceneSpec {
    SceneKind kind = SceneKind::FrontoPlane;
    int width = 512, height = 512;
    StereoRig rig;

    double plane_c = 5.0; // fronto depth / inclined depth on the principal ray, meters
    double plane_a = 0.5; // inclined-plane slope: Z = plane_a * X + plane_c

    double sphere_cx = 0.0, sphere_cy = 0.0, sphere_cz = 6.0; // center, camera frame
    double sphere_r = 1.5;
    double background_c = 8.0; // fronto background behind the sphere

    int fbm_octaves = 5;
    double fbm_gain = 0.5;
    double fbm_base_depth = 6.0;
    double fbm_amplitude = 1.0;  // meters
    double fbm_frequency = 0.01; // lattice cells per pixel
    std::uint64_t seed = 0;

    TextureParams texture;

    void validate() const;
};

/// A generated stereo scene with analytic ground truth. The occlusion mask is
/// over the left (reference) view: 1 marks pixels whose right-view
/// correspondence is covered by nearer geometry or falls outside the frame.
struct SynthScene {
    Image left, right;
    DepthMap depth_gt;       // left view
    NormalMap normal_gt;     // left view
    DisparityMap disparity_gt;
    std::vector<std::uint8_t> occlusion; // left view, filled by render_stereo
    StereoRig rig;
};

/// The default 512x512 rig: focal length 595.90 px, 270 mm baseline, depth
/// window [0.5, 15] m, 64 disparity hypotheses.
StereoRig default_rig(int width = 512, int height = 512);

/// Evaluates the parametric surface along each pixel ray: metric depth,
/// ground-truth normals (analytic where closed-form, plane-fit for fbm) and
/// the matching disparity. Throws if any generated depth leaves the rig's
/// depth window. Images and the occlusion mask are left blank until
/// render_stereo runs.
SynthScene gen_scene(const SceneSpec& spec);

/// Renders the left view by sampling the procedural texture on the surface,
/// then synthesizes the right view by forward-warping the left image along
/// the ground-truth disparity with bilinear splatting and a z-buffer.
/// Occluded left pixels (covered targets and out-of-frame correspondences)
/// are flagged; right-view holes are filled from the nearest pixel to the
/// left on the same row.
void render_stereo(SynthScene& scene, const TextureParams& tex);

/// Multiplicative Gaussian depth noise D * (1 + sigma_rel * xi), clamped
/// positive, fully determined by the seed. Masks are unchanged.
DepthMap add_noise(const DepthMap& depth, double sigma_rel, std::uint64_t seed);

/// Relative depth margin below which a covering surface counts as occluding.
/// Keeps quantization-level double-mappings on a single smooth surface from
/// being flagged.
inline constexpr double kOcclusionDepthMargin = 0.01;

} // namespace ws::synth
