#pragma once

#include <array>
#include <vector>

#include "wavestereo/core.hpp"

namespace ws::geometry {

/// Per-pixel depth gradient (dZ/du, dZ/dv) in meters per pixel, with a
/// validity mask for guarded or border pixels. Stored in double precision:
/// the consistency loss must be smooth enough for finite-difference checks of
/// its gradient.
class GradientField {
public:
    GradientField() = default;
    GradientField(int width, int height, std::vector<double> du, std::vector<double> dv,
                  std::vector<std::uint8_t> mask);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double du(int x, int y) const { return du_[idx(x, y)]; }
    double dv(int x, int y) const { return dv_[idx(x, y)]; }
    bool valid(int x, int y) const { return mask_[idx(x, y)] != 0; }

    std::span<const double> du_values() const noexcept { return du_; }
    std::span<const double> dv_values() const noexcept { return dv_; }
    std::span<const std::uint8_t> mask() const noexcept { return mask_; }
    std::size_t valid_count() const noexcept;

    std::size_t idx(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> du_, dv_;
    std::vector<std::uint8_t> mask_;
};

/// Parameters of the depth/normal consistency machinery.
struct ConsistencyConfig {
    double huber_delta = 1.0;    // Huber threshold on gradient residuals (m/px)
    double denom_epsilon = 1e-4; // guard on the normal-constraint denominator
    double nz_epsilon = 1e-3;    // guard on |nz|
    double sobel_norm = 0.125;   // 1/8: Sobel output approximates m/px central differences
    // Huber over the residual 2-vector: per-component (default) or on the
    // vector magnitude.
    bool huber_on_magnitude = false;

    void validate() const;
};

/// Pinhole back-projection: pixel (u, v) at depth Z to camera-frame
/// coordinates X = Z(u - cx)/fx, Y = Z(v - cy)/fy.
std::array<double, 3> backproject(double u, double v, double z, const CameraIntrinsics& k);

/// Projects a camera-frame point back to pixel coordinates (u, v).
std::array<double, 2> project(const std::array<double, 3>& p, const CameraIntrinsics& k);

/// Surface normals by local plane fitting: back-project the window
/// neighborhood, reject neighbors across depth discontinuities (relative
/// difference above reject_rel), total-least-squares plane fit, orient
/// camera-facing (nz <= 0). Pixels with fewer than 6 accepted neighbors are
/// masked.
NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& k, int window,
                             double reject_rel = 0.10);

/// Depth gradient implied by the surface normals (the geometric constraint):
///   dZ/du = (-nx * Z / (nz * fx)) / denom
///   dZ/dv = (-ny * Z / (nz * fy)) / denom
///   denom = 1 + (nx/nz)(u - cx)/fx + (ny/nz)(v - cy)/fy
/// Pixels with |nz| < nz_epsilon or |denom| < denom_epsilon are masked rather
/// than clamped; the formula genuinely diverges near grazing geometry.
GradientField grad_from_normals(const DepthMap& depth, const NormalMap& normals,
                                const CameraIntrinsics& k, const ConsistencyConfig& cfg);

/// Depth gradient measured from the depth map itself: 3x3 Sobel with 1/8
/// normalization so the output approximates meters-per-pixel central
/// differences. The border ring and any pixel whose stencil touches invalid
/// depth are masked.
GradientField sobel_grad(const DepthMap& depth, const ConsistencyConfig& cfg);

/// Per-pixel difference between the normal-implied and the measured gradient;
/// mask is the intersection of both operands' masks.
GradientField consistency_residual(const DepthMap& depth, const NormalMap& normals,
                                   const CameraIntrinsics& k, const ConsistencyConfig& cfg);

/// Mean over valid pixels of the Huber penalty applied to the consistency
/// residual (per component summed, or on the magnitude, per cfg).
double consistency_loss(const DepthMap& depth, const NormalMap& normals,
                        const CameraIntrinsics& k, const ConsistencyConfig& cfg);

/// Exact analytic gradient of consistency_loss with respect to the depth
/// values (normals held fixed), via the chain rule through the Huber, the
/// Z-linearity of the normal constraint, and the Sobel stencil adjoint.
/// Entries at invalid depth pixels are zero.
std::vector<double> consistency_grad(const DepthMap& depth, const NormalMap& normals,
                                     const CameraIntrinsics& k, const ConsistencyConfig& cfg);

} // namespace ws::geometry
