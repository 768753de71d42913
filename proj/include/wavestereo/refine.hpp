#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

#include "wavestereo/core.hpp"
#include "wavestereo/geometry.hpp"

namespace ws::refine {

/// Huber penalty: quadratic inside |e| <= delta, linear outside. Both
/// branches meet at delta^2 / 2.
inline double huber(double e, double delta) {
    if (!(delta > 0.0)) throw DomainError("huber: delta must be > 0");
    const double a = std::abs(e);
    return a <= delta ? 0.5 * e * e : delta * (a - 0.5 * delta);
}

/// d/de of huber(e, delta); continuous everywhere.
inline double huber_deriv(double e, double delta) {
    if (!(delta > 0.0)) throw DomainError("huber: delta must be > 0");
    if (std::abs(e) <= delta) return e;
    return e > 0.0 ? delta : -delta;
}

/// Weights of the supervised objective: overall = lambda_d * depth loss +
/// lambda_n * normal loss + lambda_c * consistency loss.
struct LossConfig {
    double lambda_d = 2.0;
    double lambda_n = 1.0;
    double lambda_c = 3.0;
    double huber_delta_d = 1.0;
    double huber_delta_n = 1.0;

    void validate() const;
};

/// Controls the alternating variational refinement. Depth is normalized to
/// [0, 1] over [min_depth, max_depth] for the duration of the descent and
/// de-normalized on output; steps are taken along the sup-norm-normalized
/// negative gradient with Armijo backtracking.
struct RefineConfig {
    int iterations = 5;
    double lambda_data = 1.0;      // anchor weight toward the initial depth
    double data_huber_delta = 1.0; // meters
    // Max per-pixel move per iteration, in normalized depth units. Small by
    // default so improvement accrues gradually across iterations instead of
    // collapsing into the first step.
    double initial_step = 0.005;
    double step_shrink = 0.5;
    double armijo_c = 1e-4;
    double step_floor = 1e-12;
    int renormal_every = 1;     // iterations between normal re-derivations
    int normal_window = 5;      // plane-fit window for re-derived normals
    double normal_reject_rel = 0.10;
    double min_depth = 0.5;     // normalization range, meters
    double max_depth = 15.0;

    void validate() const;
};

/// One record per refinement iteration.
struct RefineIterationRecord {
    int iteration = 0;
    double energy = 0.0;           // total energy at the start of the iteration
    double consistency = 0.0;      // consistency loss component
    double step = 0.0;             // accepted step length (0 if line search failed)
    double depth_update_norm = 0.0; // L2 norm of the depth update, meters
    double normal_angle_mean_deg = 0.0; // mean angular change of re-derived normals
};

struct RefineTrace {
    std::vector<RefineIterationRecord> records;
    double final_energy = 0.0;

    void write(std::ostream& os) const;
    std::string to_text() const;
};

struct RefineResult {
    DepthMap depth;
    NormalMap normals;
    RefineTrace trace;
};

/// Mean Huber error between predicted and ground-truth depth over jointly
/// valid pixels.
double depth_loss(const DepthMap& pred, const DepthMap& gt, double delta);

/// Mean of the per-component Huber errors between predicted and ground-truth
/// normals over jointly valid pixels (three components summed per pixel).
double normal_loss(const NormalMap& pred, const NormalMap& gt, double delta);

/// lambda_d * depth_loss + lambda_n * normal_loss + lambda_c *
/// consistency_loss(pred_depth, pred_normals).
double overall_loss(const DepthMap& pred_depth, const DepthMap& gt_depth,
                    const NormalMap& pred_normals, const NormalMap& gt_normals,
                    const CameraIntrinsics& k, const LossConfig& lcfg,
                    const geometry::ConsistencyConfig& ccfg);

/// Alternating variational refinement: normals are derived from the current
/// depth, depth descends the anchored consistency energy
///   E(D) = lambda_data * mean Huber(D' - D0') + consistency_loss(D, N)
/// (primes denote normalized depth), with a backtracking line search that
/// guarantees the energy never increases; re-derived normals are adopted only
/// when they do not increase the energy either. Invalid pixels are never
/// updated or unmasked, and depths stay strictly positive.
RefineResult refine_depth(const DepthMap& depth0, const CameraIntrinsics& k,
                          const RefineConfig& rcfg, const geometry::ConsistencyConfig& ccfg);

} // namespace ws::refine
