#include "wavestereo/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

namespace ws::refine {

namespace {

constexpr double kMinDepthMeters = 1e-6; // positivity projection floor

double consistency_or_zero(const DepthMap& d, const NormalMap& n, const CameraIntrinsics& k,
                           const geometry::ConsistencyConfig& ccfg) {
    try {
        return geometry::consistency_loss(d, n, k, ccfg);
    } catch (const DegenerateInputError&) {
        return 0.0; // nothing to constrain; the anchor term still applies
    }
}

} // namespace

void LossConfig::validate() const {
    if (lambda_d < 0.0 || lambda_n < 0.0 || lambda_c < 0.0)
        throw DomainError("LossConfig: weights must be >= 0");
    if (lambda_d == 0.0 && lambda_n == 0.0 && lambda_c == 0.0)
        throw DomainError("LossConfig: at least one weight must be > 0");
    if (!(huber_delta_d > 0.0) || !(huber_delta_n > 0.0))
        throw DomainError("LossConfig: Huber deltas must be > 0");
}

void RefineConfig::validate() const {
    if (iterations < 1) throw DomainError("RefineConfig: iterations must be >= 1");
    if (lambda_data < 0.0) throw DomainError("RefineConfig: lambda_data must be >= 0");
    if (!(data_huber_delta > 0.0) || !(initial_step > 0.0) || !(step_shrink > 0.0) ||
        step_shrink >= 1.0 || !(armijo_c > 0.0) || !(step_floor > 0.0))
        throw DomainError("RefineConfig: step parameters must be positive (shrink < 1)");
    if (renormal_every < 1) throw DomainError("RefineConfig: renormal_every must be >= 1");
    if (normal_window < 3 || normal_window % 2 == 0)
        throw DomainError("RefineConfig: normal_window must be odd and >= 3");
    if (!(min_depth > 0.0) || !(min_depth < max_depth))
        throw DomainError("RefineConfig: need 0 < min_depth < max_depth");
}

double depth_loss(const DepthMap& pred, const DepthMap& gt, double delta) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionError("depth_loss: map dimensions differ");
    double acc = 0.0;
    std::size_t count = 0;
    const std::size_t n = pred.values().size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!pred.mask()[i] || !gt.mask()[i]) continue;
        acc += huber(static_cast<double>(pred.values()[i]) - gt.values()[i], delta);
        ++count;
    }
    if (count == 0) throw DegenerateInputError("depth_loss: no jointly valid pixels");
    return acc / static_cast<double>(count);
}

double normal_loss(const NormalMap& pred, const NormalMap& gt, double delta) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw DimensionError("normal_loss: map dimensions differ");
    double acc = 0.0;
    std::size_t count = 0;
    const std::size_t n = pred.mask().size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!pred.mask()[i] || !gt.mask()[i]) continue;
        for (int c = 0; c < 3; ++c)
            acc += huber(static_cast<double>(pred.vectors()[3 * i + c]) -
                             gt.vectors()[3 * i + c],
                         delta);
        ++count;
    }
    if (count == 0) throw DegenerateInputError("normal_loss: no jointly valid pixels");
    return acc / static_cast<double>(count);
}

double overall_loss(const DepthMap& pred_depth, const DepthMap& gt_depth,
                    const NormalMap& pred_normals, const NormalMap& gt_normals,
                    const CameraIntrinsics& k, const LossConfig& lcfg,
                    const geometry::ConsistencyConfig& ccfg) {
    lcfg.validate();
    const double ld = depth_loss(pred_depth, gt_depth, lcfg.huber_delta_d);
    const double ln = normal_loss(pred_normals, gt_normals, lcfg.huber_delta_n);
    const double lc = geometry::consistency_loss(pred_depth, pred_normals, k, ccfg);
    return lcfg.lambda_d * ld + lcfg.lambda_n * ln + lcfg.lambda_c * lc;
}

void RefineTrace::write(std::ostream& os) const {
    os << "# iteration energy consistency step depth_update_norm normal_angle_mean_deg\n";
    for (const auto& r : records) {
        os << r.iteration << ' ' << r.energy << ' ' << r.consistency << ' ' << r.step << ' '
           << r.depth_update_norm << ' ' << r.normal_angle_mean_deg << '\n';
    }
    os << "# final_energy " << final_energy << '\n';
}

std::string RefineTrace::to_text() const {
    std::ostringstream os;
    os.precision(12);
    write(os);
    return os.str();
}

RefineResult refine_depth(const DepthMap& depth0, const CameraIntrinsics& k,
                          const RefineConfig& rcfg,
                          const geometry::ConsistencyConfig& ccfg) {
    rcfg.validate();
    ccfg.validate();
    const std::size_t n = depth0.values().size();
    const std::size_t n_valid = depth0.valid_count();
    if (n_valid == 0) throw DegenerateInputError("refine_depth: no valid pixels");

    const int w = depth0.width(), h = depth0.height();
    const double range = rcfg.max_depth - rcfg.min_depth;
    const auto mask = std::vector<std::uint8_t>(depth0.mask().begin(), depth0.mask().end());

    // Working state in normalized depth units.
    std::vector<double> dn(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        dn[i] = (static_cast<double>(depth0.values()[i]) - rcfg.min_depth) / range;

    auto to_depth_map = [&](const std::vector<double>& v) {
        std::vector<float> vals(n, 0.0f);
        for (std::size_t i = 0; i < n; ++i)
            vals[i] = mask[i] ? static_cast<float>(
                                    std::max(rcfg.min_depth + v[i] * range, kMinDepthMeters))
                              : depth0.values()[i];
        return DepthMap(w, h, std::move(vals), mask);
    };

    // Energy in metric units: anchored Huber data term plus the consistency
    // loss. The normalized depth variable only scales the descent steps.
    auto energy_of = [&](const DepthMap& d, const NormalMap& nm, double* consistency) {
        double data = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask[i]) continue;
            data += huber(static_cast<double>(d.values()[i]) - depth0.values()[i],
                          rcfg.data_huber_delta);
        }
        data = rcfg.lambda_data * data / static_cast<double>(n_valid);
        const double lc = consistency_or_zero(d, nm, k, ccfg);
        if (consistency) *consistency = lc;
        return data + lc;
    };

    DepthMap cur = to_depth_map(dn);
    NormalMap normals = geometry::normals_from_depth(depth0, k, rcfg.normal_window,
                                                     rcfg.normal_reject_rel);

    RefineTrace trace;
    trace.records.reserve(static_cast<std::size_t>(rcfg.iterations));

    double consistency = 0.0;
    double energy = energy_of(cur, normals, &consistency);

    for (int t = 0; t < rcfg.iterations; ++t) {
        RefineIterationRecord rec;
        rec.iteration = t;
        rec.energy = energy;
        rec.consistency = consistency;

        // Gradient of the energy w.r.t. normalized depth.
        std::vector<double> grad(n, 0.0);
        try {
            grad = geometry::consistency_grad(cur, normals, k, ccfg);
            for (std::size_t i = 0; i < n; ++i) grad[i] *= range;
        } catch (const DegenerateInputError&) {
            // no consistency term; pure anchor
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (!mask[i]) {
                grad[i] = 0.0;
                continue;
            }
            grad[i] += range * rcfg.lambda_data *
                       huber_deriv(static_cast<double>(cur.values()[i]) - depth0.values()[i],
                                   rcfg.data_huber_delta) /
                       static_cast<double>(n_valid);
        }

        double gmax = 0.0;
        for (double g : grad) gmax = std::max(gmax, std::abs(g));

        double accepted_step = 0.0;
        if (gmax > 0.0) {
            // Sup-norm-normalized steepest descent with Armijo backtracking.
            std::vector<double> dir(n, 0.0);
            double slope = 0.0; // directional derivative magnitude g . dir
            for (std::size_t i = 0; i < n; ++i) {
                dir[i] = grad[i] / gmax;
                slope += grad[i] * dir[i];
            }
            std::vector<double> trial(n, 0.0);
            for (double s = rcfg.initial_step; s >= rcfg.step_floor; s *= rcfg.step_shrink) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = dn[i] - s * dir[i];
                DepthMap cand = to_depth_map(trial);
                double cand_consistency = 0.0;
                const double cand_energy = energy_of(cand, normals, &cand_consistency);
                if (cand_energy <= energy - rcfg.armijo_c * s * slope) {
                    double upd = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        if (!mask[i]) continue;
                        const double dm = (static_cast<double>(cand.values()[i]) -
                                           cur.values()[i]);
                        upd += dm * dm;
                        dn[i] = (static_cast<double>(cand.values()[i]) - rcfg.min_depth) /
                                range;
                    }
                    rec.depth_update_norm = std::sqrt(upd);
                    cur = std::move(cand);
                    energy = cand_energy;
                    consistency = cand_consistency;
                    accepted_step = s;
                    break;
                }
            }
        }
        rec.step = accepted_step;

        // Mutual boosting: re-derive normals from the refined depth. Adopt the
        // re-derived field only if it does not increase the energy, so the
        // trace stays monotone.
        if ((t + 1) % rcfg.renormal_every == 0) {
            NormalMap cand = geometry::normals_from_depth(cur, k, rcfg.normal_window,
                                                          rcfg.normal_reject_rel);
            double cand_consistency = 0.0;
            const double cand_energy = energy_of(cur, cand, &cand_consistency);
            if (cand_energy <= energy) {
                double angle_acc = 0.0;
                std::size_t angle_count = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!normals.mask()[i] || !cand.mask()[i]) continue;
                    double dot = 0.0;
                    for (int c = 0; c < 3; ++c)
                        dot += static_cast<double>(normals.vectors()[3 * i + c]) *
                               cand.vectors()[3 * i + c];
                    dot = std::clamp(dot, -1.0, 1.0);
                    angle_acc += std::acos(dot) * 180.0 / std::numbers::pi;
                    ++angle_count;
                }
                rec.normal_angle_mean_deg =
                    angle_count ? angle_acc / static_cast<double>(angle_count) : 0.0;
                normals = std::move(cand);
                energy = cand_energy;
                consistency = cand_consistency;
            }
        }

        trace.records.push_back(rec);
    }
    trace.final_energy = energy;
    return RefineResult{std::move(cur), std::move(normals), std::move(trace)};
}

} // namespace ws::refine
