#include "wavestereo/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "wavestereo/refine.hpp"

namespace ws::geometry {

namespace {

// Raw 3x3 Sobel taps, row-major (dy then dx), before derivative normalization.
constexpr double kSobelU[9] = {-1, 0, 1, -2, 0, 2, -1, 0, 1};
constexpr double kSobelV[9] = {-1, -2, -1, 0, 0, 0, 1, 2, 1};

} // namespace

GradientField::GradientField(int width, int height, std::vector<double> du,
                             std::vector<double> dv, std::vector<std::uint8_t> mask)
    : width_(width), height_(height), du_(std::move(du)), dv_(std::move(dv)),
      mask_(std::move(mask)) {
    detail::validate_mask_grid(width, height, du_.size(), mask_.size(), "GradientField");
    if (dv_.size() != du_.size())
        throw DimensionError("GradientField: du/dv size mismatch");
    for (std::size_t i = 0; i < du_.size(); ++i)
        if (mask_[i] && (!std::isfinite(du_[i]) || !std::isfinite(dv_[i])))
            throw DataError("GradientField: non-finite gradient at flat index " +
                            std::to_string(i));
}

std::size_t GradientField::valid_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(mask_.begin(), mask_.end(), [](std::uint8_t m) { return m != 0; }));
}

void ConsistencyConfig::validate() const {
    if (!(huber_delta > 0.0) || !(denom_epsilon > 0.0) || !(nz_epsilon > 0.0) ||
        !(sobel_norm > 0.0))
        throw DomainError("ConsistencyConfig: all guards must be > 0");
}

std::array<double, 3> backproject(double u, double v, double z, const CameraIntrinsics& k) {
    if (!(z > 0.0)) throw DomainError("backproject: depth must be > 0");
    return {z * (u - k.cx) / k.fx, z * (v - k.cy) / k.fy, z};
}

std::array<double, 2> project(const std::array<double, 3>& p, const CameraIntrinsics& k) {
    if (!(p[2] > 0.0)) throw DomainError("project: point must lie in front of the camera");
    return {k.fx * p[0] / p[2] + k.cx, k.fy * p[1] / p[2] + k.cy};
}

NormalMap normals_from_depth(const DepthMap& depth, const CameraIntrinsics& k, int window,
                             double reject_rel) {
    if (window < 3 || window % 2 == 0)
        throw DomainError("normals_from_depth: window must be odd and >= 3");
    if (!(reject_rel > 0.0))
        throw DomainError("normals_from_depth: reject_rel must be > 0");
    constexpr int kMinNeighbors = 6;

    const int w = depth.width(), h = depth.height();
    const int r = window / 2;
    std::vector<float> vecs(3 * static_cast<std::size_t>(w) * h, 0.0f);
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(w) * h, 0);

    std::vector<std::array<double, 3>> pts;
    pts.reserve(static_cast<std::size_t>(window) * window);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!depth.valid(x, y)) continue;
            const double zc = depth.value(x, y);
            pts.clear();
            int neighbors = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = y + dy;
                if (yy < 0 || yy >= h) continue;
                for (int dx = -r; dx <= r; ++dx) {
                    const int xx = x + dx;
                    if (xx < 0 || xx >= w) continue;
                    if (!depth.valid(xx, yy)) continue;
                    const double zn = depth.value(xx, yy);
                    if (std::abs(zn - zc) > reject_rel * zc) continue;
                    pts.push_back(backproject(xx, yy, zn, k));
                    if (dx != 0 || dy != 0) ++neighbors;
                }
            }
            if (neighbors < kMinNeighbors) continue;

            // Least-squares regression of Z on (X, Y): depth noise lives in Z,
            // so vertical residuals are the right objective (a total
            // least-squares fit degenerates once the noise is comparable to
            // the window's metric extent). The surface is a graph Z = aX + bY
            // + c locally, giving the camera-facing normal (a, b, -1) / norm.
            double mx = 0, my = 0, mz = 0;
            for (const auto& p : pts) {
                mx += p[0];
                my += p[1];
                mz += p[2];
            }
            const double inv = 1.0 / static_cast<double>(pts.size());
            mx *= inv;
            my *= inv;
            mz *= inv;
            double sxx = 0, sxy = 0, syy = 0, sxz = 0, syz = 0;
            for (const auto& p : pts) {
                const double px = p[0] - mx, py = p[1] - my, pz = p[2] - mz;
                sxx += px * px;
                sxy += px * py;
                syy += py * py;
                sxz += px * pz;
                syz += py * pz;
            }
            const double det = sxx * syy - sxy * sxy;
            if (!(det > 1e-12 * (sxx * syy + 1e-300))) continue; // collinear points
            const double a = (syy * sxz - sxy * syz) / det;
            const double b = (sxx * syz - sxy * sxz) / det;
            const double norm = std::sqrt(a * a + b * b + 1.0);
            const double nx = a / norm, ny = b / norm, nz = -1.0 / norm;
            const std::size_t i = depth.idx(x, y);
            vecs[3 * i + 0] = static_cast<float>(nx);
            vecs[3 * i + 1] = static_cast<float>(ny);
            vecs[3 * i + 2] = static_cast<float>(nz);
            mask[i] = 1;
        }
    }
    return NormalMap(w, h, std::move(vecs), std::move(mask));
}

GradientField grad_from_normals(const DepthMap& depth, const NormalMap& normals,
                                const CameraIntrinsics& k, const ConsistencyConfig& cfg) {
    cfg.validate();
    if (depth.width() != normals.width() || depth.height() != normals.height())
        throw DimensionError("grad_from_normals: depth/normal dimensions differ");
    const int w = depth.width(), h = depth.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> du(n, 0.0), dv(n, 0.0);
    std::vector<std::uint8_t> mask(n, 0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!depth.valid(x, y) || !normals.valid(x, y)) continue;
            const double nx = normals.nx(x, y), ny = normals.ny(x, y), nz = normals.nz(x, y);
            if (std::abs(nz) < cfg.nz_epsilon) continue;
            const double denom = 1.0 + (nx / nz) * (x - k.cx) / k.fx +
                                 (ny / nz) * (y - k.cy) / k.fy;
            if (std::abs(denom) < cfg.denom_epsilon) continue;
            const double z = depth.value(x, y);
            const std::size_t i = depth.idx(x, y);
            du[i] = (-nx * z / (nz * k.fx)) / denom;
            dv[i] = (-ny * z / (nz * k.fy)) / denom;
            mask[i] = 1;
        }
    }
    return GradientField(w, h, std::move(du), std::move(dv), std::move(mask));
}

GradientField sobel_grad(const DepthMap& depth, const ConsistencyConfig& cfg) {
    cfg.validate();
    const int w = depth.width(), h = depth.height();
    if (w < 3 || h < 3) throw DimensionError("sobel_grad: depth must be at least 3x3");
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> du(n, 0.0), dv(n, 0.0);
    std::vector<std::uint8_t> mask(n, 0);
    for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
            bool ok = true;
            double su = 0.0, sv = 0.0;
            int t = 0;
            for (int dy = -1; dy <= 1 && ok; ++dy) {
                for (int dx = -1; dx <= 1; ++dx, ++t) {
                    if (!depth.valid(x + dx, y + dy)) {
                        ok = false;
                        break;
                    }
                    const double z = depth.value(x + dx, y + dy);
                    su += kSobelU[t] * z;
                    sv += kSobelV[t] * z;
                }
            }
            if (!ok) continue;
            const std::size_t i = depth.idx(x, y);
            du[i] = su * cfg.sobel_norm;
            dv[i] = sv * cfg.sobel_norm;
            mask[i] = 1;
        }
    }
    return GradientField(w, h, std::move(du), std::move(dv), std::move(mask));
}

GradientField consistency_residual(const DepthMap& depth, const NormalMap& normals,
                                   const CameraIntrinsics& k, const ConsistencyConfig& cfg) {
    const GradientField g1 = grad_from_normals(depth, normals, k, cfg);
    const GradientField g2 = sobel_grad(depth, cfg);
    const int w = depth.width(), h = depth.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;
    std::vector<double> du(n, 0.0), dv(n, 0.0);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!g1.mask()[i] || !g2.mask()[i]) continue;
        du[i] = g1.du_values()[i] - g2.du_values()[i];
        dv[i] = g1.dv_values()[i] - g2.dv_values()[i];
        mask[i] = 1;
    }
    return GradientField(w, h, std::move(du), std::move(dv), std::move(mask));
}

double consistency_loss(const DepthMap& depth, const NormalMap& normals,
                        const CameraIntrinsics& k, const ConsistencyConfig& cfg) {
    const GradientField r = consistency_residual(depth, normals, k, cfg);
    double acc = 0.0;
    std::size_t count = 0;
    const std::size_t n = r.mask().size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!r.mask()[i]) continue;
        const double ru = r.du_values()[i], rv = r.dv_values()[i];
        if (cfg.huber_on_magnitude)
            acc += refine::huber(std::sqrt(ru * ru + rv * rv), cfg.huber_delta);
        else
            acc += refine::huber(ru, cfg.huber_delta) + refine::huber(rv, cfg.huber_delta);
        ++count;
    }
    if (count == 0)
        throw DegenerateInputError("consistency_loss: no jointly valid pixels");
    return acc / static_cast<double>(count);
}

std::vector<double> consistency_grad(const DepthMap& depth, const NormalMap& normals,
                                     const CameraIntrinsics& k, const ConsistencyConfig& cfg) {
    const GradientField g1 = grad_from_normals(depth, normals, k, cfg);
    const GradientField g2 = sobel_grad(depth, cfg);
    const int w = depth.width(), h = depth.height();
    const std::size_t n = static_cast<std::size_t>(w) * h;

    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (g1.mask()[i] && g2.mask()[i]) ++count;
    if (count == 0)
        throw DegenerateInputError("consistency_grad: no jointly valid pixels");

    std::vector<double> grad(n, 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = depth.idx(x, y);
            if (!g1.mask()[i] || !g2.mask()[i]) continue;
            const double ru = g1.du_values()[i] - g2.du_values()[i];
            const double rv = g1.dv_values()[i] - g2.dv_values()[i];
            double wu, wv;
            if (cfg.huber_on_magnitude) {
                const double m = std::sqrt(ru * ru + rv * rv);
                if (m > 0.0) {
                    const double hp = refine::huber_deriv(m, cfg.huber_delta);
                    wu = hp * ru / m;
                    wv = hp * rv / m;
                } else {
                    wu = wv = 0.0;
                }
            } else {
                wu = refine::huber_deriv(ru, cfg.huber_delta);
                wv = refine::huber_deriv(rv, cfg.huber_delta);
            }
            // Normal-constraint side: g1 is linear in Z(p) with per-pixel slope.
            const double z = depth.value(x, y);
            grad[i] += wu * (g1.du_values()[i] / z) + wv * (g1.dv_values()[i] / z);
            // Sobel side: scatter the stencil adjoint.
            int t = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx, ++t) {
                    const std::size_t q = depth.idx(x + dx, y + dy);
                    grad[q] -= (wu * kSobelU[t] + wv * kSobelV[t]) * cfg.sobel_norm;
                }
        }
    }
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) grad[i] = depth.mask()[i] ? grad[i] * inv : 0.0;
    return grad;
}

} // namespace ws::geometry
