#include "wavestereo/core.hpp"

#include <algorithm>
#include <numbers>

namespace ws {

namespace {

void require_dims(int width, int height, const char* what) {
    if (width < 1 || height < 1)
        throw DimensionError(std::string(what) + ": dimensions must be >= 1, got " +
                             std::to_string(width) + "x" + std::to_string(height));
}

std::size_t count_nonzero(const std::vector<std::uint8_t>& mask) {
    return static_cast<std::size_t>(
        std::count_if(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; }));
}

} // namespace

namespace detail {

void validate_mask_grid(int width, int height, std::size_t values, std::size_t mask,
                        const char* what) {
    require_dims(width, height, what);
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (values != n)
        throw DimensionError(std::string(what) + ": value grid has " + std::to_string(values) +
                             " entries, expected " + std::to_string(n));
    if (mask != n)
        throw DimensionError(std::string(what) + ": mask has " + std::to_string(mask) +
                             " entries, expected " + std::to_string(n));
}

} // namespace detail

Image::Image(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require_dims(width, height, "Image");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (data_.size() != n)
        throw DimensionError("Image: data has " + std::to_string(data_.size()) +
                             " entries, expected " + std::to_string(n));
    for (std::size_t i = 0; i < data_.size(); ++i)
        if (!std::isfinite(data_[i]))
            throw DataError("Image: non-finite value at flat index " + std::to_string(i));
}

Image Image::filled(int width, int height, float value) {
    require_dims(width, height, "Image");
    return Image(width, height,
                 std::vector<float>(static_cast<std::size_t>(width) *
                                        static_cast<std::size_t>(height),
                                    value));
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy)
    : fx(fx), fy(fy), cx(cx), cy(cy) {
    if (!(fx > 0.0) || !std::isfinite(fx) || !(fy > 0.0) || !std::isfinite(fy))
        throw DomainError("CameraIntrinsics: focal lengths must be positive and finite");
    if (!std::isfinite(cx) || !std::isfinite(cy))
        throw DataError("CameraIntrinsics: principal point must be finite");
}

void CameraIntrinsics::validate_for_size(int width, int height) const {
    require_dims(width, height, "CameraIntrinsics");
    if (cx < 0.0 || cx >= static_cast<double>(width) || cy < 0.0 ||
        cy >= static_cast<double>(height))
        throw DomainError("CameraIntrinsics: principal point (" + std::to_string(cx) + ", " +
                          std::to_string(cy) + ") outside image " + std::to_string(width) +
                          "x" + std::to_string(height));
}

CameraIntrinsics intrinsics_from_fov(double fov_deg, int width, int height) {
    if (!(fov_deg > 0.0) || !(fov_deg < 180.0) || !std::isfinite(fov_deg))
        throw DomainError("intrinsics_from_fov: FoV must lie in (0, 180) degrees, got " +
                          std::to_string(fov_deg));
    if (width < 2 || height < 2)
        throw DimensionError("intrinsics_from_fov: image must be at least 2x2");
    const double half = fov_deg * std::numbers::pi / 360.0;
    const double fx = (static_cast<double>(width) / 2.0) / std::tan(half);
    const double fy = (static_cast<double>(height) / 2.0) / std::tan(half);
    return CameraIntrinsics(fx, fy, (width - 1) / 2.0, (height - 1) / 2.0);
}

StereoRig::StereoRig(CameraIntrinsics k, double baseline, int max_disparity,
                     double min_depth, double max_depth)
    : intrinsics(k), baseline(baseline), max_disparity(max_disparity),
      min_depth(min_depth), max_depth(max_depth) {
    if (!(baseline > 0.0) || !std::isfinite(baseline))
        throw DomainError("StereoRig: baseline must be positive");
    if (max_disparity < 1)
        throw DomainError("StereoRig: max_disparity must be >= 1");
    if (!(min_depth > 0.0) || !(min_depth < max_depth) || !std::isfinite(max_depth))
        throw DomainError("StereoRig: need 0 < min_depth < max_depth");
}

DepthMap::DepthMap(int width, int height, std::vector<float> values,
                   std::vector<std::uint8_t> mask)
    : width_(width), height_(height), values_(std::move(values)), mask_(std::move(mask)) {
    detail::validate_mask_grid(width, height, values_.size(), mask_.size(), "DepthMap");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (mask_[i] && (!std::isfinite(values_[i]) || values_[i] <= 0.0f))
            throw DataError("DepthMap: valid pixel at flat index " + std::to_string(i) +
                            " must be finite and > 0");
}

DepthMap DepthMap::all_invalid(int width, int height) {
    require_dims(width, height, "DepthMap");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    return DepthMap(width, height, std::vector<float>(n, 0.0f),
                    std::vector<std::uint8_t>(n, 0));
}

std::size_t DepthMap::valid_count() const noexcept { return count_nonzero(mask_); }

DisparityMap::DisparityMap(int width, int height, std::vector<float> values,
                           std::vector<std::uint8_t> mask)
    : width_(width), height_(height), values_(std::move(values)), mask_(std::move(mask)) {
    detail::validate_mask_grid(width, height, values_.size(), mask_.size(), "DisparityMap");
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (mask_[i] && (!std::isfinite(values_[i]) || values_[i] < 0.0f))
            throw DataError("DisparityMap: valid pixel at flat index " + std::to_string(i) +
                            " must be finite and >= 0");
}

DisparityMap DisparityMap::all_invalid(int width, int height) {
    require_dims(width, height, "DisparityMap");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    return DisparityMap(width, height, std::vector<float>(n, 0.0f),
                        std::vector<std::uint8_t>(n, 0));
}

std::size_t DisparityMap::valid_count() const noexcept { return count_nonzero(mask_); }

NormalMap::NormalMap(int width, int height, std::vector<float> vectors,
                     std::vector<std::uint8_t> mask)
    : width_(width), height_(height), vectors_(std::move(vectors)), mask_(std::move(mask)) {
    require_dims(width, height, "NormalMap");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (vectors_.size() != 3 * n)
        throw DimensionError("NormalMap: vector grid has " + std::to_string(vectors_.size()) +
                             " entries, expected " + std::to_string(3 * n));
    if (mask_.size() != n)
        throw DimensionError("NormalMap: mask has " + std::to_string(mask_.size()) +
                             " entries, expected " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask_[i]) continue;
        const double x = vectors_[3 * i + 0];
        const double y = vectors_[3 * i + 1];
        const double z = vectors_[3 * i + 2];
        if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
            throw DataError("NormalMap: non-finite normal at flat index " + std::to_string(i));
        const double norm = std::sqrt(x * x + y * y + z * z);
        if (std::abs(norm - 1.0) >= kUnitNormTol)
            throw DataError("NormalMap: normal at flat index " + std::to_string(i) +
                            " has norm " + std::to_string(norm));
        if (z > 0.0)
            throw DataError("NormalMap: normal at flat index " + std::to_string(i) +
                            " violates camera-facing convention (nz > 0)");
    }
}

NormalMap NormalMap::all_invalid(int width, int height) {
    require_dims(width, height, "NormalMap");
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    return NormalMap(width, height, std::vector<float>(3 * n, 0.0f),
                     std::vector<std::uint8_t>(n, 0));
}

std::size_t NormalMap::valid_count() const noexcept { return count_nonzero(mask_); }

} // namespace ws
