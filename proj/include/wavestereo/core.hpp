#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ws {

// Error taxonomy. Everything thrown by this library derives from Error so
// callers can catch one base type at pipeline boundaries.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Mismatched or unusable raster dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Argument outside its mathematical domain (FoV >= 180 deg, temperature <= 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise unusable numeric payload.
class DataError : public Error {
public:
    using Error::Error;
};

// Reduction over an empty valid set (losses and metrics need >= 1 valid pixel).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

// Malformed serialized input. Carries the byte offset where parsing failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}
    std::size_t byte_offset() const noexcept { return byte_offset_; }

private:
    std::size_t byte_offset_ = 0;
};

// Bad config file, manifest, or CLI wiring.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Single-channel raster of finite float intensities, row-major, row 0 at the top.
/// Pixel centers sit at integer coordinates.
class Image {
public:
    Image() = default;
    Image(int width, int height, std::vector<float> data);

    static Image filled(int width, int height, float value);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    float at(int x, int y) const { return data_[idx(x, y)]; }
    std::span<const float> data() const noexcept { return data_; }

    std::size_t idx(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> data_;
};

/// Pinhole intrinsics in pixels. The principal point may be fractional.
struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx, double fy, double cx, double cy);

    // Principal point must fall inside the image once a raster size is known.
    void validate_for_size(int width, int height) const;
};

/// fx = (width/2) / tan(fov/2), principal point at the image center ((w-1)/2, (h-1)/2).
CameraIntrinsics intrinsics_from_fov(double fov_deg, int width, int height);

/// Rectified stereo camera: intrinsics, metric baseline, disparity search range
/// and the metric depth window used for evaluation clipping.
struct StereoRig {
    CameraIntrinsics intrinsics;
    double baseline = 0.1;   // meters
    int max_disparity = 64;  // pixels
    double min_depth = 0.5;  // meters
    double max_depth = 15.0; // meters

    StereoRig() = default;
    StereoRig(CameraIntrinsics k, double baseline, int max_disparity,
              double min_depth, double max_depth);
};

namespace detail {
void validate_mask_grid(int width, int height, std::size_t values, std::size_t mask,
                        const char* what);
}

/// Per-pixel metric depth in meters with an explicit validity mask.
/// Valid pixels are finite and strictly positive; invalid pixels are excluded
/// from every metric and loss. No sentinel values inside the value grid.
class DepthMap {
public:
    DepthMap() = default;
    DepthMap(int width, int height, std::vector<float> values,
             std::vector<std::uint8_t> mask);

    static DepthMap all_invalid(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    float value(int x, int y) const { return values_[idx(x, y)]; }
    bool valid(int x, int y) const { return mask_[idx(x, y)] != 0; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<const std::uint8_t> mask() const noexcept { return mask_; }
    std::size_t valid_count() const noexcept;

    std::size_t idx(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
    std::vector<std::uint8_t> mask_;
};

/// Per-pixel disparity in pixels with a validity mask. Unlike depth, a valid
/// disparity may be exactly zero (tie-break and far-field conventions need it).
class DisparityMap {
public:
    DisparityMap() = default;
    DisparityMap(int width, int height, std::vector<float> values,
                 std::vector<std::uint8_t> mask);

    static DisparityMap all_invalid(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    float value(int x, int y) const { return values_[idx(x, y)]; }
    bool valid(int x, int y) const { return mask_[idx(x, y)] != 0; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<const std::uint8_t> mask() const noexcept { return mask_; }
    std::size_t valid_count() const noexcept;

    std::size_t idx(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> values_;
    std::vector<std::uint8_t> mask_;
};

/// Per-pixel unit 3-vectors stored interleaved (nx, ny, nz). Camera-facing
/// convention: the camera looks along +Z and every valid normal has nz <= 0.
class NormalMap {
public:
    static constexpr double kUnitNormTol = 1e-6;

    NormalMap() = default;
    NormalMap(int width, int height, std::vector<float> vectors,
              std::vector<std::uint8_t> mask);

    static NormalMap all_invalid(int width, int height);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    float nx(int x, int y) const { return vectors_[3 * idx(x, y) + 0]; }
    float ny(int x, int y) const { return vectors_[3 * idx(x, y) + 1]; }
    float nz(int x, int y) const { return vectors_[3 * idx(x, y) + 2]; }
    bool valid(int x, int y) const { return mask_[idx(x, y)] != 0; }

    std::span<const float> vectors() const noexcept { return vectors_; }
    std::span<const std::uint8_t> mask() const noexcept { return mask_; }
    std::size_t valid_count() const noexcept;

    std::size_t idx(int x, int y) const noexcept {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<float> vectors_; // 3 floats per pixel
    std::vector<std::uint8_t> mask_;
};

} // namespace ws
