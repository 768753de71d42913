#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wavestereo/core.hpp"

namespace ws::io {

/// Grayscale PFM ("Pf"), rows stored bottom-to-top, 32-bit floats; the sign of
/// the scale line encodes endianness (negative = little-endian). Round trips
/// are bit-exact for finite values. Color ("PF") files are rejected.
Image read_pfm(const std::filesystem::path& path);
void write_pfm(const Image& image, const std::filesystem::path& path);

/// 16-bit grayscale PNG interchange: depth = raw * scale, raw 0 encodes an
/// invalid pixel. Quantization error is bounded by scale/2 for depths inside
/// (scale/2, 65535 * scale]; valid depths that would round to 0 are stored as
/// raw 1, values above the range are an error.
DepthMap read_depth_png16(const std::filesystem::path& path, double scale);
void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path,
                       double scale);

/// 8-bit RGB normal visualization encoding: channel = round(255 * (n * 0.5 +
/// 0.5)) with round-half-away-from-zero; (0, 0, 0) encodes an invalid pixel
/// (unreachable for unit vectors). Decoding renormalizes and clamps nz to the
/// camera-facing half-space.
std::array<std::uint8_t, 3> encode_normal_rgb(float nx, float ny, float nz);
std::array<float, 3> decode_normal_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b);

void write_normal_png(const NormalMap& normals, const std::filesystem::path& path);
NormalMap read_normal_png(const std::filesystem::path& path);

/// 8-bit grayscale PNG, used for boolean masks and previews.
void write_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height,
                     const std::filesystem::path& path);
std::vector<std::uint8_t> read_gray8_png(const std::filesystem::path& path, int& width,
                                         int& height);

struct ManifestEntry {
    std::string left;
    std::string right;
    std::optional<std::string> depth_gt;  // 16-bit PNG or PFM
    std::optional<std::string> normal_gt; // normal PNG
};

/// Text manifest: rig.* key-value lines plus a depth_scale line, followed by
/// one `entry: left=... right=... [depth=...] [normals=...]` line per stereo
/// pair. Paths are stored relative to the manifest file and must resolve at
/// load time.
struct DatasetManifest {
    StereoRig rig;
    double depth_scale = 15.0 / 65535.0; // meters per 16-bit unit
    std::vector<ManifestEntry> entries;
    std::filesystem::path base_dir; // set on load; resolves relative paths

    std::filesystem::path resolve(const std::string& relative) const;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

} // namespace ws::io
