#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wavestereo/core.hpp"
#include "wavestereo/synth.hpp"
#include "wavestereo/wavelet.hpp"

namespace ws::cfg {

/// Ordered `key = value` text store with `#` comments. Duplicate keys are
/// rejected; lookups that fail name the key. This is the one config format
/// used across the toolkit (operator parameters, rigs, scene specs,
/// manifests).
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);
    static KeyValueConfig load(const std::filesystem::path& path);

    std::string to_text() const;
    void save(const std::filesystem::path& path) const;

    bool has(const std::string& key) const;
    void set(const std::string& key, std::string value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, long long value);

    std::string get_string(const std::string& key) const;
    std::string get_string_or(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double_or(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int_or(const std::string& key, long long fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::optional<std::string> find(const std::string& key) const;
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Wavelet-convolution parameter codec. Keys: levels, kernel_size,
/// padding_mode, betas (comma list, one per level) and
/// weights.<level>.<band> (comma list of kernel_size^2 taps, bands a/h/v/d;
/// level 0 carries only band a). Omitted weights default to identity kernels,
/// omitted betas to 1.
wavelet::WtConvParams wtconv_params_from_config(const KeyValueConfig& cfg);
KeyValueConfig wtconv_params_to_config(const wavelet::WtConvParams& params);

/// Stereo rig codec under a key prefix (default "rig."): fx, fy, cx, cy,
/// baseline, max_disparity, min_depth, max_depth.
StereoRig rig_from_config(const KeyValueConfig& cfg, const std::string& prefix = "rig.");
void rig_to_config(KeyValueConfig& cfg, const StereoRig& rig,
                   const std::string& prefix = "rig.");

/// Scene spec codec (scene.*, texture.* and rig.* keys).
synth::SceneSpec scene_spec_from_config(const KeyValueConfig& cfg);
KeyValueConfig scene_spec_to_config(const synth::SceneSpec& spec);

} // namespace ws::cfg
