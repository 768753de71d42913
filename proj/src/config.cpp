#include "wavestereo/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace ws::cfg {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': cannot parse '" + text +
                          "' as a number");
    return v;
}

long long parse_int(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(text.c_str(), &end, 10);
    if (end == text.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': cannot parse '" + text +
                          "' as an integer");
    return v;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

} // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig cfg;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(text.substr(pos, eol - pos));
        ++line_no;
        if (!line.empty() && line[0] != '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'");
            std::string key = trim(std::string_view(line).substr(0, eq));
            std::string value = trim(std::string_view(line).substr(eq + 1));
            if (key.empty())
                throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
            if (cfg.has(key))
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
            cfg.entries_.emplace_back(std::move(key), std::move(value));
        }
        if (eol >= text.size()) break;
        pos = eol + 1;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string KeyValueConfig::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
        out += k;
        out += " = ";
        out += v;
        out += '\n';
    }
    return out;
}

void KeyValueConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write config file '" + path.string() + "'");
    out << to_text();
}

bool KeyValueConfig::has(const std::string& key) const { return find(key).has_value(); }

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = std::move(value);
            return;
        }
    entries_.emplace_back(key, std::move(value));
}

void KeyValueConfig::set_double(const std::string& key, double value) {
    set(key, format_double(value));
}

void KeyValueConfig::set_int(const std::string& key, long long value) {
    set(key, std::to_string(value));
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    const auto v = find(key);
    if (!v) throw ConfigError("missing config key '" + key + "'");
    return *v;
}

std::string KeyValueConfig::get_string_or(const std::string& key,
                                          const std::string& fallback) const {
    return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key) const {
    return parse_double(key, get_string(key));
}

double KeyValueConfig::get_double_or(const std::string& key, double fallback) const {
    const auto v = find(key);
    return v ? parse_double(key, *v) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    return parse_int(key, get_string(key));
}

long long KeyValueConfig::get_int_or(const std::string& key, long long fallback) const {
    const auto v = find(key);
    return v ? parse_int(key, *v) : fallback;
}

std::uint64_t KeyValueConfig::get_u64_or(const std::string& key,
                                         std::uint64_t fallback) const {
    const auto v = find(key);
    if (!v) return fallback;
    errno = 0;
    char* end = nullptr;
    const unsigned long long u = std::strtoull(v->c_str(), &end, 10);
    if (end == v->c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError("config key '" + key + "': cannot parse '" + *v +
                          "' as an unsigned integer");
    return u;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    const std::string text = get_string(key);
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = trim(std::string_view(text).substr(pos, comma - pos));
        if (item.empty())
            throw ConfigError("config key '" + key + "': empty list element");
        out.push_back(parse_double(key, item));
        if (comma >= text.size()) break;
        pos = comma + 1;
    }
    return out;
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

} // namespace

wavelet::WtConvParams wtconv_params_from_config(const KeyValueConfig& cfg) {
    wavelet::WtConvParams p;
    p.levels = static_cast<int>(cfg.get_int_or("levels", 3));
    p.kernel_size = static_cast<int>(cfg.get_int_or("kernel_size", 3));
    p.padding = wavelet::padding_mode_from_string(cfg.get_string_or("padding_mode", "reflect"));
    if (p.levels < 0) throw ConfigError("wtconv config: levels must be >= 0");

    if (cfg.has("betas")) {
        p.betas = cfg.get_double_list("betas");
        if (p.betas.size() != static_cast<std::size_t>(p.levels))
            throw ConfigError("wtconv config: betas must list exactly `levels` values");
    } else {
        p.betas.assign(static_cast<std::size_t>(p.levels), 1.0);
    }

    p.weights.assign(static_cast<std::size_t>(p.levels) + 1,
                     wavelet::WtConvLevelKernels::identity(p.kernel_size));
    const std::size_t k2 = static_cast<std::size_t>(p.kernel_size) * p.kernel_size;
    for (int level = 0; level <= p.levels; ++level) {
        auto& wl = p.weights[static_cast<std::size_t>(level)];
        const std::array<std::pair<const char*, std::vector<double>*>, 4> bands{
            {{"a", &wl.a}, {"h", &wl.h}, {"v", &wl.v}, {"d", &wl.d}}};
        for (const auto& [name, taps] : bands) {
            const std::string key =
                "weights." + std::to_string(level) + "." + std::string(name);
            if (!cfg.has(key)) continue;
            if (level == 0 && std::string(name) != "a")
                throw ConfigError("wtconv config: level 0 carries only band 'a'");
            *taps = cfg.get_double_list(key);
            if (taps->size() != k2)
                throw ConfigError("wtconv config: '" + key + "' must list kernel_size^2 taps");
        }
    }
    p.validate();
    return p;
}

KeyValueConfig wtconv_params_to_config(const wavelet::WtConvParams& params) {
    params.validate();
    KeyValueConfig cfg;
    cfg.set_int("levels", params.levels);
    cfg.set_int("kernel_size", params.kernel_size);
    cfg.set("padding_mode", wavelet::to_string(params.padding));
    cfg.set("betas", join_doubles(params.betas));
    for (int level = 0; level <= params.levels; ++level) {
        const auto& wl = params.weights[static_cast<std::size_t>(level)];
        const std::string base = "weights." + std::to_string(level) + ".";
        cfg.set(base + "a", join_doubles(wl.a));
        if (level > 0) {
            cfg.set(base + "h", join_doubles(wl.h));
            cfg.set(base + "v", join_doubles(wl.v));
            cfg.set(base + "d", join_doubles(wl.d));
        }
    }
    return cfg;
}

StereoRig rig_from_config(const KeyValueConfig& cfg, const std::string& prefix) {
    const CameraIntrinsics k(cfg.get_double(prefix + "fx"), cfg.get_double(prefix + "fy"),
                             cfg.get_double(prefix + "cx"), cfg.get_double(prefix + "cy"));
    return StereoRig(k, cfg.get_double(prefix + "baseline"),
                     static_cast<int>(cfg.get_int_or(prefix + "max_disparity", 64)),
                     cfg.get_double_or(prefix + "min_depth", 0.5),
                     cfg.get_double_or(prefix + "max_depth", 15.0));
}

void rig_to_config(KeyValueConfig& cfg, const StereoRig& rig, const std::string& prefix) {
    cfg.set_double(prefix + "fx", rig.intrinsics.fx);
    cfg.set_double(prefix + "fy", rig.intrinsics.fy);
    cfg.set_double(prefix + "cx", rig.intrinsics.cx);
    cfg.set_double(prefix + "cy", rig.intrinsics.cy);
    cfg.set_double(prefix + "baseline", rig.baseline);
    cfg.set_int(prefix + "max_disparity", rig.max_disparity);
    cfg.set_double(prefix + "min_depth", rig.min_depth);
    cfg.set_double(prefix + "max_depth", rig.max_depth);
}

synth::SceneSpec scene_spec_from_config(const KeyValueConfig& cfg) {
    synth::SceneSpec spec;
    spec.kind = synth::scene_kind_from_string(cfg.get_string("scene.kind"));
    spec.width = static_cast<int>(cfg.get_int_or("scene.width", 512));
    spec.height = static_cast<int>(cfg.get_int_or("scene.height", 512));
    spec.rig = cfg.has("rig.fx") ? rig_from_config(cfg)
                                 : synth::default_rig(spec.width, spec.height);
    spec.plane_c = cfg.get_double_or("scene.plane_c", spec.plane_c);
    spec.plane_a = cfg.get_double_or("scene.plane_a", spec.plane_a);
    spec.sphere_cx = cfg.get_double_or("scene.sphere_cx", spec.sphere_cx);
    spec.sphere_cy = cfg.get_double_or("scene.sphere_cy", spec.sphere_cy);
    spec.sphere_cz = cfg.get_double_or("scene.sphere_cz", spec.sphere_cz);
    spec.sphere_r = cfg.get_double_or("scene.sphere_r", spec.sphere_r);
    spec.background_c = cfg.get_double_or("scene.background_c", spec.background_c);
    spec.fbm_octaves = static_cast<int>(cfg.get_int_or("scene.fbm_octaves", spec.fbm_octaves));
    spec.fbm_gain = cfg.get_double_or("scene.fbm_gain", spec.fbm_gain);
    spec.fbm_base_depth = cfg.get_double_or("scene.fbm_base_depth", spec.fbm_base_depth);
    spec.fbm_amplitude = cfg.get_double_or("scene.fbm_amplitude", spec.fbm_amplitude);
    spec.fbm_frequency = cfg.get_double_or("scene.fbm_frequency", spec.fbm_frequency);
    spec.seed = cfg.get_u64_or("scene.seed", spec.seed);
    spec.texture.contrast = cfg.get_double_or("texture.contrast", spec.texture.contrast);
    spec.texture.falloff = cfg.get_double_or("texture.falloff", spec.texture.falloff);
    spec.texture.octaves =
        static_cast<int>(cfg.get_int_or("texture.octaves", spec.texture.octaves));
    spec.texture.base_frequency =
        cfg.get_double_or("texture.base_frequency", spec.texture.base_frequency);
    spec.texture.seed = cfg.get_u64_or("texture.seed", spec.texture.seed);
    spec.validate();
    return spec;
}

KeyValueConfig scene_spec_to_config(const synth::SceneSpec& spec) {
    KeyValueConfig cfg;
    cfg.set("scene.kind", synth::to_string(spec.kind));
    cfg.set_int("scene.width", spec.width);
    cfg.set_int("scene.height", spec.height);
    rig_to_config(cfg, spec.rig);
    cfg.set_double("scene.plane_c", spec.plane_c);
    cfg.set_double("scene.plane_a", spec.plane_a);
    cfg.set_double("scene.sphere_cx", spec.sphere_cx);
    cfg.set_double("scene.sphere_cy", spec.sphere_cy);
    cfg.set_double("scene.sphere_cz", spec.sphere_cz);
    cfg.set_double("scene.sphere_r", spec.sphere_r);
    cfg.set_double("scene.background_c", spec.background_c);
    cfg.set_int("scene.fbm_octaves", spec.fbm_octaves);
    cfg.set_double("scene.fbm_gain", spec.fbm_gain);
    cfg.set_double("scene.fbm_base_depth", spec.fbm_base_depth);
    cfg.set_double("scene.fbm_amplitude", spec.fbm_amplitude);
    cfg.set_double("scene.fbm_frequency", spec.fbm_frequency);
    cfg.set("scene.seed", std::to_string(spec.seed));
    cfg.set_double("texture.contrast", spec.texture.contrast);
    cfg.set_double("texture.falloff", spec.texture.falloff);
    cfg.set_int("texture.octaves", spec.texture.octaves);
    cfg.set_double("texture.base_frequency", spec.texture.base_frequency);
    cfg.set("texture.seed", std::to_string(spec.texture.seed));
    return cfg;
}

} // namespace ws::cfg
