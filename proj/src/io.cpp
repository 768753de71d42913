#include "wavestereo/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "wavestereo/config.hpp"

namespace ws::io {

namespace {

constexpr int kMaxDimension = 1 << 16;
// Declared-size cap so corrupt headers cannot trigger huge allocations.
constexpr std::size_t kMaxPixels = std::size_t{1} << 26;

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("short write to '" + path.string() + "'");
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

// Byte-offset-tracking reader for binary parsers.
struct Cursor {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const { throw FormatError(msg, pos); }

    unsigned char byte() {
        if (pos >= buf.size()) fail("unexpected end of file");
        return buf[pos++];
    }

    void expect_remaining(std::size_t n, const char* what) const {
        if (buf.size() - pos < n)
            throw FormatError(std::string("truncated ") + what, pos);
    }

    std::string token() {
        while (pos < buf.size() && is_space(buf[pos])) ++pos;
        const std::size_t start = pos;
        while (pos < buf.size() && !is_space(buf[pos])) ++pos;
        if (pos == start) fail("expected a header token");
        return std::string(buf.begin() + static_cast<std::ptrdiff_t>(start),
                           buf.begin() + static_cast<std::ptrdiff_t>(pos));
    }
};

// ---------------------------------------------------------------- PFM ------

int parse_pfm_dim(Cursor& c, const char* what) {
    const std::size_t at = c.pos;
    const std::string tok = c.token();
    int v = 0;
    for (char ch : tok) {
        if (ch < '0' || ch > '9') throw FormatError(std::string("bad PFM ") + what, at);
        v = v * 10 + (ch - '0');
        if (v > kMaxDimension) throw FormatError(std::string("implausible PFM ") + what, at);
    }
    if (v < 1) throw FormatError(std::string("bad PFM ") + what, at);
    return v;
}

// -------------------------------------------------------------- zlib -------

std::vector<unsigned char> zlib_deflate(const std::vector<unsigned char>& src) {
    uLongf bound = compressBound(static_cast<uLong>(src.size()));
    std::vector<unsigned char> out(bound);
    if (compress2(out.data(), &bound, src.data(), static_cast<uLong>(src.size()), 6) != Z_OK)
        throw Error("deflate failed");
    out.resize(bound);
    return out;
}

std::vector<unsigned char> zlib_inflate(const unsigned char* src, std::size_t len,
                                        std::size_t expected, std::size_t offset) {
    std::vector<unsigned char> out(expected);
    uLongf out_len = static_cast<uLongf>(expected);
    const int rc = uncompress(out.data(), &out_len, src, static_cast<uLong>(len));
    if (rc != Z_OK || out_len != expected)
        throw FormatError("corrupt or truncated PNG pixel stream", offset);
    return out;
}

// --------------------------------------------------------------- PNG -------

constexpr unsigned char kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

void put_u32be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

void append_chunk(std::vector<unsigned char>& out, const char type[4],
                  const std::vector<unsigned char>& data) {
    put_u32be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t type_at = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + type_at, static_cast<uInt>(4 + data.size()));
    put_u32be(out, static_cast<std::uint32_t>(crc));
}

// Scanlines must already carry their leading filter byte.
std::vector<unsigned char> encode_png(int width, int height, int bit_depth, int color_type,
                                      const std::vector<unsigned char>& raw_scanlines) {
    std::vector<unsigned char> out(kPngSignature, kPngSignature + 8);
    std::vector<unsigned char> ihdr;
    put_u32be(ihdr, static_cast<std::uint32_t>(width));
    put_u32be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(static_cast<unsigned char>(bit_depth));
    ihdr.push_back(static_cast<unsigned char>(color_type));
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter method
    ihdr.push_back(0); // no interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", zlib_deflate(raw_scanlines));
    append_chunk(out, "IEND", {});
    return out;
}

struct PngImage {
    int width = 0, height = 0;
    int bit_depth = 0, color_type = 0;
    std::vector<unsigned char> pixels; // de-filtered, row-major
};

int channels_for_color_type(int color_type, std::size_t offset) {
    switch (color_type) {
    case 0: return 1; // grayscale
    case 2: return 3; // RGB
    default: throw FormatError("unsupported PNG color type " + std::to_string(color_type),
                               offset);
    }
}

unsigned char paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return static_cast<unsigned char>(a);
    if (pb <= pc) return static_cast<unsigned char>(b);
    return static_cast<unsigned char>(c);
}

PngImage decode_png(const std::vector<unsigned char>& bytes) {
    Cursor c{bytes};
    c.expect_remaining(8, "PNG signature");
    if (!std::equal(kPngSignature, kPngSignature + 8, bytes.begin()))
        throw FormatError("not a PNG file (bad signature)", 0);
    c.pos = 8;

    auto read_u32be = [&](const char* what) {
        c.expect_remaining(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | c.byte();
        return v;
    };

    PngImage img;
    bool have_ihdr = false, have_iend = false;
    std::vector<unsigned char> idat;
    while (!have_iend) {
        const std::uint32_t len = read_u32be("chunk length");
        if (len > (1u << 30)) c.fail("implausible chunk length");
        c.expect_remaining(4, "chunk type");
        char type[5] = {};
        for (int i = 0; i < 4; ++i) type[i] = static_cast<char>(c.byte());
        const std::size_t data_at = c.pos;
        c.expect_remaining(static_cast<std::size_t>(len) + 4, "chunk payload");
        if (std::strcmp(type, "IHDR") == 0) {
            if (len != 13) throw FormatError("bad IHDR length", data_at);
            img.width = static_cast<int>(read_u32be("IHDR width"));
            img.height = static_cast<int>(read_u32be("IHDR height"));
            if (img.width < 1 || img.height < 1 || img.width > kMaxDimension ||
                img.height > kMaxDimension ||
                static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) >
                    kMaxPixels)
                throw FormatError("implausible PNG dimensions", data_at);
            img.bit_depth = c.byte();
            img.color_type = c.byte();
            if (c.byte() != 0) throw FormatError("unsupported PNG compression method", c.pos - 1);
            if (c.byte() != 0) throw FormatError("unsupported PNG filter method", c.pos - 1);
            if (c.byte() != 0) throw FormatError("interlaced PNG not supported", c.pos - 1);
            have_ihdr = true;
        } else if (std::strcmp(type, "IDAT") == 0) {
            if (!have_ihdr) throw FormatError("IDAT before IHDR", data_at);
            idat.insert(idat.end(), bytes.begin() + static_cast<std::ptrdiff_t>(c.pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(c.pos + len));
            c.pos += len;
        } else if (std::strcmp(type, "IEND") == 0) {
            have_iend = true;
            c.pos += len;
        } else {
            c.pos += len; // ancillary chunk: skip
        }
        c.pos += 4; // CRC (not verified; zlib adler catches payload corruption)
    }
    if (!have_ihdr) throw FormatError("missing IHDR", c.pos);
    if (img.bit_depth != 8 && img.bit_depth != 16)
        throw FormatError("unsupported PNG bit depth " + std::to_string(img.bit_depth), 16);
    const int channels = channels_for_color_type(img.color_type, 16);
    const std::size_t bpp = static_cast<std::size_t>(channels) * (img.bit_depth / 8);
    const std::size_t rowbytes = bpp * static_cast<std::size_t>(img.width);
    const std::size_t expected = (rowbytes + 1) * static_cast<std::size_t>(img.height);
    if (idat.empty()) throw FormatError("missing IDAT", c.pos);
    std::vector<unsigned char> raw = zlib_inflate(idat.data(), idat.size(), expected, 8);

    // De-filter in place into the pixel buffer.
    img.pixels.assign(rowbytes * static_cast<std::size_t>(img.height), 0);
    for (int y = 0; y < img.height; ++y) {
        const unsigned char* src = raw.data() + static_cast<std::size_t>(y) * (rowbytes + 1);
        unsigned char* dst = img.pixels.data() + static_cast<std::size_t>(y) * rowbytes;
        const unsigned char* prev =
            y > 0 ? img.pixels.data() + static_cast<std::size_t>(y - 1) * rowbytes : nullptr;
        const unsigned char filter = src[0];
        ++src;
        switch (filter) {
        case 0:
            std::memcpy(dst, src, rowbytes);
            break;
        case 1: // Sub
            for (std::size_t i = 0; i < rowbytes; ++i)
                dst[i] = static_cast<unsigned char>(src[i] + (i >= bpp ? dst[i - bpp] : 0));
            break;
        case 2: // Up
            for (std::size_t i = 0; i < rowbytes; ++i)
                dst[i] = static_cast<unsigned char>(src[i] + (prev ? prev[i] : 0));
            break;
        case 3: // Average
            for (std::size_t i = 0; i < rowbytes; ++i) {
                const int left = i >= bpp ? dst[i - bpp] : 0;
                const int up = prev ? prev[i] : 0;
                dst[i] = static_cast<unsigned char>(src[i] + (left + up) / 2);
            }
            break;
        case 4: // Paeth
            for (std::size_t i = 0; i < rowbytes; ++i) {
                const int left = i >= bpp ? dst[i - bpp] : 0;
                const int up = prev ? prev[i] : 0;
                const int ul = (prev && i >= bpp) ? prev[i - bpp] : 0;
                dst[i] = static_cast<unsigned char>(src[i] + paeth(left, up, ul));
            }
            break;
        default:
            throw FormatError("bad PNG filter type " + std::to_string(filter),
                              static_cast<std::size_t>(y) * (rowbytes + 1));
        }
    }
    return img;
}

} // namespace

Image read_pfm(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    Cursor c{bytes};
    const std::string magic = c.token();
    if (magic == "PF") throw FormatError("color PFM ('PF') is not supported", 0);
    if (magic != "Pf") throw FormatError("not a grayscale PFM (missing 'Pf' magic)", 0);
    const int width = parse_pfm_dim(c, "width");
    const int height = parse_pfm_dim(c, "height");
    const std::size_t scale_at = c.pos;
    const std::string scale_tok = c.token();
    char* end = nullptr;
    const double scale = std::strtod(scale_tok.c_str(), &end);
    if (end != scale_tok.c_str() + scale_tok.size() || scale == 0.0 || !std::isfinite(scale))
        throw FormatError("bad PFM scale '" + scale_tok + "'", scale_at);
    // Exactly one whitespace byte separates the header from the payload.
    if (c.pos >= bytes.size() || !is_space(bytes[c.pos]))
        throw FormatError("missing separator before PFM payload", c.pos);
    ++c.pos;

    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    c.expect_remaining(4 * n, "PFM payload");
    const bool file_little = scale < 0.0;
    const bool host_little = std::endian::native == std::endian::little;

    std::vector<float> data(n);
    for (int y = 0; y < height; ++y) {
        // PFM rows run bottom-to-top.
        const std::size_t src_row = c.pos + 4 * static_cast<std::size_t>(height - 1 - y) *
                                                static_cast<std::size_t>(width);
        for (int x = 0; x < width; ++x) {
            unsigned char b[4];
            std::memcpy(b, bytes.data() + src_row + 4 * static_cast<std::size_t>(x), 4);
            if (file_little != host_little) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
            float v;
            std::memcpy(&v, b, 4);
            data[static_cast<std::size_t>(y) * width + x] = v;
        }
    }
    return Image(width, height, std::move(data));
}

void write_pfm(const Image& image, const std::filesystem::path& path) {
    const bool host_little = std::endian::native == std::endian::little;
    std::string header = "Pf\n" + std::to_string(image.width()) + " " +
                         std::to_string(image.height()) + "\n" +
                         (host_little ? "-1.0" : "1.0") + "\n";
    std::vector<unsigned char> bytes(header.begin(), header.end());
    bytes.resize(header.size() + 4 * image.size());
    unsigned char* out = bytes.data() + header.size();
    for (int y = image.height() - 1; y >= 0; --y)
        for (int x = 0; x < image.width(); ++x) {
            const float v = image.at(x, y);
            std::memcpy(out, &v, 4);
            out += 4;
        }
    write_file_bytes(path, bytes);
}

DepthMap read_depth_png16(const std::filesystem::path& path, double scale) {
    if (!(scale > 0.0)) throw DomainError("read_depth_png16: scale must be > 0");
    const PngImage png = decode_png(read_file_bytes(path));
    if (png.bit_depth != 16 || png.color_type != 0)
        throw FormatError("expected 16-bit grayscale PNG, got bit depth " +
                              std::to_string(png.bit_depth) + " color type " +
                              std::to_string(png.color_type),
                          16);
    const std::size_t n = static_cast<std::size_t>(png.width) * png.height;
    std::vector<float> vals(n, 0.0f);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned raw = (static_cast<unsigned>(png.pixels[2 * i]) << 8) |
                             png.pixels[2 * i + 1];
        if (raw == 0) continue;
        vals[i] = static_cast<float>(raw * scale);
        mask[i] = 1;
    }
    return DepthMap(png.width, png.height, std::move(vals), std::move(mask));
}

void write_depth_png16(const DepthMap& depth, const std::filesystem::path& path,
                       double scale) {
    if (!(scale > 0.0)) throw DomainError("write_depth_png16: scale must be > 0");
    const int w = depth.width(), h = depth.height();
    const std::size_t rowbytes = 2 * static_cast<std::size_t>(w);
    std::vector<unsigned char> raw((rowbytes + 1) * static_cast<std::size_t>(h), 0);
    for (int y = 0; y < h; ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (rowbytes + 1);
        row[0] = 0; // filter: none
        for (int x = 0; x < w; ++x) {
            unsigned code = 0;
            if (depth.valid(x, y)) {
                const double q = std::floor(depth.value(x, y) / scale + 0.5);
                if (q > 65535.0)
                    throw DomainError("write_depth_png16: depth " +
                                      std::to_string(depth.value(x, y)) +
                                      " exceeds the 16-bit range at this scale");
                code = std::max(1u, static_cast<unsigned>(q));
            }
            row[1 + 2 * x] = static_cast<unsigned char>(code >> 8);
            row[2 + 2 * x] = static_cast<unsigned char>(code & 0xFF);
        }
    }
    write_file_bytes(path, encode_png(w, h, 16, 0, raw));
}

std::array<std::uint8_t, 3> encode_normal_rgb(float nx, float ny, float nz) {
    std::array<std::uint8_t, 3> rgb{};
    const float n[3] = {nx, ny, nz};
    for (int ch = 0; ch < 3; ++ch) {
        // round half away from zero; arguments land in [0, 255]
        const double v = 255.0 * (static_cast<double>(n[ch]) * 0.5 + 0.5);
        rgb[static_cast<std::size_t>(ch)] =
            static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
    return rgb;
}

std::array<float, 3> decode_normal_rgb(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    double v[3] = {r / 255.0 * 2.0 - 1.0, g / 255.0 * 2.0 - 1.0, b / 255.0 * 2.0 - 1.0};
    v[2] = std::min(v[2], 0.0); // quantization can nudge nz just above zero
    const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (norm < 1e-6) return {0.0f, 0.0f, 0.0f};
    return {static_cast<float>(v[0] / norm), static_cast<float>(v[1] / norm),
            static_cast<float>(v[2] / norm)};
}

void write_normal_png(const NormalMap& normals, const std::filesystem::path& path) {
    const int w = normals.width(), h = normals.height();
    const std::size_t rowbytes = 3 * static_cast<std::size_t>(w);
    std::vector<unsigned char> raw((rowbytes + 1) * static_cast<std::size_t>(h), 0);
    for (int y = 0; y < h; ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (rowbytes + 1);
        row[0] = 0;
        for (int x = 0; x < w; ++x) {
            std::array<std::uint8_t, 3> rgb{0, 0, 0}; // (0,0,0) marks invalid
            if (normals.valid(x, y))
                rgb = encode_normal_rgb(normals.nx(x, y), normals.ny(x, y),
                                        normals.nz(x, y));
            std::memcpy(row + 1 + 3 * x, rgb.data(), 3);
        }
    }
    write_file_bytes(path, encode_png(w, h, 8, 2, raw));
}

NormalMap read_normal_png(const std::filesystem::path& path) {
    const PngImage png = decode_png(read_file_bytes(path));
    if (png.bit_depth != 8 || png.color_type != 2)
        throw FormatError("expected 8-bit RGB normal PNG", 16);
    const std::size_t n = static_cast<std::size_t>(png.width) * png.height;
    std::vector<float> vecs(3 * n, 0.0f);
    std::vector<std::uint8_t> mask(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const unsigned char* rgb = png.pixels.data() + 3 * i;
        if (rgb[0] == 0 && rgb[1] == 0 && rgb[2] == 0) continue;
        const std::array<float, 3> v = decode_normal_rgb(rgb[0], rgb[1], rgb[2]);
        if (v[0] == 0.0f && v[1] == 0.0f && v[2] == 0.0f) continue;
        for (int ch = 0; ch < 3; ++ch) vecs[3 * i + ch] = v[static_cast<std::size_t>(ch)];
        mask[i] = 1;
    }
    return NormalMap(png.width, png.height, std::move(vecs), std::move(mask));
}

void write_gray8_png(const std::vector<std::uint8_t>& pixels, int width, int height,
                     const std::filesystem::path& path) {
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw DimensionError("write_gray8_png: pixel count mismatch");
    const std::size_t rowbytes = static_cast<std::size_t>(width);
    std::vector<unsigned char> raw((rowbytes + 1) * static_cast<std::size_t>(height), 0);
    for (int y = 0; y < height; ++y) {
        unsigned char* row = raw.data() + static_cast<std::size_t>(y) * (rowbytes + 1);
        row[0] = 0;
        std::memcpy(row + 1, pixels.data() + static_cast<std::size_t>(y) * width, rowbytes);
    }
    write_file_bytes(path, encode_png(width, height, 8, 0, raw));
}

std::vector<std::uint8_t> read_gray8_png(const std::filesystem::path& path, int& width,
                                         int& height) {
    const PngImage png = decode_png(read_file_bytes(path));
    if (png.bit_depth != 8 || png.color_type != 0)
        throw FormatError("expected 8-bit grayscale PNG", 16);
    width = png.width;
    height = png.height;
    return png.pixels;
}

std::filesystem::path DatasetManifest::resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p : base_dir / p;
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest '" + path.string() + "'");
    std::string line, kv_text;
    std::vector<std::string> entry_lines;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line.compare(first, 6, "entry:") == 0)
            entry_lines.push_back(line.substr(first + 6));
        else
            kv_text += line + "\n";
    }

    DatasetManifest m;
    m.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const cfg::KeyValueConfig kv = cfg::KeyValueConfig::parse(kv_text);
    if (!kv.has("rig.fx")) throw ConfigError("manifest '" + path.string() + "': missing rig");
    m.rig = cfg::rig_from_config(kv);
    m.depth_scale = kv.get_double_or("depth_scale", m.depth_scale);

    for (std::size_t idx = 0; idx < entry_lines.size(); ++idx) {
        ManifestEntry e;
        std::istringstream fields(entry_lines[idx]);
        std::string field;
        while (fields >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos)
                throw ConfigError("manifest entry " + std::to_string(idx) +
                                  ": bad field '" + field + "'");
            const std::string key = field.substr(0, eq), value = field.substr(eq + 1);
            if (key == "left") e.left = value;
            else if (key == "right") e.right = value;
            else if (key == "depth") e.depth_gt = value;
            else if (key == "normals") e.normal_gt = value;
            else
                throw ConfigError("manifest entry " + std::to_string(idx) +
                                  ": unknown field '" + key + "'");
        }
        if (e.left.empty() || e.right.empty())
            throw ConfigError("manifest entry " + std::to_string(idx) +
                              ": left and right are required");
        for (const std::string* p : {&e.left, &e.right}) {
            if (!std::filesystem::exists(m.resolve(*p)))
                throw ConfigError("manifest entry " + std::to_string(idx) +
                                  ": path does not resolve: '" + *p + "'");
        }
        for (const auto* opt : {&e.depth_gt, &e.normal_gt})
            if (*opt && !std::filesystem::exists(m.resolve(**opt)))
                throw ConfigError("manifest entry " + std::to_string(idx) +
                                  ": path does not resolve: '" + **opt + "'");
        m.entries.push_back(std::move(e));
    }
    return m;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    cfg::KeyValueConfig kv;
    cfg::rig_to_config(kv, manifest.rig);
    kv.set_double("depth_scale", manifest.depth_scale);
    std::string text = kv.to_text();
    for (const auto& e : manifest.entries) {
        text += "entry: left=" + e.left + " right=" + e.right;
        if (e.depth_gt) text += " depth=" + *e.depth_gt;
        if (e.normal_gt) text += " normals=" + *e.normal_gt;
        text += "\n";
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << text;
}

} // namespace ws::io
