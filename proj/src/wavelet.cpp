#include "wavestereo/wavelet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace ws::wavelet {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height())
        throw DimensionError(std::string(what) + ": band dimensions differ (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
}

} // namespace

PaddingMode padding_mode_from_string(std::string_view s) {
    if (s == "reflect") return PaddingMode::Reflect;
    if (s == "periodic") return PaddingMode::Periodic;
    throw ConfigError("unknown padding mode '" + std::string(s) + "'");
}

std::string to_string(PaddingMode mode) {
    return mode == PaddingMode::Reflect ? "reflect" : "periodic";
}

int fold_index(int i, int n, PaddingMode mode) {
    if (mode == PaddingMode::Periodic) {
        int m = i % n;
        if (m < 0) m += n;
        return m;
    }
    // Symmetric extension with period 2n: ... 1 0 | 0 1 ... n-1 | n-1 ... 0 | 0 ...
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

Image pad_to_multiple(const Image& x, int multiple, PaddingMode mode) {
    if (multiple < 1) throw DomainError("pad_to_multiple: multiple must be >= 1");
    const int w = x.width(), h = x.height();
    const int pw = ((w + multiple - 1) / multiple) * multiple;
    const int ph = ((h + multiple - 1) / multiple) * multiple;
    if (pw == w && ph == h) return x;
    std::vector<float> out(static_cast<std::size_t>(pw) * ph);
    for (int y = 0; y < ph; ++y) {
        const int sy = fold_index(y, h, mode);
        for (int xx = 0; xx < pw; ++xx)
            out[static_cast<std::size_t>(y) * pw + xx] = x.at(fold_index(xx, w, mode), sy);
    }
    return Image(pw, ph, std::move(out));
}

Image crop_top_left(const Image& x, int width, int height) {
    if (width > x.width() || height > x.height())
        throw DimensionError("crop_top_left: crop larger than image");
    if (width == x.width() && height == x.height()) return x;
    std::vector<float> out(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y)
        for (int xx = 0; xx < width; ++xx)
            out[static_cast<std::size_t>(y) * width + xx] = x.at(xx, y);
    return Image(width, height, std::move(out));
}

double image_energy(const Image& x) {
    double e = 0.0;
    for (float v : x.data()) e += static_cast<double>(v) * static_cast<double>(v);
    return e;
}

WtBands haar_wt(const Image& x) {
    const int w = x.width(), h = x.height();
    if (w % 2 != 0 || h % 2 != 0)
        throw DimensionError("haar_wt: dimensions must be even, got " + std::to_string(w) +
                             "x" + std::to_string(h));
    const int ow = w / 2, oh = h / 2;
    const std::size_t n = static_cast<std::size_t>(ow) * oh;
    std::vector<float> a(n), hh(n), vv(n), dd(n);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const double p00 = x.at(2 * ox, 2 * oy);
            const double p01 = x.at(2 * ox + 1, 2 * oy);
            const double p10 = x.at(2 * ox, 2 * oy + 1);
            const double p11 = x.at(2 * ox + 1, 2 * oy + 1);
            const std::size_t i = static_cast<std::size_t>(oy) * ow + ox;
            a[i] = static_cast<float>(0.5 * (p00 + p01 + p10 + p11));
            hh[i] = static_cast<float>(0.5 * (p00 - p01 + p10 - p11));
            vv[i] = static_cast<float>(0.5 * (p00 + p01 - p10 - p11));
            dd[i] = static_cast<float>(0.5 * (p00 - p01 - p10 + p11));
        }
    }
    return WtBands{Image(ow, oh, std::move(a)), Image(ow, oh, std::move(hh)),
                   Image(ow, oh, std::move(vv)), Image(ow, oh, std::move(dd))};
}

Image haar_iwt(const WtBands& bands) {
    require_same_dims(bands.a, bands.h, "haar_iwt");
    require_same_dims(bands.a, bands.v, "haar_iwt");
    require_same_dims(bands.a, bands.d, "haar_iwt");
    const int ow = bands.a.width(), oh = bands.a.height();
    const int w = 2 * ow, h = 2 * oh;
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
            const double a = bands.a.at(ox, oy);
            const double hh = bands.h.at(ox, oy);
            const double vv = bands.v.at(ox, oy);
            const double dd = bands.d.at(ox, oy);
            const std::size_t row0 = static_cast<std::size_t>(2 * oy) * w + 2 * ox;
            const std::size_t row1 = row0 + w;
            out[row0] = static_cast<float>(0.5 * (a + hh + vv + dd));
            out[row0 + 1] = static_cast<float>(0.5 * (a - hh + vv - dd));
            out[row1] = static_cast<float>(0.5 * (a + hh - vv - dd));
            out[row1 + 1] = static_cast<float>(0.5 * (a - hh - vv + dd));
        }
    }
    return Image(w, h, std::move(out));
}

double WaveletPyramid::coefficient_energy() const {
    double e = levels > 0 ? image_energy(low.back()) : 0.0;
    for (const auto& bands : hf)
        for (const auto& b : bands) e += image_energy(b);
    return e;
}

WaveletPyramid cascade_decompose(const Image& x, int levels, PaddingMode mode) {
    if (levels < 1) throw DomainError("cascade_decompose: levels must be >= 1");
    WaveletPyramid pyr;
    pyr.levels = levels;
    pyr.source_width = x.width();
    pyr.source_height = x.height();
    pyr.mode = mode;
    Image cur = pad_to_multiple(x, 1 << levels, mode);
    pyr.padded_width = cur.width();
    pyr.padded_height = cur.height();
    pyr.low.reserve(levels);
    pyr.hf.reserve(levels);
    for (int i = 0; i < levels; ++i) {
        WtBands b = haar_wt(cur);
        cur = b.a;
        pyr.low.push_back(std::move(b.a));
        pyr.hf.push_back({std::move(b.h), std::move(b.v), std::move(b.d)});
    }
    return pyr;
}

Image cascade_reconstruct(const WaveletPyramid& pyr) {
    if (pyr.levels < 1) throw DomainError("cascade_reconstruct: empty pyramid");
    Image cur = pyr.low.back();
    for (int i = pyr.levels - 1; i >= 0; --i)
        cur = haar_iwt(WtBands{cur, pyr.hf[i][0], pyr.hf[i][1], pyr.hf[i][2]});
    return cur;
}

WtConvLevelKernels WtConvLevelKernels::identity(int kernel_size) {
    std::vector<double> delta(static_cast<std::size_t>(kernel_size) * kernel_size, 0.0);
    const int c = kernel_size / 2;
    delta[static_cast<std::size_t>(c) * kernel_size + c] = 1.0;
    return WtConvLevelKernels{delta, delta, delta, delta};
}

WtConvParams WtConvParams::identity(int levels, int kernel_size, double beta,
                                    PaddingMode mode) {
    WtConvParams p;
    p.levels = levels;
    p.kernel_size = kernel_size;
    p.padding = mode;
    p.weights.assign(static_cast<std::size_t>(levels) + 1,
                     WtConvLevelKernels::identity(kernel_size));
    p.betas.assign(static_cast<std::size_t>(levels), beta);
    p.validate();
    return p;
}

void WtConvParams::validate() const {
    if (levels < 0) throw DomainError("WtConvParams: levels must be >= 0");
    if (kernel_size < 1 || kernel_size % 2 == 0)
        throw DomainError("WtConvParams: kernel_size must be odd and >= 1, got " +
                          std::to_string(kernel_size));
    if (weights.size() != static_cast<std::size_t>(levels) + 1)
        throw DomainError("WtConvParams: need exactly levels+1 weight sets, got " +
                          std::to_string(weights.size()));
    if (betas.size() != static_cast<std::size_t>(levels))
        throw DomainError("WtConvParams: need exactly `levels` beta values, got " +
                          std::to_string(betas.size()));
    const std::size_t k2 = static_cast<std::size_t>(kernel_size) * kernel_size;
    for (const auto& wl : weights) {
        for (const auto* kern : {&wl.a, &wl.h, &wl.v, &wl.d}) {
            if (kern->size() != k2)
                throw DomainError("WtConvParams: kernel with " + std::to_string(kern->size()) +
                                  " taps, expected " + std::to_string(k2));
            for (double v : *kern)
                if (!std::isfinite(v)) throw DataError("WtConvParams: non-finite kernel tap");
        }
    }
    for (double b : betas)
        if (!(b >= 0.0) || !std::isfinite(b))
            throw DomainError("WtConvParams: betas must be >= 0 and finite");
}

Image conv_same(const Image& x, const std::vector<double>& kernel, int kernel_size,
                PaddingMode mode) {
    if (kernel.size() != static_cast<std::size_t>(kernel_size) * kernel_size)
        throw DimensionError("conv_same: kernel size mismatch");
    const int w = x.width(), h = x.height();
    const int r = kernel_size / 2;
    std::vector<float> out(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
            double acc = 0.0;
            for (int dy = 0; dy < kernel_size; ++dy) {
                const int sy = fold_index(y + dy - r, h, mode);
                for (int dx = 0; dx < kernel_size; ++dx) {
                    const int sx = fold_index(xx + dx - r, w, mode);
                    acc += kernel[static_cast<std::size_t>(dy) * kernel_size + dx] *
                           x.at(sx, sy);
                }
            }
            out[static_cast<std::size_t>(y) * w + xx] = static_cast<float>(acc);
        }
    }
    return Image(w, h, std::move(out));
}

Image wtconv_forward(const Image& x, const WtConvParams& params) {
    params.validate();
    for (float v : x.data())
        if (!std::isfinite(v)) throw DataError("wtconv_forward: non-finite input");

    const int k = params.kernel_size;
    const PaddingMode mode = params.padding;
    const Image padded = pad_to_multiple(x, 1 << params.levels, mode);

    // Level 0: spatial convolution only (no detail bands exist yet).
    Image y0 = conv_same(padded, params.weights[0].a, k, mode);
    if (params.levels == 0) return crop_top_left(y0, x.width(), x.height());

    // Forward: decompose the low band recursively, convolving every band.
    std::vector<Image> ya(params.levels);
    std::vector<std::array<Image, 3>> yhf(params.levels);
    Image cur = padded;
    for (int i = 1; i <= params.levels; ++i) {
        WtBands b = haar_wt(cur);
        const auto& wl = params.weights[static_cast<std::size_t>(i)];
        ya[i - 1] = conv_same(b.a, wl.a, k, mode);
        yhf[i - 1] = {conv_same(b.h, wl.h, k, mode), conv_same(b.v, wl.v, k, mode),
                      conv_same(b.d, wl.d, k, mode)};
        cur = std::move(b.a);
    }

    // Backward integration, deepest level first: Z(l+1) = 0,
    // Z(i) = IWT(beta(i) * (Ya(i) + Z(i+1)), Yhf(i)).
    Image z; // empty = zero contribution at the deepest level
    for (int i = params.levels; i >= 1; --i) {
        const Image& yai = ya[static_cast<std::size_t>(i - 1)];
        const double beta = params.betas[static_cast<std::size_t>(i - 1)];
        std::vector<float> lowband(yai.size());
        for (std::size_t j = 0; j < lowband.size(); ++j) {
            const double zj = z.empty() ? 0.0 : z.data()[j];
            lowband[j] = static_cast<float>(beta * (yai.data()[j] + zj));
        }
        Image low(yai.width(), yai.height(), std::move(lowband));
        const auto& hf = yhf[static_cast<std::size_t>(i - 1)];
        z = haar_iwt(WtBands{std::move(low), hf[0], hf[1], hf[2]});
    }

    std::vector<float> out(y0.size());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = static_cast<float>(static_cast<double>(y0.data()[j]) + z.data()[j]);
    return crop_top_left(Image(y0.width(), y0.height(), std::move(out)), x.width(),
                         x.height());
}

std::pair<long long, long long> erf_at_level(int level, int kernel_size) {
    if (level < 0) throw DomainError("erf_at_level: level must be >= 0");
    if (kernel_size < 1) throw DomainError("erf_at_level: kernel size must be >= 1");
    const long long side = (1ll << level) * kernel_size;
    return {side, side};
}

namespace {

// 1-D DFT of a complex sequence: radix-2 FFT when the length is a power of
// two, direct evaluation otherwise. Sizes here are image edge lengths, so the
// direct path stays affordable.
void dft_1d(std::vector<std::complex<double>>& v) {
    const std::size_t n = v.size();
    if (n <= 1) return;
    if ((n & (n - 1)) == 0) {
        // Iterative Cooley-Tukey, bit-reversal order.
        std::size_t j = 0;
        for (std::size_t i = 1; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(v[i], v[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
            const std::complex<double> wlen(std::cos(ang), std::sin(ang));
            for (std::size_t i = 0; i < n; i += len) {
                std::complex<double> w(1.0, 0.0);
                for (std::size_t m = 0; m < len / 2; ++m) {
                    const std::complex<double> u = v[i + m];
                    const std::complex<double> t = v[i + m + len / 2] * w;
                    v[i + m] = u + t;
                    v[i + m + len / 2] = u - t;
                    w *= wlen;
                }
            }
        }
        return;
    }
    std::vector<std::complex<double>> out(n);
    for (std::size_t kk = 0; kk < n; ++kk) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ang = -2.0 * std::numbers::pi * static_cast<double>(kk) *
                               static_cast<double>(i) / static_cast<double>(n);
            acc += v[i] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[kk] = acc;
    }
    v = std::move(out);
}

} // namespace

SpectralEnergyRatio frequency_energy_ratio(const Image& x, double cutoff_frac) {
    if (!(cutoff_frac > 0.0) || !(cutoff_frac < 1.0))
        throw DomainError("frequency_energy_ratio: cutoff must lie in (0, 1)");
    const int w = x.width(), h = x.height();
    if (w < 1 || h < 1) throw DimensionError("frequency_energy_ratio: empty image");

    // Row-column 2-D DFT.
    std::vector<std::vector<std::complex<double>>> rows(
        static_cast<std::size_t>(h), std::vector<std::complex<double>>(static_cast<std::size_t>(w)));
    for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) rows[y][xx] = {static_cast<double>(x.at(xx, y)), 0.0};
        dft_1d(rows[y]);
    }
    std::vector<std::complex<double>> col(static_cast<std::size_t>(h));
    std::vector<std::vector<double>> power(static_cast<std::size_t>(h),
                                           std::vector<double>(static_cast<std::size_t>(w)));
    for (int xx = 0; xx < w; ++xx) {
        for (int y = 0; y < h; ++y) col[y] = rows[y][xx];
        dft_1d(col);
        for (int y = 0; y < h; ++y) power[y][xx] = std::norm(col[y]);
    }

    constexpr double kFMax = 0.5; // Nyquist, cycles per pixel
    const double cutoff = cutoff_frac * kFMax;
    double total_nondc = 0.0, above = 0.0, total = 0.0;
    for (int ky = 0; ky < h; ++ky) {
        const double fy = static_cast<double>(std::min(ky, h - ky)) / h;
        for (int kx = 0; kx < w; ++kx) {
            const double p = power[ky][kx];
            total += p;
            if (kx == 0 && ky == 0) continue;
            const double fx = static_cast<double>(std::min(kx, w - kx)) / w;
            const double r = std::sqrt(fx * fx + fy * fy);
            total_nondc += p;
            if (r > cutoff) above += p;
        }
    }
    if (total_nondc <= total * 1e-12) return {0.0, true};
    return {above / total_nondc, false};
}

double lbp_entropy(const Image& x) {
    const int w = x.width(), h = x.height();
    if (w < 3 || h < 3)
        throw DimensionError("lbp_entropy: image must be at least 3x3, got " +
                             std::to_string(w) + "x" + std::to_string(h));
    // Neighbor order is fixed (clockwise from the top-left); any fixed order
    // yields the same histogram entropy.
    static constexpr int kOff[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {1, 0},
                                       {1, 1},   {0, 1},  {-1, 1}, {-1, 0}};
    std::array<std::size_t, 256> hist{};
    std::size_t count = 0;
    for (int y = 1; y < h - 1; ++y) {
        for (int xx = 1; xx < w - 1; ++xx) {
            const float c = x.at(xx, y);
            unsigned code = 0;
            for (int p = 0; p < 8; ++p)
                if (x.at(xx + kOff[p][0], y + kOff[p][1]) >= c) code |= 1u << p;
            ++hist[code];
            ++count;
        }
    }
    double entropy = 0.0;
    for (std::size_t c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(count);
        entropy -= p * std::log2(p);
    }
    return entropy;
}

} // namespace ws::wavelet
