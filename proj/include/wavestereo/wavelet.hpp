#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "wavestereo/core.hpp"

namespace ws::wavelet {

/// Boundary extension used for padding and same-size convolution.
/// Reflect is symmetric and edge-inclusive (… 1 0 | 0 1 …) so it works for
/// any extension length; Periodic wraps and gives exact algebraic properties
/// (linearity, shift equivariance) that the property tests rely on.
enum class PaddingMode { Reflect, Periodic };

PaddingMode padding_mode_from_string(std::string_view s);
std::string to_string(PaddingMode mode);

/// Maps an arbitrary (possibly negative or out-of-range) index into [0, n).
int fold_index(int i, int n, PaddingMode mode);

/// Extends the image on the right and bottom until both dimensions are a
/// multiple of `multiple`.
Image pad_to_multiple(const Image& x, int multiple, PaddingMode mode);

Image crop_top_left(const Image& x, int width, int height);

/// Sum of squared values, accumulated in double.
double image_energy(const Image& x);

/// The orthonormal 2x2 Haar analysis bank: one approximation kernel (all
/// +1/2) and three detail kernels (horizontal, vertical, diagonal sign
/// patterns, each summing to zero). Every kernel has unit L2 norm, so the
/// transform preserves energy exactly.
struct HaarFilterBank {
    // Row-major 2x2: index [dy * 2 + dx].
    static constexpr std::array<double, 4> fa{0.5, 0.5, 0.5, 0.5};
    static constexpr std::array<double, 4> fh{0.5, -0.5, 0.5, -0.5};
    static constexpr std::array<double, 4> fv{0.5, 0.5, -0.5, -0.5};
    static constexpr std::array<double, 4> fd{0.5, -0.5, -0.5, 0.5};
};

/// One analysis step: the four half-resolution sub-bands of an image.
struct WtBands {
    Image a; // low-frequency approximation
    Image h; // horizontal detail
    Image v; // vertical detail
    Image d; // diagonal detail
};

/// Stride-2 correlation of `x` with the Haar bank. Requires even dimensions;
/// callers pad first.
WtBands haar_wt(const Image& x);

/// Exact inverse of haar_wt (transposed stride-2 correlation with the same
/// bank). All four bands must share dimensions.
Image haar_iwt(const WtBands& bands);

/// Multi-level decomposition: the wavelet transform is applied recursively to
/// the low band only. Level i bands have resolution (H/2^i) x (W/2^i) of the
/// padded input. The transform coefficients are hf[0..levels-1] plus the
/// deepest low band; the shallower low bands are kept for inspection but are
/// redundant (they double-count energy).
struct WaveletPyramid {
    int levels = 0;
    int source_width = 0, source_height = 0; // before padding
    int padded_width = 0, padded_height = 0;
    PaddingMode mode = PaddingMode::Reflect;
    std::vector<Image> low;                  // low[i] = level-(i+1) approximation
    std::vector<std::array<Image, 3>> hf;    // hf[i] = {H, V, D} at level i+1

    /// Energy of the transform coefficients: deepest low band + all detail
    /// bands. Equals the padded-input energy (orthonormal Haar).
    double coefficient_energy() const;
};

WaveletPyramid cascade_decompose(const Image& x, int levels,
                                 PaddingMode mode = PaddingMode::Reflect);

/// Inverts cascade_decompose back to the padded input.
Image cascade_reconstruct(const WaveletPyramid& pyr);

/// Depth-wise k x k weights for the four sub-bands at one level. Level 0 has
/// no detail bands and uses only `a`.
struct WtConvLevelKernels {
    std::vector<double> a, h, v, d; // each kernel_size^2, row-major

    static WtConvLevelKernels identity(int kernel_size);
};

/// Parameters of the wavelet-enhanced convolution: a level-0 spatial
/// convolution, per-level per-band convolutions on the cascade bands, and a
/// per-level low-frequency amplification coefficient applied during the
/// backward integration. With identity kernels the operator reduces to a pure
/// multi-scale low-frequency amplifier controlled by the betas.
struct WtConvParams {
    int levels = 3;      // decomposition depth
    int kernel_size = 3; // odd
    std::vector<WtConvLevelKernels> weights; // levels + 1 entries, [0] = level 0
    std::vector<double> betas;               // levels entries, betas[i-1] = level-i coefficient
    PaddingMode padding = PaddingMode::Reflect;

    static WtConvParams identity(int levels, int kernel_size = 3, double beta = 1.0,
                                 PaddingMode mode = PaddingMode::Reflect);

    void validate() const;
};

/// Same-size correlation of `x` with a square kernel under the given boundary
/// mode. Exposed for tests; wtconv_forward uses it per band.
Image conv_same(const Image& x, const std::vector<double>& kernel, int kernel_size,
                PaddingMode mode);

/// Wavelet-enhanced convolution:
///   1. level-0 convolution on the input;
///   2. cascade decomposition with a per-band convolution at each level;
///   3. backward integration from the deepest level,
///        Z(i) = IWT(beta(i) * (Ya(i) + Z(i+1)), Yhf(i));
///   4. output Z(0) = Ya(0) + Z(1), cropped back to the input size.
/// Linear in the input for fixed parameters.
Image wtconv_forward(const Image& x, const WtConvParams& params);

/// Effective receptive field of a k x k convolution applied at decomposition
/// level i, in input pixels: (2^i * k, 2^i * k).
std::pair<long long, long long> erf_at_level(int level, int kernel_size);

struct SpectralEnergyRatio {
    double ratio = 0.0;    // fraction of non-DC energy above the radial cutoff
    bool degenerate = false; // no non-DC energy at all (constant image)
};

/// Fraction of the non-DC 2-D DFT energy at radial frequency above
/// cutoff_frac * f_max. Frequencies are Euclidean in normalized DFT
/// coordinates (cycles per pixel, aliased to [0, 0.5]); f_max is Nyquist.
SpectralEnergyRatio frequency_energy_ratio(const Image& x, double cutoff_frac);

/// Shannon entropy (bits) of the 8-neighbor radius-1 local binary pattern
/// histogram over interior pixels. Bit p is set when the p-th neighbor is >=
/// the center value.
double lbp_entropy(const Image& x);

} // namespace ws::wavelet
