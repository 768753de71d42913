#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wavestereo/rng.hpp"
#include "wavestereo/wavelet.hpp"

using namespace ws;
using namespace ws::wavelet;

namespace {

double max_abs_diff(const Image& a, const Image& b) {
    REQUIRE(a.width() == b.width());
    REQUIRE(a.height() == b.height());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return m;
}

} // namespace

TEST_CASE("haar filter bank matches the fixed sign patterns and is orthonormal") {
    // fa all +1/2; fh alternates along x; fv along y; fd diagonally.
    CHECK(HaarFilterBank::fa == std::array<double, 4>{0.5, 0.5, 0.5, 0.5});
    CHECK(HaarFilterBank::fh == std::array<double, 4>{0.5, -0.5, 0.5, -0.5});
    CHECK(HaarFilterBank::fv == std::array<double, 4>{0.5, 0.5, -0.5, -0.5});
    CHECK(HaarFilterBank::fd == std::array<double, 4>{0.5, -0.5, -0.5, 0.5});
    for (const auto& k : {HaarFilterBank::fa, HaarFilterBank::fh, HaarFilterBank::fv,
                          HaarFilterBank::fd}) {
        double norm2 = 0.0;
        for (double v : k) norm2 += v * v;
        CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-15));
    }
    for (const auto& k : {HaarFilterBank::fh, HaarFilterBank::fv, HaarFilterBank::fd})
        CHECK(k[0] + k[1] + k[2] + k[3] == doctest::Approx(0.0));
}

TEST_CASE("haar_wt on the 2x2 block [[1,2],[3,4]]") {
    const Image x(2, 2, {1.0f, 2.0f, 3.0f, 4.0f});
    const WtBands b = haar_wt(x);
    CHECK(b.a.at(0, 0) == doctest::Approx(5.0));
    CHECK(b.h.at(0, 0) == doctest::Approx(-1.0));
    CHECK(b.v.at(0, 0) == doctest::Approx(-2.0));
    CHECK(b.d.at(0, 0) == doctest::Approx(0.0));
    // Parseval by hand: 25 + 1 + 4 + 0 = 30 = 1 + 4 + 9 + 16.
    const double coeff = 25.0 + 1.0 + 4.0 + 0.0;
    CHECK(coeff == doctest::Approx(image_energy(x)).epsilon(1e-12));

    SUBCASE("inverse recovers the block") {
        const Image rec = haar_iwt(b);
        CHECK(max_abs_diff(rec, x) < 1e-12);
    }
}

TEST_CASE("haar_wt of a constant image concentrates in the approximation band") {
    const Image x = Image::filled(6, 4, 3.25f);
    const WtBands b = haar_wt(x);
    for (std::size_t i = 0; i < b.a.size(); ++i) {
        CHECK(b.a.data()[i] == doctest::Approx(6.5)); // 2c
        CHECK(b.h.data()[i] == doctest::Approx(0.0));
        CHECK(b.v.data()[i] == doctest::Approx(0.0));
        CHECK(b.d.data()[i] == doctest::Approx(0.0));
    }
}

TEST_CASE("haar_wt rejects odd dimensions, haar_iwt rejects mismatched bands") {
    CHECK_THROWS_AS(haar_wt(Image::filled(3, 4, 0.0f)), DimensionError);
    CHECK_THROWS_AS(haar_wt(Image::filled(4, 5, 0.0f)), DimensionError);
    WtBands b = haar_wt(Image::filled(4, 4, 1.0f));
    b.h = Image::filled(3, 2, 0.0f);
    CHECK_THROWS_AS(haar_iwt(b), DimensionError);
}

TEST_CASE("haar_iwt of all-zero bands is the zero image") {
    const WtBands zero{Image::filled(3, 2, 0.0f), Image::filled(3, 2, 0.0f),
                       Image::filled(3, 2, 0.0f), Image::filled(3, 2, 0.0f)};
    const Image rec = haar_iwt(zero);
    for (float v : rec.data()) CHECK(v == 0.0f);
}

TEST_CASE("perfect reconstruction on random even-sized images") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int w = 2 * rng.uniform_int(1, 16), h = 2 * rng.uniform_int(1, 16);
        const Image x = oracle::random_image(rng, w, h);
        CHECK(max_abs_diff(haar_iwt(haar_wt(x)), x) < 1e-6);
    }
}

TEST_CASE("cascade_decompose") {
    Rng rng(11);
    SUBCASE("one level equals haar_wt") {
        const Image x = oracle::random_image(rng, 8, 6);
        const WaveletPyramid pyr = cascade_decompose(x, 1);
        const WtBands b = haar_wt(x);
        CHECK(max_abs_diff(pyr.low[0], b.a) == 0.0);
        CHECK(max_abs_diff(pyr.hf[0][0], b.h) == 0.0);
        CHECK(max_abs_diff(pyr.hf[0][1], b.v) == 0.0);
        CHECK(max_abs_diff(pyr.hf[0][2], b.d) == 0.0);
    }
    SUBCASE("constant image: deepest approximation is 2^l c, details vanish") {
        const Image x = Image::filled(16, 16, 1.5f);
        const WaveletPyramid pyr = cascade_decompose(x, 3);
        for (float v : pyr.low.back().data()) CHECK(v == doctest::Approx(8.0 * 1.5));
        for (const auto& bands : pyr.hf)
            for (const auto& b : bands)
                for (float v : b.data()) CHECK(v == doctest::Approx(0.0));
    }
    SUBCASE("parseval and reconstruction with padding, both modes") {
        for (const PaddingMode mode : {PaddingMode::Reflect, PaddingMode::Periodic}) {
            for (int levels = 1; levels <= 5; ++levels) {
                const int w = rng.uniform_int(8, 37), h = rng.uniform_int(8, 37);
                const Image x = oracle::random_image(rng, w, h);
                const WaveletPyramid pyr = cascade_decompose(x, levels, mode);
                const Image padded = pad_to_multiple(x, 1 << levels, mode);
                CHECK(pyr.padded_width == padded.width());
                const double in_energy = image_energy(padded);
                CHECK(pyr.coefficient_energy() ==
                      doctest::Approx(in_energy).epsilon(1e-6));
                CHECK(max_abs_diff(cascade_reconstruct(pyr), padded) < 1e-6);
                // band dimensions halve exactly per level
                for (int i = 0; i < levels; ++i)
                    CHECK(pyr.low[static_cast<std::size_t>(i)].width() ==
                          padded.width() >> (i + 1));
            }
        }
    }
    SUBCASE("levels < 1 rejected") {
        CHECK_THROWS_AS(cascade_decompose(Image::filled(4, 4, 0.0f), 0), DomainError);
    }
}

TEST_CASE("wtconv_forward") {
    Rng rng(23);
    SUBCASE("zero image maps to zero for any params") {
        for (int trial = 0; trial < 5; ++trial) {
            const WtConvParams p = oracle::random_wtconv_params(rng, 3);
            const Image out = wtconv_forward(Image::filled(8, 8, 0.0f), p);
            for (float v : out.data()) CHECK(v == doctest::Approx(0.0));
        }
    }
    SUBCASE("output keeps the input size, including non-multiple sizes") {
        const WtConvParams p = WtConvParams::identity(3);
        const Image out = wtconv_forward(Image::filled(13, 10, 1.0f), p);
        CHECK(out.width() == 13);
        CHECK(out.height() == 10);
    }
    SUBCASE("linearity under periodic padding") {
        for (int trial = 0; trial < 20; ++trial) {
            WtConvParams p = oracle::random_wtconv_params(rng, 3);
            p.padding = PaddingMode::Periodic;
            const Image x = oracle::random_image(rng, 8, 8);
            const Image y = oracle::random_image(rng, 8, 8);
            const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
            std::vector<float> mix(x.size());
            for (std::size_t i = 0; i < mix.size(); ++i)
                mix[i] = static_cast<float>(a * x.data()[i] + b * y.data()[i]);
            const Image lhs = wtconv_forward(Image(8, 8, std::move(mix)), p);
            const Image ox = wtconv_forward(x, p);
            const Image oy = wtconv_forward(y, p);
            double scale = 0.0;
            for (std::size_t i = 0; i < lhs.size(); ++i)
                scale = std::max(scale, std::abs(static_cast<double>(lhs.data()[i])));
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                const double rhs = a * ox.data()[i] + b * oy.data()[i];
                CHECK(std::abs(lhs.data()[i] - rhs) <= 1e-5 * std::max(scale, 1.0));
            }
        }
    }
    SUBCASE("matches the dense-matrix oracle on 8x8") {
        for (int trial = 0; trial < 10; ++trial) {
            const WtConvParams p = oracle::random_wtconv_params(rng, 3);
            const oracle::Mat m = oracle::wtconv_dense_matrix(p, 8, 8);
            const Image x = oracle::random_image(rng, 8, 8);
            std::vector<double> xv(x.data().begin(), x.data().end());
            const std::vector<double> want = oracle::apply(m, xv);
            const Image got = wtconv_forward(x, p);
            for (std::size_t i = 0; i < want.size(); ++i)
                CHECK(std::abs(got.data()[i] - want[i]) < 1e-5);
        }
    }
    SUBCASE("periodic padding commutes with translation by 2^l") {
        for (int trial = 0; trial < 10; ++trial) {
            WtConvParams p = oracle::random_wtconv_params(rng, 2);
            p.padding = PaddingMode::Periodic;
            const int shift = 1 << p.levels;
            const int w = 16, h = 16;
            const Image x = oracle::random_image(rng, w, h);
            std::vector<float> shifted(x.size());
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    shifted[static_cast<std::size_t>(y) * w + xx] =
                        x.at((xx - shift + w) % w, (y - shift + h) % h);
            const Image out_shifted = wtconv_forward(Image(w, h, std::move(shifted)), p);
            const Image out = wtconv_forward(x, p);
            for (int y = 0; y < h; ++y)
                for (int xx = 0; xx < w; ++xx)
                    CHECK(out_shifted.at(xx, y) ==
                          doctest::Approx(out.at((xx - shift + w) % w, (y - shift + h) % h))
                              .epsilon(1e-4));
        }
    }
    SUBCASE("identity parameters amplify only the low band (constant gain)") {
        // With delta kernels and beta=1 the operator adds the reconstructed
        // cascade back onto the input: a constant image gains a factor of
        // levels + 1.
        const Image x = Image::filled(16, 16, 1.0f);
        const Image out = wtconv_forward(x, WtConvParams::identity(3));
        for (float v : out.data()) CHECK(v == doctest::Approx(4.0).epsilon(1e-6));
    }
    SUBCASE("parameter validation") {
        WtConvParams p = WtConvParams::identity(2);
        p.kernel_size = 4;
        CHECK_THROWS_AS(p.validate(), DomainError);
        p = WtConvParams::identity(2);
        p.betas = {1.0};
        CHECK_THROWS_AS(p.validate(), DomainError);
        p = WtConvParams::identity(2);
        p.betas[0] = -0.5;
        CHECK_THROWS_AS(p.validate(), DomainError);
    }
}

TEST_CASE("erf_at_level") {
    CHECK(erf_at_level(2, 2) == std::pair<long long, long long>{8, 8});
    CHECK(erf_at_level(0, 7) == std::pair<long long, long long>{7, 7});
    CHECK(erf_at_level(3, 3) == std::pair<long long, long long>{24, 24});
    CHECK_THROWS_AS(erf_at_level(-1, 3), DomainError);
    CHECK_THROWS_AS(erf_at_level(2, 0), DomainError);
    // monotone, and exactly doubling per level
    for (int k : {1, 2, 3, 5})
        for (int i = 0; i < 6; ++i)
            CHECK(erf_at_level(i + 1, k).first == 2 * erf_at_level(i, k).first);
}

TEST_CASE("frequency_energy_ratio") {
    SUBCASE("constant image is degenerate with ratio 0") {
        const auto r = frequency_energy_ratio(Image::filled(16, 16, 4.0f), 0.1);
        CHECK(r.degenerate);
        CHECK(r.ratio == 0.0);
    }
    SUBCASE("low-frequency sinusoid at 0.05 f_max stays below a 0.1 cutoff") {
        // One exact DFT bin: k = 2 on an 80-wide grid = 0.025 cy/px = 0.05 f_max.
        const int w = 80, h = 16;
        std::vector<float> data(static_cast<std::size_t>(w) * h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                data[static_cast<std::size_t>(y) * w + x] =
                    static_cast<float>(std::sin(2.0 * std::numbers::pi * 2.0 * x / w));
        const auto r = frequency_energy_ratio(Image(w, h, std::move(data)), 0.1);
        CHECK(!r.degenerate);
        CHECK(r.ratio < 1e-9);
    }
    SUBCASE("white noise matches the direct-DFT oracle within 1e-9") {
        Rng rng(31);
        const Image x = oracle::random_image(rng, 16, 16);
        const auto got = frequency_energy_ratio(x, 0.1);
        CHECK(got.ratio ==
              doctest::Approx(oracle::direct_frequency_ratio(x, 0.1)).epsilon(1e-9));
        // and on a non-power-of-two size (direct path in both)
        const Image y = oracle::random_image(rng, 12, 10);
        const auto got2 = frequency_energy_ratio(y, 0.3);
        CHECK(got2.ratio ==
              doctest::Approx(oracle::direct_frequency_ratio(y, 0.3)).epsilon(1e-9));
    }
    SUBCASE("invariant to a constant offset") {
        Rng rng(37);
        const Image x = oracle::random_image(rng, 16, 16);
        std::vector<float> shifted(x.data().begin(), x.data().end());
        for (float& v : shifted) v += 13.5f;
        const auto a = frequency_energy_ratio(x, 0.1);
        const auto b = frequency_energy_ratio(Image(16, 16, std::move(shifted)), 0.1);
        CHECK(a.ratio == doctest::Approx(b.ratio).epsilon(1e-9));
    }
    SUBCASE("cutoff domain") {
        CHECK_THROWS_AS(frequency_energy_ratio(Image::filled(4, 4, 0.0f), 0.0), DomainError);
        CHECK_THROWS_AS(frequency_energy_ratio(Image::filled(4, 4, 0.0f), 1.0), DomainError);
    }
}

TEST_CASE("lbp_entropy") {
    SUBCASE("constant image has zero entropy") {
        CHECK(lbp_entropy(Image::filled(8, 8, 2.0f)) == doctest::Approx(0.0));
    }
    SUBCASE("checkerboard has higher entropy than constant") {
        std::vector<float> data(64);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                data[static_cast<std::size_t>(y) * 8 + x] = static_cast<float>((x + y) % 2);
        CHECK(lbp_entropy(Image(8, 8, std::move(data))) > 0.0);
    }
    SUBCASE("random image matches a brute-force recount") {
        Rng rng(41);
        const Image x = oracle::random_image(rng, 32, 32);
        // independent recount
        static constexpr int off[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {1, 0},
                                          {1, 1},   {0, 1},  {-1, 1}, {-1, 0}};
        std::vector<std::size_t> hist(256, 0);
        std::size_t count = 0;
        for (int y = 1; y < 31; ++y)
            for (int xx = 1; xx < 31; ++xx) {
                unsigned code = 0;
                for (int p = 0; p < 8; ++p)
                    if (x.at(xx + off[p][0], y + off[p][1]) >= x.at(xx, y)) code |= 1u << p;
                ++hist[code];
                ++count;
            }
        double want = 0.0;
        for (std::size_t c : hist)
            if (c) {
                const double pr = static_cast<double>(c) / count;
                want -= pr * std::log2(pr);
            }
        CHECK(lbp_entropy(x) == doctest::Approx(want).epsilon(1e-9));
    }
    SUBCASE("too-small image rejected") {
        CHECK_THROWS_AS(lbp_entropy(Image::filled(2, 8, 0.0f)), DimensionError);
    }
}

TEST_CASE("pad_to_multiple folding modes") {
    // 3-wide image padded to 8 exercises reflection past one period.
    const Image x(3, 1, {1.0f, 2.0f, 3.0f});
    const Image reflect = pad_to_multiple(x, 8, PaddingMode::Reflect);
    const Image periodic = pad_to_multiple(x, 8, PaddingMode::Periodic);
    const float want_reflect[8] = {1, 2, 3, 3, 2, 1, 1, 2};
    const float want_periodic[8] = {1, 2, 3, 1, 2, 3, 1, 2};
    for (int i = 0; i < 8; ++i) {
        CHECK(reflect.at(i, 0) == want_reflect[i]);
        CHECK(periodic.at(i, 0) == want_periodic[i]);
    }
}
