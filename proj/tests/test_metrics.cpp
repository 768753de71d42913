#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wavestereo/metrics.hpp"
#include "wavestereo/rng.hpp"

using namespace ws;
using namespace ws::metrics;

namespace {

DepthMap map_of(std::vector<float> vals, int w, int h,
                std::vector<std::uint8_t> mask = {}) {
    if (mask.empty()) mask.assign(vals.size(), 1);
    return DepthMap(w, h, std::move(vals), std::move(mask));
}

NormalMap unit_normals(const std::vector<std::array<double, 3>>& ns, int w, int h) {
    std::vector<float> vecs;
    for (const auto& n : ns) {
        const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        vecs.push_back(static_cast<float>(n[0] / norm));
        vecs.push_back(static_cast<float>(n[1] / norm));
        vecs.push_back(static_cast<float>(n[2] / norm));
    }
    return NormalMap(w, h, std::move(vecs), std::vector<std::uint8_t>(ns.size(), 1));
}

} // namespace

TEST_CASE("depth_metrics") {
    SUBCASE("perfect prediction") {
        const DepthMap m = map_of({1.0f, 2.0f, 3.0f, 4.0f}, 2, 2);
        const DepthMetricsReport r = depth_metrics(m, m, 0.5, 15.0);
        CHECK(r.abs_rel == 0.0);
        CHECK(r.sq_rel == 0.0);
        CHECK(r.rmse == 0.0);
        CHECK(r.log10 == 0.0);
        CHECK(r.delta1 == 1.0);
        CHECK(r.delta2 == 1.0);
        CHECK(r.delta3 == 1.0);
        CHECK(r.n_valid == 4);
    }
    SUBCASE("uniform 1.2x over-prediction") {
        std::vector<float> gt{1.0f, 2.0f, 5.0f, 10.0f};
        std::vector<float> pred;
        for (float g : gt) pred.push_back(1.2f * g);
        const DepthMetricsReport r =
            depth_metrics(map_of(pred, 2, 2), map_of(gt, 2, 2), 0.5, 15.0);
        CHECK(r.abs_rel == doctest::Approx(0.2).epsilon(1e-6));
        CHECK(r.delta1 == 1.0); // 1.2 < 1.25 strictly
        CHECK(r.log10 == doctest::Approx(std::log10(1.2)).epsilon(1e-6));
    }
    SUBCASE("strict threshold edge: exactly 1.25 fails delta1") {
        const DepthMetricsReport r =
            depth_metrics(map_of({1.25f}, 1, 1), map_of({1.0f}, 1, 1), 0.5, 15.0);
        CHECK(r.delta1 == 0.0);
        CHECK(r.delta2 == 1.0);
    }
    SUBCASE("ground truth outside the clip range is excluded") {
        const DepthMap pred = map_of({1.0f, 1.0f, 1.0f}, 3, 1);
        const DepthMap gt = map_of({0.2f, 1.0f, 20.0f}, 3, 1);
        const DepthMetricsReport r = depth_metrics(pred, gt, 0.5, 15.0);
        CHECK(r.n_valid == 1);
        CHECK(r.abs_rel == 0.0);
        CHECK_THROWS_AS(depth_metrics(pred, map_of({0.2f, 0.3f, 20.0f}, 3, 1), 0.5, 15.0),
                        DegenerateInputError);
    }
    SUBCASE("random maps match an independent recount within 1e-12") {
        Rng rng(101);
        for (int trial = 0; trial < 20; ++trial) {
            const int n = 8;
            std::vector<float> p(n * n), g(n * n);
            std::vector<std::uint8_t> mp(n * n), mg(n * n);
            for (std::size_t i = 0; i < p.size(); ++i) {
                p[i] = static_cast<float>(rng.uniform(0.6, 14.0));
                g[i] = static_cast<float>(rng.uniform(0.6, 14.0));
                mp[i] = rng.next_double() < 0.9;
                mg[i] = rng.next_double() < 0.9;
            }
            const DepthMetricsReport r =
                depth_metrics(map_of(p, n, n, mp), map_of(g, n, n, mg), 0.5, 15.0);
            double abs_rel = 0, sq_rel = 0, sq = 0, lg = 0;
            std::size_t cnt = 0, d1 = 0, d2 = 0, d3 = 0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (!mp[i] || !mg[i]) continue;
                const double pd = p[i], gd = g[i];
                abs_rel += std::abs(pd - gd) / gd;
                sq_rel += (pd - gd) * (pd - gd) / gd;
                sq += (pd - gd) * (pd - gd);
                lg += std::abs(std::log10(pd) - std::log10(gd));
                const double ratio = std::max(pd / gd, gd / pd);
                d1 += ratio < 1.25;
                d2 += ratio < 1.5625;
                d3 += ratio < 1.953125;
                ++cnt;
            }
            REQUIRE(cnt == r.n_valid);
            CHECK(r.abs_rel == doctest::Approx(abs_rel / cnt).epsilon(1e-12));
            CHECK(r.sq_rel == doctest::Approx(sq_rel / cnt).epsilon(1e-12));
            CHECK(r.rmse == doctest::Approx(std::sqrt(sq / cnt)).epsilon(1e-12));
            CHECK(r.log10 == doctest::Approx(lg / cnt).epsilon(1e-12));
            CHECK(r.delta1 == doctest::Approx(static_cast<double>(d1) / cnt));
            CHECK(r.delta2 == doctest::Approx(static_cast<double>(d2) / cnt));
            CHECK(r.delta3 == doctest::Approx(static_cast<double>(d3) / cnt));
            CHECK(r.delta1 <= r.delta2);
            CHECK(r.delta2 <= r.delta3);
        }
    }
}

TEST_CASE("metrics are invariant to consistent pixel reordering") {
    Rng rng(909);
    const int n = 6;
    std::vector<float> p(n * n), g(n * n);
    std::vector<std::uint8_t> m(n * n, 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = static_cast<float>(rng.uniform(1.0, 10.0));
        g[i] = static_cast<float>(rng.uniform(1.0, 10.0));
    }
    // reverse both maps with their masks; every statistic must be unchanged
    std::vector<float> pr(p.rbegin(), p.rend()), gr(g.rbegin(), g.rend());
    const DepthMetricsReport a = depth_metrics(map_of(p, n, n), map_of(g, n, n), 0.5, 15.0);
    const DepthMetricsReport b =
        depth_metrics(map_of(pr, n, n), map_of(gr, n, n), 0.5, 15.0);
    CHECK(a.abs_rel == doctest::Approx(b.abs_rel).epsilon(1e-14));
    CHECK(a.rmse == doctest::Approx(b.rmse).epsilon(1e-14));
    CHECK(a.delta1 == b.delta1);
    CHECK(a.n_valid == b.n_valid);
}

TEST_CASE("angular_error_map") {
    SUBCASE("identical, antipodal and 36.87-degree pairs") {
        const NormalMap a = unit_normals({{0, 0, -1}}, 1, 1);
        CHECK(angular_error_map(a, a).degrees[0] == doctest::Approx(0.0));
        // pred (0,0,-1) vs gt (0.6,0,-0.8): acos(0.8) = 36.8699 degrees
        const NormalMap b = unit_normals({{0.6, 0, -0.8}}, 1, 1);
        CHECK(angular_error_map(a, b).degrees[0] == doctest::Approx(36.8699).epsilon(1e-4));
    }
    SUBCASE("antipodal normals read 180 degrees") {
        // Encode the flipped vector on a map that allows it: nz <= 0 for both,
        // so use x-axis opposites.
        const NormalMap a = unit_normals({{1, 0, 0}}, 1, 1);
        const NormalMap b = unit_normals({{-1, 0, 0}}, 1, 1);
        CHECK(angular_error_map(a, b).degrees[0] == doctest::Approx(180.0));
    }
}

TEST_CASE("normal_metrics") {
    SUBCASE("perfect prediction") {
        const NormalMap a = unit_normals({{0, 0, -1}, {0.6, 0, -0.8}}, 2, 1);
        const NormalMetricsReport r = normal_metrics(a, a);
        CHECK(r.mean_deg == 0.0);
        CHECK(r.median_deg == 0.0);
        CHECK(r.rmse_deg == 0.0);
        CHECK(r.pct_11_25 == 1.0);
        CHECK(r.pct_22_5 == 1.0);
        CHECK(r.pct_30 == 1.0);
    }
    SUBCASE("two pixels at 10 and 20 degrees") {
        auto tilted = [](double deg) {
            const double rad = deg * std::numbers::pi / 180.0;
            return std::array<double, 3>{std::sin(rad), 0.0, -std::cos(rad)};
        };
        const NormalMap gt = unit_normals({{0, 0, -1}, {0, 0, -1}}, 2, 1);
        const NormalMap pred = unit_normals({tilted(10.0), tilted(20.0)}, 2, 1);
        const NormalMetricsReport r = normal_metrics(pred, gt);
        CHECK(r.mean_deg == doctest::Approx(15.0).epsilon(1e-6));
        CHECK(r.median_deg == doctest::Approx(10.0).epsilon(1e-6)); // lower median
        CHECK(r.rmse_deg == doctest::Approx(std::sqrt(250.0)).epsilon(1e-6));
        CHECK(r.pct_11_25 == doctest::Approx(0.5));
        CHECK(r.pct_22_5 == doctest::Approx(1.0));
        CHECK(r.pct_30 == doctest::Approx(1.0));
    }
    SUBCASE("random fields match a recount within 1e-12") {
        Rng rng(202);
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 6;
            std::vector<std::array<double, 3>> pn, gn;
            for (int i = 0; i < n * n; ++i) {
                pn.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 0) - 0.1});
                gn.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 0) - 0.1});
            }
            const NormalMap pred = unit_normals(pn, n, n);
            const NormalMap gt = unit_normals(gn, n, n);
            const NormalMetricsReport r = normal_metrics(pred, gt);
            std::vector<double> angles;
            for (int i = 0; i < n * n; ++i) {
                double dot = 0.0;
                for (int c = 0; c < 3; ++c)
                    dot += static_cast<double>(pred.vectors()[3 * i + c]) *
                           gt.vectors()[3 * i + c];
                angles.push_back(std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 /
                                 std::numbers::pi);
            }
            double mean = 0, sq = 0, a = 0, b = 0, c = 0;
            for (double t : angles) {
                mean += t;
                sq += t * t;
                a += t < 11.25;
                b += t < 22.5;
                c += t < 30.0;
            }
            std::sort(angles.begin(), angles.end());
            const double inv = 1.0 / angles.size();
            CHECK(r.mean_deg == doctest::Approx(mean * inv).epsilon(1e-12));
            CHECK(r.rmse_deg == doctest::Approx(std::sqrt(sq * inv)).epsilon(1e-12));
            CHECK(r.median_deg ==
                  doctest::Approx(angles[(angles.size() - 1) / 2]).epsilon(1e-12));
            CHECK(r.pct_11_25 == doctest::Approx(a * inv));
            CHECK(r.pct_22_5 == doctest::Approx(b * inv));
            CHECK(r.pct_30 == doctest::Approx(c * inv));
            CHECK(r.pct_11_25 <= r.pct_22_5);
            CHECK(r.pct_22_5 <= r.pct_30);
        }
    }
    SUBCASE("empty joint mask raises") {
        const NormalMap a(1, 1, {0.0f, 0.0f, -1.0f}, {1});
        const NormalMap b(1, 1, {0.0f, 0.0f, -1.0f}, {0});
        CHECK_THROWS_AS(normal_metrics(a, b), DegenerateInputError);
    }
}
