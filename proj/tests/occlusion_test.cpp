// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"
#include "ssibl/fixtures.h"
#include "ssibl/occlusion.h"
#include "ssibl/parallel.h"
#include "ssibl/sampling.h"
#include "test_support.h"

using namespace ssibl;

namespace {

const OcclusionQuery kWallBase{{0, 0, 0}, {0, 1, 0}};

const Bvh &empty_bvh() {
    static const Bvh b{TriangleMesh()};
    return b;
}

const Bvh &box_bvh() {
    static const Bvh b(fixtures::closed_box({-1, -1, -1}, {1, 1, 1}));
    return b;
}

const Bvh &wall_bvh() {
    static const Bvh b(fixtures::half_wall());
    return b;
}

ErrorCode error_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::kIo;
}

std::vector<SurfacePoint> interior_points(int count, uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<SurfacePoint> pts;
    for (int i = 0; i < count; ++i) {
        Vec3 p{1.6 * rng.uniform() - 0.8, 1.6 * rng.uniform() - 0.8, 1.6 * rng.uniform() - 0.8};
        pts.push_back({p, uniform_sphere(rng).dir, Material{}});
    }
    return pts;
}

}  // namespace

TEST(Diffuse, EmptySceneIsExactlyOne) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream rng(1, 0);
    for (int i = 0; i < 20; ++i) {
        OcclusionQuery q{{rng.uniform(), 0, 0}, uniform_sphere(rng).dir};
        EXPECT_EQ(mc_occlusion_diffuse(q, env, empty_bvh(), 16, rng).value, Rgb(1));
        EXPECT_EQ(mc_occlusion_specular(q, 0.4, env, empty_bvh(), 16, rng).value, Rgb(1));
    }
}

TEST(Diffuse, ClosedBoxIsExactlyZero) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream rng(2, 0);
    for (int i = 0; i < 20; ++i) {
        OcclusionQuery q{{0.2, -0.1, 0.3}, uniform_sphere(rng).dir};
        EXPECT_EQ(mc_occlusion_diffuse(q, env, box_bvh(), 32, rng).value, Rgb(0));
        EXPECT_EQ(mc_occlusion_specular(q, 0.7, env, box_bvh(), 32, rng).value, Rgb(0));
    }
}

TEST(Diffuse, HalfWallIsOneHalf) {
    RadianceMap env(16, Rgb(1));
    const int n = 64;
    const double sigma = std::sqrt(0.25 / n);
    RngStream rng(3, 0);
    RatioEstimate e = mc_occlusion_diffuse(kWallBase, env, wall_bvh(), n, rng);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(e.value[c], 0.5, 3 * sigma);
    EXPECT_EQ(e.sample_count, n);
    EXPECT_NEAR(e.std_error.r, sigma, 0.2 * sigma);

    // Many independent estimates: the mean sits at 0.5 once the wall is wide
    // enough that rays slipping past its far edges no longer matter.
    Bvh wide(fixtures::half_wall(-0.05, 200));
    const OcclusionQuery q{kWallBase.position, kWallBase.normal, 1e-4};
    double mean = 0;
    const int runs = 200;
    for (int k = 0; k < runs; ++k) {
        RngStream r(4, uint64_t(k));
        mean += mc_occlusion_diffuse(q, env, wide, n, r).value.g / runs;
    }
    EXPECT_NEAR(mean, 0.5, 3 * sigma / std::sqrt(double(runs)));
}

TEST(Diffuse, ConstantEnvironmentEqualsVisibilityFraction) {
    RadianceMap env(8, Rgb(2.5));
    for (uint64_t s = 0; s < 10; ++s) {
        RngStream a(5, s), b(5, s);
        OcclusionQuery q{{0.3, 0, 0.2}, normalize(Vec3{-0.4, 1, 0.1})};
        double ratio = mc_occlusion_diffuse(q, env, wall_bvh(), 100, a).value.r;
        double plain = visibility_fraction(q, wall_bvh(), 100, b);
        EXPECT_NEAR(ratio, plain, 1e-12);
    }
}

TEST(Diffuse, ValuesStayInUnitInterval) {
    RadianceMap env = fixtures::high_frequency_env(16);
    Bvh soup(merge({fixtures::half_wall(), fixtures::uv_sphere(0.3, 12, 6, {0.5, 0.4, 0.2})}));
    RngStream rng(6, 0);
    for (int i = 0; i < 200; ++i) {
        OcclusionQuery q{{rng.uniform(), 0.01, rng.uniform() - 0.5}, normalize(Vec3{rng.uniform() - 0.5, 1, 0})};
        for (const RatioEstimate &e : {mc_occlusion_diffuse(q, env, soup, 16, rng),
                                       mc_occlusion_specular(q, 0.3, env, soup, 16, rng)}) {
            EXPECT_GE(e.value.min_component(), 0);
            EXPECT_LE(e.value.max_component(), 1);
            EXPECT_GE(e.std_error.min_component(), 0);
        }
    }
}

TEST(Diffuse, BlackEnvironmentIsDegenerate) {
    RadianceMap black(8, Rgb(0));
    RngStream rng(7, 0);
    EXPECT_EQ(error_of([&] { mc_occlusion_diffuse(kWallBase, black, wall_bvh(), 16, rng); }),
              ErrorCode::kDegenerateEstimator);
    EXPECT_EQ(error_of([&] { mc_occlusion_specular(kWallBase, 0.5, black, wall_bvh(), 16, rng); }),
              ErrorCode::kDegenerateEstimator);
}

TEST(Diffuse, BlackChannelBorrowsChannelMean) {
    RadianceMap env(8, Rgb(1, 0, 1));
    RngStream rng(8, 0);
    RatioEstimate e = mc_occlusion_diffuse(kWallBase, env, wall_bvh(), 64, rng);
    EXPECT_EQ(e.value.g, e.value.r);
    EXPECT_EQ(e.value.b, e.value.r);
}

TEST(Specular, UniformLobeMatchesBruteForce) {
    RadianceMap env(8, Rgb(1));
    const Vec3 n = kWallBase.normal;
    const double t_min = default_ray_offset(wall_bvh().mesh());
    // Brute-force oracle: clamped-cosine-weighted visibility over uniform directions.
    RngStream u(9, 0);
    double num = 0, den = 0;
    std::vector<std::pair<double, bool>> terms;
    const int m = 100000;
    for (int i = 0; i < m; ++i) {
        Vec3 d = uniform_sphere(u).dir;
        double c = std::max(0.0, dot(d, n));
        bool vis = c > 0 && !wall_bvh().occluded(kWallBase.position, d, t_min);
        terms.push_back({c, vis});
        den += c;
        num += vis ? c : 0;
    }
    double oracle = num / den, ss = 0;
    for (auto [c, vis] : terms)
        ss += std::pow((vis ? c : 0) - oracle * c, 2);
    double oracle_se = std::sqrt(ss / (double(m) * (m - 1))) / (den / m);

    RngStream rng(10, 0);
    RatioEstimate e = mc_occlusion_specular(kWallBase, 1.0, env, wall_bvh(), 4096, rng);
    double se = std::hypot(e.std_error.r, oracle_se);
    EXPECT_NEAR(e.value.r, oracle, 3 * se);
    EXPECT_NEAR(oracle, 0.5, 0.02);
}

TEST(Specular, LobeCollapsesOntoAxis) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream rng(11, 0);
    Vec3 at_wall = normalize(Vec3{-1, 0.3, 0}), at_sky = normalize(Vec3{1, 0.3, 0});
    RatioEstimate blocked = mc_occlusion_specular(kWallBase, kMinRoughness, env, wall_bvh(), 256, rng, at_wall);
    RatioEstimate open = mc_occlusion_specular(kWallBase, kMinRoughness, env, wall_bvh(), 256, rng, at_sky);
    EXPECT_LT(blocked.value.max_component(), 0.01);
    EXPECT_GT(open.value.min_component(), 0.99);
    EXPECT_THROW(mc_occlusion_specular(kWallBase, 1e-4, env, wall_bvh(), 16, rng), Error);
}

TEST(Specular, DefaultAxisIsNormal) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream a(12, 0), b(12, 0);
    OcclusionQuery q{{0.2, 0, 0.1}, normalize(Vec3{0.2, 1, -0.1})};
    RatioEstimate x = mc_occlusion_specular(q, 0.3, env, wall_bvh(), 64, a);
    RatioEstimate y = mc_occlusion_specular(q, 0.3, env, wall_bvh(), 64, b, q.normal);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(x.value[c], y.value[c], 1e-12);
}

TEST(StandardError, ShrinksAsInverseSquareRoot) {
    RadianceMap env = fixtures::standard_env(16);
    std::vector<double> xs, ys;
    for (int n = 16; n <= 1024; n *= 2) {
        double se = 0;
        const int runs = 40;
        for (int k = 0; k < runs; ++k) {
            RngStream r(13, uint64_t(n * 1000 + k));
            se += mc_occlusion_diffuse(kWallBase, env, wall_bvh(), n, r).std_error.average() / runs;
        }
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(se));
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i] / xs.size();
        my += ys[i] / ys.size();
    }
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -0.5, 0.1);
}

TEST(ChannelAverage, Examples) {
    RatioEstimate e;
    e.value = {0.2, 0.4, 0.6};
    EXPECT_NEAR(channel_average(e).value.g, 0.4, 1e-15);
    EXPECT_EQ(channel_average(e).value.r, channel_average(e).value.b);
    RatioEstimate u;
    u.value = Rgb(0.3);
    EXPECT_EQ(channel_average(u).value, u.value);
    OcclusionEstimate o{e, u};
    OcclusionEstimate a = channel_average(o);
    EXPECT_NEAR(a.diffuse.value.b, 0.4, 1e-15);
    EXPECT_EQ(a.specular.value, Rgb(0.3));
}

TEST(ChannelAverage, GrayEnvironmentIsNoOp) {
    RadianceMap gray = fixtures::high_frequency_env(16);
    Image img = gray.image();
    for (Rgb &t : img.texels())
        t = Rgb(t.average());
    RadianceMap env(img);
    RngStream rng(14, 0);
    OcclusionQuery q{{0.1, 0, 0}, normalize(Vec3{-0.3, 1, 0.2})};
    RatioEstimate e = mc_occlusion_diffuse(q, env, wall_bvh(), 256, rng);
    RatioEstimate avg = channel_average(e);
    for (int c = 0; c < 3; ++c)
        EXPECT_NEAR(avg.value[c], e.value[c], 1e-12);
}

TEST(Loss, Examples) {
    std::vector<Rgb> p{{0.5, 0.5, 0.5}}, t{{0.5, 0.5, 0.5}};
    std::vector<double> w{1.0};
    EXPECT_EQ(occlusion_loss(p, t, w), 0.0);
    p[0] = {1, 0, 0};
    t[0] = {0, 0, 0};
    EXPECT_DOUBLE_EQ(occlusion_loss(p, t, w), 1.0);

    std::vector<Rgb> p3{{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}, t3(3, Rgb());
    std::vector<double> even{1.0 / 3, 1.0 / 3, 1.0 / 3}, heavier{0.5, 0.25, 0.25};
    EXPECT_GT(occlusion_loss(p3, t3, heavier), occlusion_loss(p3, t3, even));
    EXPECT_NEAR(occlusion_loss(p3, t3, even), 1.0 / 9, 1e-15);
}

TEST(Loss, Errors) {
    std::vector<Rgb> p(2), t(3);
    std::vector<double> w{0.5, 0.5};
    EXPECT_EQ(error_of([&] { occlusion_loss(p, t, w); }), ErrorCode::kDimensionMismatch);
    std::vector<Rgb> t2(2);
    std::vector<double> w3{0.5, 0.5, 0.0};
    EXPECT_EQ(error_of([&] { occlusion_loss(p, t2, w3); }), ErrorCode::kDimensionMismatch);
    std::vector<double> bad{0.7, 0.7}, neg{1.5, -0.5};
    EXPECT_THROW(occlusion_loss(p, t2, bad), Error);
    EXPECT_THROW(occlusion_loss(p, t2, neg), Error);
}

TEST(Loss, EstimateOverloadSumsBothTerms) {
    OcclusionEstimate a, b;
    a.diffuse.value = Rgb(1);
    a.specular.value = Rgb(0.5);
    b.diffuse.value = Rgb(0.5);
    b.specular.value = Rgb(0.5);
    std::vector<OcclusionEstimate> pa{a}, pb{b};
    std::vector<double> w{1.0};
    EXPECT_DOUBLE_EQ(occlusion_loss(pa, pb, w), 0.75);
}

TEST(Bake, DeterministicAcrossThreadCounts) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream rng(15, 0);
    auto pts = sample_surface(wall_bvh().mesh(), 200, rng, Material{});
    OcclusionBakeConfig cfg;
    cfg.samples = 32;
    set_thread_count(1);
    BakedOcclusion a = bake_occlusion(pts, env, wall_bvh(), cfg);
    set_thread_count(4);
    BakedOcclusion b = bake_occlusion(pts, env, wall_bvh(), cfg);
    set_thread_count(0);
    ASSERT_EQ(a.estimates.size(), 200u);
    for (size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(a.estimates[i].diffuse.value, b.estimates[i].diffuse.value);
        EXPECT_EQ(a.estimates[i].specular.value, b.estimates[i].specular.value);
    }
    cfg.channel_average = true;
    BakedOcclusion c = bake_occlusion(pts, env, wall_bvh(), cfg);
    EXPECT_EQ(c.estimates[3].diffuse.value, Rgb(a.estimates[3].diffuse.value.average()));
}

TEST(Bake, NearestLookup) {
    BakedOcclusion b;
    b.positions = {{0, 0, 0}, {1, 0, 0}, {0, 5, 0}};
    for (int i = 0; i < 3; ++i) {
        OcclusionEstimate e;
        e.diffuse.value = Rgb(0.25 * (i + 1));
        b.estimates.push_back(e);
    }
    EXPECT_EQ(nearest_occlusion(b, {0.9, 0.2, 0}).diffuse.value, Rgb(0.5));
    EXPECT_EQ(nearest_occlusion(b, {0, 3, 0}).diffuse.value, Rgb(0.75));
    EXPECT_THROW(nearest_occlusion(BakedOcclusion{}, {0, 0, 0}), Error);
}

TEST(Bake, BinaryRoundtrip) {
    testutil::TempDir dir;
    RadianceMap env = fixtures::standard_env(8);
    RngStream rng(16, 0);
    auto pts = sample_surface(wall_bvh().mesh(), 50, rng, Material{});
    BakedOcclusion b = bake_occlusion(pts, env, wall_bvh(), OcclusionBakeConfig{});
    save_occlusion(b, dir / "o.occl");
    EXPECT_EQ(std::filesystem::file_size(dir / "o.occl"), 5u + 4u + 50u * 9u * 4u);
    BakedOcclusion back = load_occlusion(dir / "o.occl");
    ASSERT_EQ(back.positions.size(), 50u);
    for (size_t i = 0; i < 50; ++i)
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(back.positions[i][c], b.positions[i][c], 1e-6 * (1 + std::abs(b.positions[i][c])));
            EXPECT_NEAR(back.estimates[i].diffuse.value[c], b.estimates[i].diffuse.value[c], 1e-7);
            EXPECT_NEAR(back.estimates[i].specular.value[c], b.estimates[i].specular.value[c], 1e-7);
        }
    auto bytes = encode_occlusion(b);
    EXPECT_THROW(decode_occlusion(std::vector<uint8_t>(bytes.begin(), bytes.end() - 1)), Error);
    bytes[0] = 'X';
    EXPECT_THROW(decode_occlusion(bytes), Error);
    EXPECT_EQ(error_of([&] { load_occlusion(dir / "missing.occl"); }), ErrorCode::kIo);
}

TEST(Field, EmptySceneLearnsFullVisibility) {
    RadianceMap env = fixtures::standard_env(16);
    RngStream rng(17, 0);
    TriangleMesh ground = fixtures::quad(1, 0, -1, 1, -1, 1, true);
    auto train = sample_surface(ground, 512, rng, Material{});
    OcclusionFitResult r = fit_occlusion_field(train, env, empty_bvh(), OcclusionBakeConfig{}, OcclusionFitConfig{});
    auto probes = sample_surface(ground, 200, rng, Material{});
    for (const auto &p : probes) {
        OcclusionEstimate e = r.field.predict(p.position);
        EXPECT_GE(e.diffuse.value.min_component(), 0.95);
        EXPECT_GE(e.specular.value.min_component(), 0.95);
    }
}

TEST(Field, BoxInteriorLearnsFullOcclusion) {
    RadianceMap env = fixtures::standard_env(16);
    auto train = interior_points(512, 18);
    OcclusionFitResult r = fit_occlusion_field(train, env, box_bvh(), OcclusionBakeConfig{}, OcclusionFitConfig{});
    for (const auto &p : interior_points(200, 19)) {
        OcclusionEstimate e = r.field.predict(p.position);
        EXPECT_LE(e.diffuse.value.max_component(), 0.05);
        EXPECT_LE(e.specular.value.max_component(), 0.05);
    }
}

TEST(Field, HalfWallMatchesFreshEstimates) {
    RadianceMap env = fixtures::standard_env(16);
    OcclusionBakeConfig bake;
    OcclusionFitResult r =
        fit_occlusion_field(wall_bvh(), env, 2048, Material{}, bake, OcclusionFitConfig{});
    ASSERT_FALSE(r.loss_history.empty());
    EXPECT_LT(r.loss_history.back(), r.loss_history.front());

    RngStream held(20, 0);
    auto probes = sample_surface(wall_bvh().mesh(), 300, held, Material{});
    OcclusionBakeConfig fresh;
    fresh.samples = 256;
    fresh.seed = 99;
    BakedOcclusion oracle = bake_occlusion(probes, env, wall_bvh(), fresh);
    int good = 0;
    for (size_t i = 0; i < probes.size(); ++i) {
        OcclusionEstimate e = r.field.predict(probes[i].position);
        double err = 0;
        for (int c = 0; c < 3; ++c) {
            err = std::max(err, std::abs(e.diffuse.value[c] - oracle.estimates[i].diffuse.value[c]));
            err = std::max(err, std::abs(e.specular.value[c] - oracle.estimates[i].specular.value[c]));
        }
        good += err <= 0.1;
    }
    EXPECT_GE(good, int(0.8 * probes.size()));
}

TEST(Field, DeterministicPerSeed) {
    RadianceMap env = fixtures::standard_env(8);
    OcclusionFitConfig cfg;
    cfg.steps = 20;
    auto a = fit_occlusion_field(wall_bvh(), env, 128, Material{}, OcclusionBakeConfig{}, cfg);
    auto b = fit_occlusion_field(wall_bvh(), env, 128, Material{}, OcclusionBakeConfig{}, cfg);
    EXPECT_EQ(a.field.mlp().parameters(), b.field.mlp().parameters());
    EXPECT_EQ(OcclusionField::encoding_size(4), 27);
}
