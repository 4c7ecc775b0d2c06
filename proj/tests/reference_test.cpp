// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "ssibl/error.h"
#include "ssibl/fixtures.h"
#include "ssibl/metrics.h"
#include "ssibl/reference.h"
#include "ssibl/sampling.h"
#include "ssibl/shading.h"
#include "test_support.h"

using namespace ssibl;

namespace {

struct Probe {
    SurfacePoint point;
    Vec3 wo;
};

std::vector<Probe> random_probes(int count, uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<Probe> out;
    for (int p = 0; p < count; ++p) {
        Vec3 n = uniform_sphere(rng).dir;
        Onb f = build_onb(n);
        double nv = 0.2 + 0.8 * rng.uniform(), phi = 2 * kPi * rng.uniform(), s = std::sqrt(1 - nv * nv);
        Material m{Rgb(0.2 + 0.7 * rng.uniform(), 0.2 + 0.7 * rng.uniform(), 0.2 + 0.7 * rng.uniform()),
                   rng.uniform(), 0.25 + 0.75 * rng.uniform()};
        out.push_back({{{0, 0, 0}, n, m}, f.to_world({s * std::cos(phi), s * std::sin(phi), nv})});
    }
    return out;
}

struct Moments {
    Rgb mean, var;
};

// Mean and variance of the N-sample estimator over independent streams.
Moments over_seeds(const Probe &p, const RadianceMap &env, int samples, int seeds, uint64_t stream_base,
                   const ReferenceOptions &opts = {}) {
    Rgb sum, sum2;
    for (int s = 0; s < seeds; ++s) {
        RngStream rng(77, stream_base + s);
        Rgb v = mc_reflectance(p.point, p.wo, env, nullptr, samples, rng, opts);
        sum += v;
        sum2 += v * v;
    }
    Rgb mean = sum * (1.0 / seeds);
    return {mean, (sum2 * (1.0 / seeds) - mean * mean) * (double(seeds) / (seeds - 1))};
}

std::shared_ptr<const PrefilteredPyramid> constant_pyramid(Rgb c) {
    std::vector<PyramidLevel> levels;
    for (double r : {0.0, 1.0})
        levels.push_back({r, RadianceMap(8, c)});
    return std::make_shared<const PrefilteredPyramid>(std::move(levels));
}

}  // namespace

TEST(McReflectance, BlackEnvironmentIsBlack) {
    RadianceMap black(16, Rgb(0));
    RngStream rng(1, 0);
    for (const Probe &p : random_probes(10, 1))
        EXPECT_EQ(mc_reflectance(p.point, p.wo, black, nullptr, 64, rng), Rgb());
}

TEST(McReflectance, DiffuseOnlyUnitWeightIsTheConstant) {
    const Rgb c(0.3, 0.9, 2.0);
    RadianceMap env(16, c);
    ReferenceOptions opts;
    opts.mode = ReflectanceMode::kDiffuseOnly;
    opts.kd_override = Rgb(1);
    RngStream rng(2, 0);
    SurfacePoint sp{{0, 0, 0}, normalize(Vec3{1, 2, 3}), {Rgb(1), 0, 0.5}};
    Rgb got = mc_reflectance(sp, sp.normal, env, nullptr, 256, rng, opts);
    for (int k = 0; k < 3; ++k)
        EXPECT_NEAR(got[k], c[k], 1e-12);
}

TEST(McReflectance, BackFacingIsBlack) {
    RadianceMap env(16, Rgb(1));
    RngStream rng(3, 0);
    SurfacePoint sp{{0, 0, 0}, {0, 0, 1}, Material{}};
    EXPECT_EQ(mc_reflectance(sp, {0, 0.6, -0.8}, env, nullptr, 16, rng), Rgb());
    EXPECT_THROW(mc_reflectance(sp, {0, 0, 1}, env, nullptr, 0, rng), Error);
}

TEST(McReflectance, FresnelChainMatchesShadeDiffuse) {
    const Rgb c(0.7, 1.1, 0.4);
    RadianceMap env(16, c);
    IllumSource illum(constant_pyramid(c));
    ReferenceOptions opts;
    opts.mode = ReflectanceMode::kDiffuseOnly;
    RngStream rng(4, 0);
    for (const Probe &p : random_probes(20, 4)) {
        Rgb ref = mc_reflectance(p.point, p.wo, env, nullptr, 32, rng, opts);
        Rgb split = shade_diffuse(p.point, p.wo, illum);
        for (int k = 0; k < 3; ++k)
            EXPECT_NEAR(ref[k], split[k], 1e-12 * (1 + split[k]));
    }
}

TEST(McReflectance, ConvergesBetweenNAndFourN) {
    RadianceMap env = fixtures::standard_env(32);
    for (const Probe &p : random_probes(6, 5)) {
        const int n = 1024;
        Moments m = over_seeds(p, env, n, 20, 0);
        RngStream a(5, 1000), b(5, 2000);
        Rgb est_n = mc_reflectance(p.point, p.wo, env, nullptr, n, a);
        Rgb est_4n = mc_reflectance(p.point, p.wo, env, nullptr, 4 * n, b);
        for (int k = 0; k < 3; ++k) {
            // Var(est(4N)) is a quarter of Var(est(N)).
            double sigma = std::sqrt(m.var[k] * 1.25);
            EXPECT_LE(std::abs(est_n[k] - est_4n[k]), 3 * sigma) << "channel " << k;
        }
    }
}

TEST(McReflectance, UnbiasedSingleSampleMean) {
    RadianceMap env = fixtures::standard_env(32);
    for (const Probe &p : random_probes(4, 6)) {
        Moments single = over_seeds(p, env, 1, 100, 0);
        RngStream rng(6, 99999);
        Rgb dense = mc_reflectance(p.point, p.wo, env, nullptr, 100000, rng);
        for (int k = 0; k < 3; ++k)
            EXPECT_NEAR(single.mean[k], dense[k], 3 * std::sqrt(single.var[k] / 100)) << "channel " << k;
    }
}

TEST(McReflectance, GgxHalfVectorDensity) {
    // Fraction of half vectors with <h, n> < 0.8 against quadrature of D(t) t over that band.
    const double rho = 0.5;
    RngStream rng(7, 0);
    const Vec3 n{0, 0, 1};
    const int count = 200000;
    double below = 0;
    for (int i = 0; i < count; ++i) {
        Vec3 h = sample_ggx_half_vector(n, rho, rng);
        EXPECT_GE(h.z, 0);
        below += h.z < 0.8;
    }
    const double a2 = rho * rho;
    auto density = [&](double t) {
        double q = t * t * (a2 - 1) + 1;
        return 2 * kPi * a2 / (kPi * q * q) * t;
    };
    EXPECT_NEAR(testutil::simpson(density, 0, 1, 2000), 1, 1e-9);
    double expect = testutil::simpson(density, 0, 0.8, 2000);
    EXPECT_NEAR(below / count, expect, 3 * std::sqrt(expect * (1 - expect) / count));
}

TEST(RenderReference, MissPixelsAreTheBackgroundExactly) {
    auto env = std::make_shared<const RadianceMap>(fixtures::standard_env(16));
    Scene scene{std::make_shared<const Bvh>(fixtures::uv_sphere(1.0, 24, 12)), Material{}};
    Camera cam = fixtures::sphere_camera(24);
    ReferenceConfig cfg;
    cfg.samples = 4;
    cfg.background = env;
    auto r = render_reference(scene, cam, *env, cfg);
    int misses = 0;
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x)
            if (!r.coverage[size_t(y) * 24 + x]) {
                ++misses;
                ASSERT_EQ(r.image.at(x, y), sample_bilinear(*env, cam.primary_ray(x, y).dir));
            }
    EXPECT_GT(misses, 100);
}

TEST(RenderReference, DeterministicPerSeed) {
    RadianceMap env = fixtures::standard_env(16);
    Scene scene{std::make_shared<const Bvh>(fixtures::uv_sphere(1.0, 24, 12)), Material{Rgb(0.5), 0.2, 0.3}};
    Camera cam = fixtures::sphere_camera(16);
    ReferenceConfig cfg;
    cfg.samples = 8;
    auto a = render_reference(scene, cam, env, cfg), b = render_reference(scene, cam, env, cfg);
    EXPECT_EQ(a.image, b.image);
    cfg.seed = 2;
    EXPECT_NE(render_reference(scene, cam, env, cfg).image, a.image);
}

TEST(RenderReference, VarianceHalvesWhenSamplesDouble) {
    RadianceMap env = fixtures::standard_env(16);
    Scene scene{std::make_shared<const Bvh>(fixtures::uv_sphere(1.0, 24, 12)), Material{Rgb(0.7), 0.3, 0.5}};
    Camera cam = fixtures::sphere_camera(8);
    const int seeds = 100;
    std::vector<double> xs, ys;
    for (int n : {8, 16, 32, 64}) {
        std::vector<Rgb> sum(64), sum2(64);
        std::vector<uint8_t> coverage;
        for (int s = 0; s < seeds; ++s) {
            ReferenceConfig cfg;
            cfg.samples = n;
            cfg.seed = 1000 + s;
            auto r = render_reference(scene, cam, env, cfg);
            coverage = r.coverage;
            for (int i = 0; i < 64; ++i) {
                sum[i] += r.image.texels()[i];
                sum2[i] += r.image.texels()[i] * r.image.texels()[i];
            }
        }
        double var = 0;
        int covered = 0;
        for (int i = 0; i < 64; ++i) {
            if (!coverage[i])
                continue;
            ++covered;
            for (int k = 0; k < 3; ++k)
                var += (sum2[i][k] - sum[i][k] * sum[i][k] / seeds) / (seeds - 1);
        }
        ASSERT_GT(covered, 8);
        xs.push_back(std::log(double(n)));
        ys.push_back(std::log(var / covered));
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
    EXPECT_NEAR(sxy / sxx, -1.0, 0.1);
}

TEST(RenderReference, LambertianMatchesSplitSum) {
    const Rgb c(0.9, 0.7, 0.5);
    auto env = std::make_shared<const RadianceMap>(RadianceMap(16, c));
    Scene scene{std::make_shared<const Bvh>(fixtures::uv_sphere(1.0)), Material{Rgb(0.8), 0, 0.5}};
    Camera cam = fixtures::sphere_camera(48);
    ReferenceConfig ref_cfg;
    ref_cfg.samples = 64;
    ref_cfg.options.mode = ReflectanceMode::kDiffuseOnly;
    auto ref = render_reference(scene, cam, *env, ref_cfg);
    RenderConfig cfg;
    cfg.shade.specular = false;
    auto split = render(scene, cam, IllumSource(constant_pyramid(c)), bake_brdf_lut(16, 256, 1), cfg);
    EXPECT_EQ(ref.coverage, split.coverage);
    auto cmp = compare_images(split.image, ref.image, false, ref.coverage);
    EXPECT_GE(cmp.psnr, 40);
}
