// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssibl/envmap.h"
#include "ssibl/rng.h"
#include "ssibl/vecmath.h"

namespace ssibl {

inline constexpr int kDefaultLightSamples = 8192;
inline constexpr int kDefaultPyramidLevels = 6;

// A light direction together with the radiance arriving from it.
struct LightSample {
    Vec3 dir;
    Rgb radiance;
};

// count directions uniform on the sphere, radiance from a bilinear lookup.
std::vector<LightSample> draw_light_samples(const RadianceMap &env, int count, RngStream &rng);

// Shared-sample ratio estimator of pre-integrated illumination:
//
//   g(w_r, rho) = sum D(w_i, w_r, rho) L_i <w_i,w_r>+ / sum D(w_i, w_r, rho) <w_i,w_r>+
//
// with the simplified GGX D and negative cosines clamped to zero. Requires
// rho >= kMinRoughness; throws kDegenerateEstimator when the denominator is
// <= 1e-12 (no sample in the hemisphere about w_r).
Rgb prefilter_ratio(const Vec3 &reflected, double roughness, std::span<const LightSample> samples);

// Same as prefilter_ratio, except that rho < kMinRoughness returns the
// environment itself along w_r (g(w, 0) = L_i(w)).
Rgb mc_prefilter(const RadianceMap &env, const Vec3 &reflected, double roughness,
                 std::span<const LightSample> samples);

// (1/pi) integral of L_i <w_i,n>+ over the sphere, by texel quadrature with
// exact per-row solid angles.
Rgb diffuse_irradiance_quadrature(const RadianceMap &env, const Vec3 &n);

// The same quantity through the ratio estimator at rho = 1.
Rgb diffuse_irradiance_mc(const Vec3 &n, std::span<const LightSample> samples);

struct PyramidLevel {
    double roughness;
    RadianceMap map;
};

// Environment pre-filtered at increasing roughness. Level 0 is the input at
// roughness 0; the last level has roughness 1.
class PrefilteredPyramid {
  public:
    explicit PrefilteredPyramid(std::vector<PyramidLevel> levels);

    const std::vector<PyramidLevel> &levels() const { return levels_; }
    size_t size() const { return levels_.size(); }

  private:
    std::vector<PyramidLevel> levels_;
};

// Level k holds the estimator at roughness k / (level_count - 1), one fresh
// uniform light set per texel drawn from stream (seed, texel id).
PrefilteredPyramid bake_pyramid(const RadianceMap &env, int level_count, int samples_per_texel, uint64_t seed);

// Bilinear within the two levels bracketing rho, linear across rho.
Rgb lookup_pyramid(const PrefilteredPyramid &pyramid, const Vec3 &dir, double roughness);

// On disk: a directory with level_<k>.hdr files and pyramid.txt:
//
//   ssibl-pyramid 1
//   levels <count>
//   level <k> <roughness> level_<k>.hdr
//   ...
void save_pyramid(const PrefilteredPyramid &pyramid, const std::filesystem::path &dir);
PrefilteredPyramid load_pyramid(const std::filesystem::path &dir);

}  // namespace ssibl
