// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>

#include "ssibl/envmap.h"
#include "ssibl/geometry.h"
#include "ssibl/shading.h"

namespace ssibl {

enum class ReflectanceMode { kFull, kDiffuseOnly, kSpecularOnly };

struct ReferenceOptions {
    ReflectanceMode mode = ReflectanceMode::kFull;
    std::optional<Rgb> kd_override;  // replaces the Fresnel-derived k_d
    double ray_offset = -1;          // default_ray_offset when negative
};

// Brute-force estimate of the reflected radiance toward wo: N cosine samples
// for the Lambertian term plus N GGX half-vector samples for f_s, with
// visibility from bvh when given. Back-facing views return black.
Rgb mc_reflectance(const SurfacePoint &point, const Vec3 &wo, const RadianceMap &env, const Bvh *bvh, int samples,
                   RngStream &rng, const ReferenceOptions &options = {});

// Samples a half vector about n with density D(h) <h, n> (full GGX NDF).
Vec3 sample_ggx_half_vector(const Vec3 &n, double roughness, RngStream &rng);

struct ReferenceConfig {
    int samples = 1024;  // per pixel, per lobe
    bool occlusion = false;
    uint64_t seed = 1;
    std::shared_ptr<const RadianceMap> background;  // miss colour; black when null
    ReferenceOptions options;
};

// One centre ray per pixel, per-pixel RNG streams; misses take the
// background exactly.
RenderResult render_reference(const Scene &scene, const Camera &camera, const RadianceMap &env,
                              const ReferenceConfig &cfg);

}  // namespace ssibl
