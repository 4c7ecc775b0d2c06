// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "ssibl/brdf.h"
#include "ssibl/envmap.h"
#include "ssibl/geometry.h"
#include "ssibl/illum_field.h"
#include "ssibl/occlusion.h"
#include "ssibl/prefilter.h"

namespace ssibl {

struct Camera {
    Vec3 position{0, 0, 3};
    Vec3 look_at{0, 0, 0};
    Vec3 up{0, 1, 0};
    double fov_y = 0.7;  // radians
    int width = 128;
    int height = 128;

    void validate() const;
    // Ray through the centre of pixel (x, y); row 0 is the top of the image.
    Ray primary_ray(int x, int y) const;
};

// Direct Monte Carlo pre-integration over one shared light-sample set.
struct DirectIllum {
    std::shared_ptr<const RadianceMap> env;
    std::shared_ptr<const std::vector<LightSample>> samples;

    static DirectIllum make(std::shared_ptr<const RadianceMap> env, int sample_count, uint64_t seed);
};

// g(w, rho) from exactly one backing representation.
class IllumSource {
  public:
    using Backing =
        std::variant<std::shared_ptr<const PrefilteredPyramid>, std::shared_ptr<const IllumField>, DirectIllum>;

    explicit IllumSource(Backing backing);

    Rgb pre_integrated(const Vec3 &dir, double roughness) const;
    const Backing &backing() const { return backing_; }

  private:
    Backing backing_;
};

struct ShadeOptions {
    bool diffuse = true;
    bool specular = true;
    bool linear_output = true;  // false applies the sRGB transfer
};

// Counts views from below the surface; shared across render threads.
struct ShadeStats {
    std::atomic<int64_t> back_facing{0};
};

// Split-sum specular term. Back-facing views return black and bump
// stats->back_facing when stats is given.
Rgb shade_specular(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum, const BrdfLut &lut,
                   ShadeStats *stats = nullptr);
// g(n, 1) k_d a with k_d from the roughness-aware Fresnel at <n, wo>.
Rgb shade_diffuse(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum);

// gamma(o_d L_d + o_s L_s); no occlusion means unit factors.
Rgb shade(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum, const BrdfLut &lut,
          const OcclusionEstimate *occlusion = nullptr, const ShadeOptions &options = {},
          ShadeStats *stats = nullptr);

struct Scene {
    std::shared_ptr<const Bvh> bvh;
    MaterialSource materials = Material{};
};

enum class OcclusionMode { kNone, kMonteCarlo, kBaked };

struct RenderConfig {
    OcclusionMode occlusion = OcclusionMode::kNone;
    int occlusion_samples = 64;
    std::shared_ptr<const RadianceMap> occlusion_env;       // radiance weights for kMonteCarlo
    std::shared_ptr<const BakedOcclusion> baked_occlusion;  // for kBaked
    bool channel_average = false;
    std::shared_ptr<const RadianceMap> background;  // miss colour; black when null
    double ray_offset = -1;                         // default_ray_offset when negative
    uint64_t seed = 1;
    ShadeOptions shade;
};

struct RenderResult {
    Image image;                    // linear radiance unless shade.linear_output is false
    std::vector<uint8_t> coverage;  // 1 where the primary ray hit geometry
    int64_t back_facing = 0;
};

RenderResult render(const Scene &scene, const Camera &camera, const IllumSource &illum, const BrdfLut &lut,
                    const RenderConfig &cfg);

// Background colour for a primary ray that misses.
Rgb miss_radiance(const RadianceMap *background, const Vec3 &dir);

}  // namespace ssibl
