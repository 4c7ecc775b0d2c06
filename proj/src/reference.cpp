// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/reference.h"

#include <cmath>

#include "ssibl/error.h"
#include "ssibl/parallel.h"
#include "ssibl/sampling.h"

namespace ssibl {

Vec3 sample_ggx_half_vector(const Vec3 &n, double roughness, RngStream &rng) {
    const double alpha = std::max(roughness, kMinRoughness);
    const double a2 = alpha * alpha;
    const double u1 = rng.uniform(), u2 = rng.uniform();
    const double cos2 = (1 - u1) / (1 + (a2 - 1) * u1);
    const double ct = std::sqrt(std::clamp(cos2, 0.0, 1.0));
    const double st = std::sqrt(std::max(0.0, 1 - ct * ct));
    const double phi = 2 * kPi * u2;
    return build_onb(n).to_world({st * std::cos(phi), st * std::sin(phi), ct});
}

Rgb mc_reflectance(const SurfacePoint &point, const Vec3 &wo, const RadianceMap &env, const Bvh *bvh, int samples,
                   RngStream &rng, const ReferenceOptions &options) {
    require(samples >= 1, "reference sample count must be >= 1");
    const Vec3 &n = point.normal;
    const double nv = dot(n, wo);
    if (nv <= 0)
        return {};
    const Material &m = point.material;
    const double t_min = bvh ? (options.ray_offset >= 0 ? options.ray_offset : default_ray_offset(bvh->mesh())) : 0;
    auto visible = [&](const Vec3 &dir) { return !bvh || !bvh->occluded(point.position, dir, t_min); };

    Rgb total;
    if (options.mode != ReflectanceMode::kSpecularOnly) {
        const Rgb kd = options.kd_override
                           ? *options.kd_override
                           : diffuse_weight(m.metalness,
                                            fresnel_roughness(fresnel_f0(m.metalness, m.albedo), m.roughness, nv));
        // (k_d a / pi) L cos / (cos / pi) = k_d a L.
        Rgb sum;
        for (int i = 0; i < samples; ++i) {
            Vec3 dir = cos_hemisphere(n, rng).dir;
            if (dot(dir, n) > 0 && visible(dir))
                sum += sample_bilinear(env, dir);
        }
        total += kd * m.albedo * sum / double(samples);
    }
    if (options.mode != ReflectanceMode::kDiffuseOnly) {
        const double alpha = std::max(m.roughness, kMinRoughness);
        Rgb sum;
        for (int i = 0; i < samples; ++i) {
            Vec3 h = sample_ggx_half_vector(n, alpha, rng);
            double vh = dot(wo, h);
            if (vh <= 0)
                continue;
            Vec3 wi = normalize(2 * vh * h - wo);
            double nl = dot(n, wi);
            if (nl <= 0 || !visible(wi))
                continue;
            double nh = std::clamp(dot(n, h), 0.0, 1.0);
            double pdf = ggx_ndf(nh, alpha) * nh / (4 * vh);
            if (!(pdf > 0))
                continue;
            sum += cook_torrance_fs(wi, wo, n, m) * sample_bilinear(env, wi) * (nl / pdf);
        }
        total += sum / double(samples);
    }
    return total;
}

RenderResult render_reference(const Scene &scene, const Camera &camera, const RadianceMap &env,
                              const ReferenceConfig &cfg) {
    camera.validate();
    require(scene.bvh != nullptr, "scene has no geometry index");
    require(cfg.samples >= 1, "reference sample count must be >= 1");
    const Bvh &bvh = *scene.bvh;
    RenderResult result{Image(camera.width, camera.height), std::vector<uint8_t>(size_t(camera.width) * camera.height),
                        0};
    std::atomic<int64_t> back_facing{0};
    parallel_for(0, int64_t(camera.width) * camera.height, [&](int64_t id) {
        const int x = static_cast<int>(id % camera.width), y = static_cast<int>(id / camera.width);
        const Ray ray = camera.primary_ray(x, y);
        auto hit = bvh.intersect(ray);
        if (!hit) {
            result.image.at(x, y) = miss_radiance(cfg.background.get(), ray.dir);
            return;
        }
        result.coverage[id] = 1;
        const SurfacePoint sp = surface_point(bvh.mesh(), scene.materials, ray, *hit);
        const Vec3 wo = -1.0 * ray.dir;
        if (dot(sp.normal, wo) <= 0)
            back_facing.fetch_add(1, std::memory_order_relaxed);
        RngStream rng(cfg.seed, uint64_t(id));
        result.image.at(x, y) = mc_reflectance(sp, wo, env, cfg.occlusion ? &bvh : nullptr, cfg.samples, rng, cfg.options);
    });
    result.back_facing = back_facing.load();
    return result;
}

}  // namespace ssibl
