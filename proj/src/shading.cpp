// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/shading.h"

#include <cmath>

#include "ssibl/error.h"
#include "ssibl/parallel.h"
#include "ssibl/sampling.h"

namespace ssibl {

void Camera::validate() const {
    require(fov_y > 0 && fov_y < kPi, "camera fov must lie in (0, pi)");
    require(width >= 1 && height >= 1, "image size must be positive");
    require(length(look_at - position) > 0, "camera look_at coincides with its position");
    require(length(cross(look_at - position, up)) > 1e-12, "camera up is parallel to the view direction");
}

Ray Camera::primary_ray(int x, int y) const {
    const Vec3 forward = normalize(look_at - position);
    const Vec3 right = normalize(cross(forward, up));
    const Vec3 true_up = cross(right, forward);
    const double half_h = std::tan(fov_y / 2);
    const double half_w = half_h * double(width) / double(height);
    const double sx = (2 * (x + 0.5) / width - 1) * half_w;
    const double sy = (1 - 2 * (y + 0.5) / height) * half_h;
    return {position, normalize(forward + sx * right + sy * true_up)};
}

DirectIllum DirectIllum::make(std::shared_ptr<const RadianceMap> env, int sample_count, uint64_t seed) {
    require(env != nullptr, "direct illumination needs an environment");
    RngStream rng(seed, 0xd12ec7ULL);
    auto samples = std::make_shared<const std::vector<LightSample>>(draw_light_samples(*env, sample_count, rng));
    return {std::move(env), std::move(samples)};
}

IllumSource::IllumSource(Backing backing) : backing_(std::move(backing)) {
    std::visit(
        [](const auto &b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, DirectIllum>)
                require(b.env && b.samples && !b.samples->empty(), "direct illumination is incomplete");
            else
                require(b != nullptr, "illumination source is null");
        },
        backing_);
}

Rgb IllumSource::pre_integrated(const Vec3 &dir, double roughness) const {
    roughness = std::clamp(roughness, 0.0, 1.0);
    return std::visit(
        [&](const auto &b) -> Rgb {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, DirectIllum>)
                return mc_prefilter(*b.env, dir, roughness, *b.samples);
            else if constexpr (std::is_same_v<T, std::shared_ptr<const IllumField>>)
                return b->evaluate(dir, roughness);
            else
                return lookup_pyramid(*b, dir, roughness);
        },
        backing_);
}

Rgb shade_specular(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum, const BrdfLut &lut,
                   ShadeStats *stats) {
    const Vec3 &n = point.normal;
    const double nv = dot(n, wo);
    if (nv <= 0) {
        if (stats)
            stats->back_facing.fetch_add(1, std::memory_order_relaxed);
        return {};
    }
    const Material &m = point.material;
    const Vec3 wr = normalize(reflect(wo, n));
    const Rgb fr = fresnel_roughness(fresnel_f0(m.metalness, m.albedo), m.roughness, nv);
    const LutValue ab = lookup_lut(lut, nv, m.roughness);
    return illum.pre_integrated(wr, m.roughness) * (fr * ab.scale + Rgb(ab.bias));
}

Rgb shade_diffuse(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum) {
    const Material &m = point.material;
    if (m.metalness >= 1)
        return {};
    const double nv = std::max(0.0, dot(point.normal, wo));
    const Rgb kd = diffuse_weight(m.metalness, fresnel_roughness(fresnel_f0(m.metalness, m.albedo), m.roughness, nv));
    return illum.pre_integrated(point.normal, 1.0) * kd * m.albedo;
}

Rgb shade(const SurfacePoint &point, const Vec3 &wo, const IllumSource &illum, const BrdfLut &lut,
          const OcclusionEstimate *occlusion, const ShadeOptions &options, ShadeStats *stats) {
    Rgb ld, ls;
    if (dot(point.normal, wo) <= 0) {
        // Interpolated normal turned away from the viewer: black, as in the reference.
        if (stats)
            stats->back_facing.fetch_add(1, std::memory_order_relaxed);
        return {};
    }
    if (options.diffuse)
        ld = shade_diffuse(point, wo, illum);
    if (options.specular)
        ls = shade_specular(point, wo, illum, lut, stats);
    Rgb out = occlusion ? occlusion->diffuse.value * ld + occlusion->specular.value * ls : ld + ls;
    if (options.linear_output)
        return out;
    return {linear_to_srgb(out.r), linear_to_srgb(out.g), linear_to_srgb(out.b)};
}

Rgb miss_radiance(const RadianceMap *background, const Vec3 &dir) {
    return background ? sample_bilinear(*background, dir) : Rgb();
}

RenderResult render(const Scene &scene, const Camera &camera, const IllumSource &illum, const BrdfLut &lut,
                    const RenderConfig &cfg) {
    camera.validate();
    require(scene.bvh != nullptr, "scene has no geometry index");
    if (cfg.occlusion == OcclusionMode::kMonteCarlo)
        require(cfg.occlusion_env != nullptr && cfg.occlusion_samples >= 1,
                "Monte Carlo occlusion needs an environment and a positive sample count");
    if (cfg.occlusion == OcclusionMode::kBaked)
        require(cfg.baked_occlusion != nullptr && !cfg.baked_occlusion->positions.empty(),
                "baked occlusion mode needs a non-empty occlusion table");

    const Bvh &bvh = *scene.bvh;
    RenderResult result{Image(camera.width, camera.height), std::vector<uint8_t>(size_t(camera.width) * camera.height),
                        0};
    ShadeStats stats;
    const int64_t pixels = int64_t(camera.width) * camera.height;
    parallel_for(0, pixels, [&](int64_t id) {
        const int x = static_cast<int>(id % camera.width), y = static_cast<int>(id / camera.width);
        const Ray ray = camera.primary_ray(x, y);
        Rgb &out = result.image.at(x, y);
        auto hit = bvh.intersect(ray);
        if (!hit) {
            out = miss_radiance(cfg.background.get(), ray.dir);
            if (!cfg.shade.linear_output)
                out = {linear_to_srgb(out.r), linear_to_srgb(out.g), linear_to_srgb(out.b)};
            return;
        }
        result.coverage[id] = 1;
        const SurfacePoint sp = surface_point(bvh.mesh(), scene.materials, ray, *hit);
        const Vec3 wo = -1.0 * ray.dir;

        OcclusionEstimate occ;
        const OcclusionEstimate *occ_ptr = nullptr;
        if (cfg.occlusion == OcclusionMode::kMonteCarlo) {
            RngStream rng(cfg.seed, uint64_t(id));
            OcclusionQuery q{sp.position, sp.normal, cfg.ray_offset};
            occ.diffuse = mc_occlusion_diffuse(q, *cfg.occlusion_env, bvh, cfg.occlusion_samples, rng);
            occ.specular = mc_occlusion_specular(q, std::clamp(sp.material.roughness, kMinRoughness, 1.0),
                                                 *cfg.occlusion_env, bvh, cfg.occlusion_samples, rng);
            if (cfg.channel_average)
                occ = channel_average(occ);
            occ_ptr = &occ;
        } else if (cfg.occlusion == OcclusionMode::kBaked) {
            occ = nearest_occlusion(*cfg.baked_occlusion, sp.position);
            if (cfg.channel_average)
                occ = channel_average(occ);
            occ_ptr = &occ;
        }
        out = shade(sp, wo, illum, lut, occ_ptr, cfg.shade, &stats);
    });
    result.back_facing = stats.back_facing.load();
    return result;
}

}  // namespace ssibl
