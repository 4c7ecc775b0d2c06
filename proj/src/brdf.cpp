// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/brdf.h"

#include "ssibl/binary_io.h"
#include "ssibl/error.h"
#include "ssibl/parallel.h"
#include "ssibl/rng.h"
#include "ssibl/sampling.h"

namespace ssibl {

void validate(const Material &m) {
    auto in_unit = [](double v) { return v >= 0 && v <= 1; };
    require(in_unit(m.albedo.r) && in_unit(m.albedo.g) && in_unit(m.albedo.b), "albedo must lie in [0,1]^3");
    require(in_unit(m.metalness), "metalness must lie in [0,1]");
    require(in_unit(m.roughness), "roughness must lie in [0,1]");
}

double ggx_ndf(double cos_hn, double roughness) {
    double a2 = roughness * roughness;
    double d = cos_hn * cos_hn * (a2 - 1) + 1;
    return a2 / (kPi * d * d);
}

double ggx_ndf_simplified(double t, double roughness) {
    double a2 = roughness * roughness;
    double d = (1 + t) / 2 * (a2 - 1) + 1;
    return a2 / (kPi * d * d);
}

Rgb fresnel_f0(double metalness, const Rgb &albedo) {
    return Rgb((1 - metalness) * 0.04) + metalness * albedo;
}

Rgb fresnel_roughness(const Rgb &f0, double roughness, double cos_nv) {
    double grazing = std::pow(1 - std::clamp(cos_nv, 0.0, 1.0), 5);
    Rgb fr = f0 + (Rgb(1 - roughness) - f0) * grazing;
    return clamp(fr, 0.0, 1.0);
}

Rgb diffuse_weight(double metalness, const Rgb &fresnel) { return (1 - metalness) * (Rgb(1) - fresnel); }

Rgb fresnel_schlick(const Rgb &f0, double cos_vh) {
    double fc = std::pow(1 - std::clamp(cos_vh, 0.0, 1.0), 5);
    return f0 + (Rgb(1) - f0) * fc;
}

namespace {

double smith_lambda(double cos_theta, double roughness) {
    double c2 = cos_theta * cos_theta;
    double tan2 = std::max(0.0, 1 - c2) / c2;
    return (-1 + std::sqrt(1 + roughness * roughness * tan2)) / 2;
}

}  // namespace

double smith_g2(double cos_nv, double cos_nl, double roughness) {
    if (cos_nv <= 0 || cos_nl <= 0)
        return 0;
    return 1 / (1 + smith_lambda(cos_nv, roughness) + smith_lambda(cos_nl, roughness));
}

Rgb cook_torrance_fs(const Vec3 &wi, const Vec3 &wo, const Vec3 &n, const Material &material) {
    double nl = dot(wi, n), nv = dot(wo, n);
    if (nl <= 0 || nv <= 0)
        return {};
    double alpha = std::max(material.roughness, kMinRoughness);
    Vec3 h = normalize(wi + wo);
    double d = ggx_ndf(std::clamp(dot(h, n), 0.0, 1.0), alpha);
    Rgb f = fresnel_schlick(fresnel_f0(material.metalness, material.albedo), dot(wo, h));
    double g = smith_g2(nv, nl, alpha);
    return f * (d * g / std::max(4 * nv * nl, 1e-6));
}

LutValue integrate_brdf_lut_cell(double cos_nv, double roughness, int samples, uint64_t seed, uint64_t stream) {
    RngStream rng(seed, stream);
    const double alpha = std::max(roughness, kMinRoughness);
    const double a2 = alpha * alpha;
    const double nv = std::clamp(cos_nv, 1e-4, 1.0);
    const Vec3 v{std::sqrt(1 - nv * nv), 0, nv};

    // Jittered nx x ny strata over (u1, u2); up to nx - 1 of the requested
    // samples are dropped so every stratum gets exactly one.
    const int nx = std::max(1, static_cast<int>(std::sqrt(double(samples))));
    const int ny = samples / nx;
    const int used = nx * ny;
    double scale = 0, bias = 0;
    for (int k = 0; k < used; ++k) {
        double u1 = (k / nx + rng.uniform()) / ny;
        double u2 = (k % nx + rng.uniform()) / nx;
        double cos2 = (1 - u1) / (1 + (a2 - 1) * u1);
        double nh = std::sqrt(std::clamp(cos2, 0.0, 1.0));
        double sh = std::sqrt(std::max(0.0, 1 - nh * nh));
        double phi = 2 * kPi * u2;
        Vec3 h{sh * std::cos(phi), sh * std::sin(phi), nh};
        double vh = dot(v, h);
        Vec3 l = 2 * vh * h - v;
        if (l.z <= 0 || vh <= 0)
            continue;
        // f_s <l,n> / pdf(l) with pdf(l) = D (n.h) / (4 v.h); D cancels.
        double weight = smith_g2(nv, l.z, alpha) * vh / (nh * nv);
        double fc = std::pow(1 - vh, 5);
        scale += (1 - fc) * weight;
        bias += fc * weight;
    }
    scale /= used;
    bias /= used;
    // The directional albedo is at most 1; noise can push near-mirror cells over.
    if (double total = scale + bias; total > 1) {
        scale /= total;
        bias /= total;
    }
    return {scale, bias};
}

BrdfLut::BrdfLut(int resolution) : resolution_(resolution) {
    require(resolution >= 2, "LUT resolution must be at least 2");
    values_.assign(size_t(resolution) * resolution * 2, 0.0f);
}

BrdfLut bake_brdf_lut(int resolution, int samples_per_cell, uint64_t seed) {
    require(resolution >= 16, "LUT resolution must be >= 16");
    require(samples_per_cell >= 256, "LUT samples per cell must be >= 256");
    BrdfLut lut(resolution);
    parallel_for(0, int64_t(resolution) * resolution, [&](int64_t k) {
        int i = static_cast<int>(k % resolution), j = static_cast<int>(k / resolution);
        lut.set(i, j, integrate_brdf_lut_cell(lut.cos_at(i), lut.roughness_at(j), samples_per_cell, seed, k));
    });
    return lut;
}

LutValue lookup_lut(const BrdfLut &lut, double cos_nv, double roughness) {
    const int n = lut.resolution();
    auto coord = [n](double x) {
        double p = std::clamp(x * n - 0.5, 0.0, double(n - 1));
        int i0 = std::min(static_cast<int>(p), n - 2);
        return std::pair{i0, p - i0};
    };
    auto [i0, tx] = coord(std::isfinite(cos_nv) ? cos_nv : 0.0);
    auto [j0, ty] = coord(std::isfinite(roughness) ? roughness : 0.0);
    LutValue a = lut.at(i0, j0), b = lut.at(i0 + 1, j0), c = lut.at(i0, j0 + 1), d = lut.at(i0 + 1, j0 + 1);
    auto mix = [&](double va, double vb, double vc, double vd) {
        return (va * (1 - tx) + vb * tx) * (1 - ty) + (vc * (1 - tx) + vd * tx) * ty;
    };
    return {mix(a.scale, b.scale, c.scale, d.scale), mix(a.bias, b.bias, c.bias, d.bias)};
}

std::vector<uint8_t> encode_lut(const BrdfLut &lut) {
    ByteWriter out;
    out.text("SSLUT1");
    out.u32(static_cast<uint32_t>(lut.resolution()));
    for (float v : lut.raw())
        out.f32(v);
    return out.buffer();
}

BrdfLut decode_lut(std::span<const uint8_t> bytes) {
    ByteReader in(bytes, "LUT");
    if (!in.expect("SSLUT1"))
        fail(ErrorCode::kMalformedHeader, "missing SSLUT1 magic");
    uint32_t res = in.u32();
    if (res < 2 || res > 8192)
        fail(ErrorCode::kMalformedHeader, "implausible LUT resolution " + std::to_string(res));
    BrdfLut lut(static_cast<int>(res));
    for (int j = 0; j < lut.resolution(); ++j)
        for (int i = 0; i < lut.resolution(); ++i) {
            float f1 = in.f32();
            float f2 = in.f32();
            lut.set(i, j, {f1, f2});
        }
    if (in.remaining() != 0)
        fail(ErrorCode::kParse, "trailing bytes after LUT payload");
    return lut;
}

void save_lut(const BrdfLut &lut, const std::filesystem::path &path) { write_file_atomic(path, encode_lut(lut)); }

BrdfLut load_lut(const std::filesystem::path &path) { return decode_lut(read_file(path)); }

}  // namespace ssibl
