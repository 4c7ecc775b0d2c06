// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ssibl/vecmath.h"

namespace ssibl {

// Metalness-workflow material. Roughness is used directly as the GGX alpha.
struct Material {
    Rgb albedo{0.8};
    double metalness = 0;
    double roughness = 0.5;
};

void validate(const Material &m);

// GGX / Trowbridge-Reitz NDF: rho^2 / (pi ((n.h)^2 (rho^2 - 1) + 1)^2).
double ggx_ndf(double cos_hn, double roughness);

// NDF with n = w_o = w_r, expressed through t = <w_i, w_r> only:
// (n.h)^2 becomes (1 + t) / 2.
double ggx_ndf_simplified(double t, double roughness);

// F0 = (1 - m) 0.04 + m a
Rgb fresnel_f0(double metalness, const Rgb &albedo);

// F_r = F0 + (1 - rho - F0)(1 - <n,v>)^5, clamped to [0,1] per channel.
Rgb fresnel_roughness(const Rgb &f0, double roughness, double cos_nv);

// k_d = (1 - m)(1 - F_r)
Rgb diffuse_weight(double metalness, const Rgb &fresnel);

Rgb fresnel_schlick(const Rgb &f0, double cos_vh);

// Height-correlated Smith masking-shadowing G2 for GGX.
double smith_g2(double cos_nv, double cos_nl, double roughness);

// Cook-Torrance specular D F G / (4 <o,n> <i,n>) with Schlick F and
// height-correlated Smith G. Zero when either direction is below the surface.
Rgb cook_torrance_fs(const Vec3 &wi, const Vec3 &wo, const Vec3 &n, const Material &material);

// Scale (F1) and bias (F2) applied to the Fresnel term in the split-sum
// specular integral: integral of f_s <w_i,n> = F * F1 + F2.
struct LutValue {
    double scale = 0;  // F1
    double bias = 0;   // F2
};

// Monte Carlo estimate of one LUT entry with GGX half-vector importance
// sampling, stratified along the polar coordinate. Normal is +z.
LutValue integrate_brdf_lut_cell(double cos_nv, double roughness, int samples, uint64_t seed, uint64_t stream);

// resolution x resolution grid. Column i holds cos_nv = (i + 0.5) / N, row j
// holds roughness (j + 0.5) / N. Entries are stored as 32-bit floats.
class BrdfLut {
  public:
    explicit BrdfLut(int resolution);

    int resolution() const { return resolution_; }
    double cos_at(int i) const { return (i + 0.5) / resolution_; }
    double roughness_at(int j) const { return (j + 0.5) / resolution_; }

    LutValue at(int i, int j) const {
        size_t k = index(i, j);
        return {values_[2 * k], values_[2 * k + 1]};
    }
    void set(int i, int j, LutValue v) {
        size_t k = index(i, j);
        values_[2 * k] = static_cast<float>(v.scale);
        values_[2 * k + 1] = static_cast<float>(v.bias);
    }

    // Interleaved (F1, F2) pairs, row-major over roughness then cos.
    const std::vector<float> &raw() const { return values_; }

    friend bool operator==(const BrdfLut &, const BrdfLut &) = default;

  private:
    size_t index(int i, int j) const { return size_t(j) * resolution_ + i; }

    int resolution_;
    std::vector<float> values_;
};

inline constexpr int kDefaultLutResolution = 64;
inline constexpr int kDefaultLutSamples = 1024;

// Requires resolution >= 16 and samples_per_cell >= 256. Cells are baked in
// parallel, each with its own RNG stream.
BrdfLut bake_brdf_lut(int resolution, int samples_per_cell, uint64_t seed);

// Bilinear lookup; inputs are clamped into the range of cell centres.
LutValue lookup_lut(const BrdfLut &lut, double cos_nv, double roughness);

// Binary layout: "SSLUT1", u32 resolution, then resolution^2 little-endian
// float32 pairs (F1, F2) in row-major order.
std::vector<uint8_t> encode_lut(const BrdfLut &lut);
BrdfLut decode_lut(std::span<const uint8_t> bytes);
void save_lut(const BrdfLut &lut, const std::filesystem::path &path);
BrdfLut load_lut(const std::filesystem::path &path);

}  // namespace ssibl
