// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "ssibl/rng.h"
#include "ssibl/vecmath.h"

namespace ssibl {

// Roughness below which the simplified GGX lobe is treated as a delta and
// callers fall back to a direct environment lookup.
inline constexpr double kMinRoughness = 1e-3;

struct DirectionSample {
    Vec3 dir;
    double pdf = 0;  // solid-angle density
};

// Right-handed orthonormal frame with n as the third axis (Duff et al. 2017).
struct Onb {
    Vec3 t, b, n;

    Vec3 to_world(const Vec3 &local) const { return local.x * t + local.y * b + local.z * n; }
    Vec3 to_local(const Vec3 &w) const { return {dot(w, t), dot(w, b), dot(w, n)}; }
};

Onb build_onb(const Vec3 &n);

DirectionSample uniform_sphere(RngStream &rng);
inline constexpr double kUniformSpherePdf = 1 / (4 * kPi);

// Cosine-weighted hemisphere about n via the concentric disk mapping.
DirectionSample cos_hemisphere(const Vec3 &n, RngStream &rng);
double cos_hemisphere_pdf(const Vec3 &dir, const Vec3 &n);

// Samples the full sphere with density D_simplified(<dir, axis>, rho) / 4.
// The polar coordinate t = <dir, axis> is drawn by inverting the CDF of
// (pi/2) D_simplified(t, rho); the azimuth is uniform. Requires
// rho in [kMinRoughness, 1].
DirectionSample ggx_lobe(const Vec3 &axis, double roughness, RngStream &rng);
double ggx_lobe_pdf(const Vec3 &dir, const Vec3 &axis, double roughness);

// Inverse CDF of the lobe marginal: maps xi in [0,1) to t = <dir, axis>.
double ggx_lobe_inverse_cdf(double xi, double roughness);
double ggx_lobe_cdf(double t, double roughness);

}  // namespace ssibl
