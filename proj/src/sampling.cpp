// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/sampling.h"

#include <string>

#include "ssibl/brdf.h"
#include "ssibl/error.h"

namespace ssibl {

Onb build_onb(const Vec3 &n) {
    double sign = std::copysign(1.0, n.z);
    double a = -1.0 / (sign + n.z);
    double b = n.x * n.y * a;
    Vec3 t{1 + sign * n.x * n.x * a, sign * b, -sign * n.x};
    Vec3 bt{b, sign + n.y * n.y * a, -n.y};
    return {t, bt, n};
}

DirectionSample uniform_sphere(RngStream &rng) {
    double z = 1 - 2 * rng.uniform();
    double r = std::sqrt(std::max(0.0, 1 - z * z));
    double phi = 2 * kPi * rng.uniform();
    return {{r * std::cos(phi), r * std::sin(phi), z}, kUniformSpherePdf};
}

DirectionSample cos_hemisphere(const Vec3 &n, RngStream &rng) {
    double ux = 2 * rng.uniform() - 1;
    double uy = 2 * rng.uniform() - 1;
    double dx = 0, dy = 0;
    if (ux != 0 || uy != 0) {
        double r, theta;
        if (std::abs(ux) > std::abs(uy)) {
            r = ux;
            theta = kPi / 4 * (uy / ux);
        } else {
            r = uy;
            theta = kPi / 2 - kPi / 4 * (ux / uy);
        }
        dx = r * std::cos(theta);
        dy = r * std::sin(theta);
    }
    double z = std::sqrt(std::max(0.0, 1 - dx * dx - dy * dy));
    Vec3 dir = build_onb(n).to_world({dx, dy, z});
    return {dir, z * kInvPi};
}

double cos_hemisphere_pdf(const Vec3 &dir, const Vec3 &n) { return std::max(0.0, dot(dir, n)) * kInvPi; }

double ggx_lobe_inverse_cdf(double xi, double roughness) {
    // With s = (1 + t) / 2 the marginal CDF is F(s) = rho^2 s / (1 + (rho^2 - 1) s).
    double a2 = roughness * roughness;
    double s = xi / (a2 * (1 - xi) + xi);
    return std::clamp(2 * s - 1, -1.0, 1.0);
}

double ggx_lobe_cdf(double t, double roughness) {
    double a2 = roughness * roughness;
    double s = std::clamp((1 + t) / 2, 0.0, 1.0);
    return a2 * s / (1 + (a2 - 1) * s);
}

DirectionSample ggx_lobe(const Vec3 &axis, double roughness, RngStream &rng) {
    if (!(roughness >= kMinRoughness && roughness <= 1))
        fail(ErrorCode::kInvalidArgument, "lobe roughness " + std::to_string(roughness) + " outside [1e-3, 1]");
    double t = ggx_lobe_inverse_cdf(rng.uniform(), roughness);
    double phi = 2 * kPi * rng.uniform();
    double s = std::sqrt(std::max(0.0, 1 - t * t));
    Vec3 dir = build_onb(axis).to_world({s * std::cos(phi), s * std::sin(phi), t});
    return {dir, ggx_ndf_simplified(t, roughness) / 4};
}

double ggx_lobe_pdf(const Vec3 &dir, const Vec3 &axis, double roughness) {
    return ggx_ndf_simplified(std::clamp(dot(dir, axis), -1.0, 1.0), roughness) / 4;
}

}  // namespace ssibl
