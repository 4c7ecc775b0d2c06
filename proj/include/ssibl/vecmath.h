// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ssibl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvPi = std::numbers::inv_pi;

struct Vec3 {
    double x = 0, y = 0, z = 0;

    constexpr Vec3() = default;
    constexpr Vec3(double x, double y, double z) : x(x), y(y), z(z) {}

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double &operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 &operator+=(const Vec3 &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3 &operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }
    friend constexpr Vec3 operator+(Vec3 a, const Vec3 &b) { return a += b; }
    friend constexpr Vec3 operator-(const Vec3 &a, const Vec3 &b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(const Vec3 &a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(const Vec3 &, const Vec3 &) = default;
};

constexpr double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double length(const Vec3 &v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalize(const Vec3 &v) { return v / length(v); }

constexpr Vec3 min(const Vec3 &a, const Vec3 &b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}

constexpr Vec3 max(const Vec3 &a, const Vec3 &b) {
    return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}

// Mirror d about n (both pointing away from the surface).
constexpr Vec3 reflect(const Vec3 &d, const Vec3 &n) { return 2 * dot(d, n) * n - d; }

// Linear RGB triple. Kept distinct from Vec3 so radiance and geometry
// never mix silently.
struct Rgb {
    double r = 0, g = 0, b = 0;

    constexpr Rgb() = default;
    constexpr explicit Rgb(double v) : r(v), g(v), b(v) {}
    constexpr Rgb(double r, double g, double b) : r(r), g(g), b(b) {}

    constexpr double operator[](int i) const { return i == 0 ? r : (i == 1 ? g : b); }
    constexpr double &operator[](int i) { return i == 0 ? r : (i == 1 ? g : b); }

    constexpr Rgb &operator+=(const Rgb &o) {
        r += o.r;
        g += o.g;
        b += o.b;
        return *this;
    }
    constexpr Rgb &operator*=(double s) {
        r *= s;
        g *= s;
        b *= s;
        return *this;
    }
    friend constexpr Rgb operator+(Rgb a, const Rgb &o) { return a += o; }
    friend constexpr Rgb operator-(const Rgb &a, const Rgb &o) {
        return {a.r - o.r, a.g - o.g, a.b - o.b};
    }
    friend constexpr Rgb operator*(const Rgb &a, const Rgb &o) {
        return {a.r * o.r, a.g * o.g, a.b * o.b};
    }
    friend constexpr Rgb operator*(Rgb a, double s) { return a *= s; }
    friend constexpr Rgb operator*(double s, Rgb a) { return a *= s; }
    friend constexpr Rgb operator/(const Rgb &a, double s) { return {a.r / s, a.g / s, a.b / s}; }
    friend constexpr Rgb operator/(const Rgb &a, const Rgb &o) {
        return {a.r / o.r, a.g / o.g, a.b / o.b};
    }
    friend constexpr bool operator==(const Rgb &, const Rgb &) = default;

    constexpr double max_component() const { return std::max(r, std::max(g, b)); }
    constexpr double min_component() const { return std::min(r, std::min(g, b)); }
    constexpr double average() const { return (r + g + b) / 3; }
};

inline Rgb clamp(const Rgb &c, double lo, double hi) {
    return {std::clamp(c.r, lo, hi), std::clamp(c.g, lo, hi), std::clamp(c.b, lo, hi)};
}

inline bool is_finite(const Rgb &c) {
    return std::isfinite(c.r) && std::isfinite(c.g) && std::isfinite(c.b);
}

inline double squared_norm(const Rgb &c) { return c.r * c.r + c.g * c.g + c.b * c.b; }

}  // namespace ssibl
