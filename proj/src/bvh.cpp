// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <array>
#include <numeric>

#include "ssibl/geometry.h"

namespace ssibl {

std::optional<Hit> intersect_triangle(const TriangleMesh &mesh, uint32_t index, const Ray &ray) {
    const Triangle &t = mesh.triangles()[index];
    const Vec3 &p0 = mesh.vertices()[t[0]];
    Vec3 e1 = mesh.vertices()[t[1]] - p0;
    Vec3 e2 = mesh.vertices()[t[2]] - p0;
    Vec3 pvec = cross(ray.dir, e2);
    double det = dot(e1, pvec);
    if (std::abs(det) < 1e-9)
        return std::nullopt;
    double inv_det = 1 / det;
    Vec3 tvec = ray.origin - p0;
    double u = dot(tvec, pvec) * inv_det;
    if (u < 0 || u > 1)
        return std::nullopt;
    Vec3 qvec = cross(tvec, e1);
    double v = dot(ray.dir, qvec) * inv_det;
    if (v < 0 || u + v > 1)
        return std::nullopt;
    double dist = dot(e2, qvec) * inv_det;
    if (!(dist > ray.t_min && dist < ray.t_max))
        return std::nullopt;
    return Hit{dist, index, u, v};
}

std::optional<Hit> intersect_brute_force(const TriangleMesh &mesh, const Ray &ray) {
    std::optional<Hit> best;
    Ray r = ray;
    for (uint32_t i = 0; i < mesh.triangles().size(); ++i)
        if (auto hit = intersect_triangle(mesh, i, r)) {
            best = hit;
            r.t_max = hit->t;
        }
    return best;
}

double default_ray_offset(const TriangleMesh &mesh) {
    double diag = mesh.diagonal();
    return diag > 0 ? 1e-3 * diag : 1e-4;
}

namespace {

constexpr int kBins = 12;
constexpr uint32_t kLeafSize = 4;

double surface_area(const Vec3 &lo, const Vec3 &hi) {
    Vec3 d = max(hi - lo, Vec3());
    return 2 * (d.x * d.y + d.y * d.z + d.z * d.x);
}

struct Bounds {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    void grow(const Vec3 &a, const Vec3 &b) {
        lo = min(lo, a);
        hi = max(hi, b);
    }
    void grow(const Vec3 &p) { grow(p, p); }
};

bool slab_test(const Vec3 &lo, const Vec3 &hi, const Vec3 &origin, const Vec3 &inv_dir, double t_min,
               double t_max) {
    for (int a = 0; a < 3; ++a) {
        double t0 = (lo[a] - origin[a]) * inv_dir[a];
        double t1 = (hi[a] - origin[a]) * inv_dir[a];
        if (t0 > t1)
            std::swap(t0, t1);
        // NaN from 0 * inf leaves the interval unchanged.
        if (t0 > t_min)
            t_min = t0;
        if (t1 < t_max)
            t_max = t1;
        if (t_min > t_max)
            return false;
    }
    return true;
}

}  // namespace

Bvh::Bvh(TriangleMesh mesh) : mesh_(std::move(mesh)) {
    const auto n = static_cast<uint32_t>(mesh_.triangles().size());
    if (n == 0)
        return;
    std::vector<Vec3> centroids(n), lo(n), hi(n);
    for (uint32_t i = 0; i < n; ++i) {
        const Triangle &t = mesh_.triangles()[i];
        const auto &v = mesh_.vertices();
        lo[i] = min(v[t[0]], min(v[t[1]], v[t[2]]));
        hi[i] = max(v[t[0]], max(v[t[1]], v[t[2]]));
        centroids[i] = (v[t[0]] + v[t[1]] + v[t[2]]) / 3;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * n);
    build(0, n, centroids, lo, hi);
}

uint32_t Bvh::build(uint32_t begin, uint32_t end, std::vector<Vec3> &centroids, std::vector<Vec3> &lo,
                    std::vector<Vec3> &hi) {
    Bounds box, cbox;
    for (uint32_t i = begin; i < end; ++i) {
        box.grow(lo[order_[i]], hi[order_[i]]);
        cbox.grow(centroids[order_[i]]);
    }
    auto index = static_cast<uint32_t>(nodes_.size());
    nodes_.push_back({box.lo, box.hi, begin, end - begin});
    const uint32_t count = end - begin;
    if (count <= kLeafSize)
        return index;

    Vec3 extent = cbox.hi - cbox.lo;
    int axis = extent.x > extent.y ? (extent.x > extent.z ? 0 : 2) : (extent.y > extent.z ? 1 : 2);
    uint32_t mid = begin + count / 2;

    if (extent[axis] > 0) {
        std::array<Bounds, kBins> bins;
        std::array<uint32_t, kBins> bin_count{};
        auto bin_of = [&](uint32_t prim) {
            int b = static_cast<int>(kBins * (centroids[prim][axis] - cbox.lo[axis]) / extent[axis]);
            return std::clamp(b, 0, kBins - 1);
        };
        for (uint32_t i = begin; i < end; ++i) {
            int b = bin_of(order_[i]);
            bins[b].grow(lo[order_[i]], hi[order_[i]]);
            ++bin_count[b];
        }
        double best_cost = std::numeric_limits<double>::infinity();
        int best_split = -1;
        for (int s = 1; s < kBins; ++s) {
            Bounds left, right;
            uint32_t nl = 0, nr = 0;
            for (int b = 0; b < s; ++b)
                if (bin_count[b]) {
                    left.grow(bins[b].lo, bins[b].hi);
                    nl += bin_count[b];
                }
            for (int b = s; b < kBins; ++b)
                if (bin_count[b]) {
                    right.grow(bins[b].lo, bins[b].hi);
                    nr += bin_count[b];
                }
            if (nl == 0 || nr == 0)
                continue;
            double cost = nl * surface_area(left.lo, left.hi) + nr * surface_area(right.lo, right.hi);
            if (cost < best_cost) {
                best_cost = cost;
                best_split = s;
            }
        }
        if (best_split > 0) {
            auto it = std::partition(order_.begin() + begin, order_.begin() + end,
                                     [&](uint32_t prim) { return bin_of(prim) < best_split; });
            mid = static_cast<uint32_t>(it - order_.begin());
        }
    }
    if (mid == begin || mid == end) {
        mid = begin + count / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](uint32_t a, uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });
    }

    build(begin, mid, centroids, lo, hi);
    uint32_t right = build(mid, end, centroids, lo, hi);
    nodes_[index].first = right;
    nodes_[index].count = 0;
    return index;
}

template <bool AnyHit>
std::optional<Hit> Bvh::traverse(const Ray &ray) const {
    if (nodes_.empty())
        return std::nullopt;
    Vec3 inv_dir{1 / ray.dir.x, 1 / ray.dir.y, 1 / ray.dir.z};
    std::optional<Hit> best;
    Ray r = ray;
    uint32_t stack[128];
    int top = 0;
    stack[top++] = 0;
    while (top > 0) {
        const Node &node = nodes_[stack[--top]];
        if (!slab_test(node.lo, node.hi, r.origin, inv_dir, r.t_min, r.t_max))
            continue;
        if (node.count > 0) {
            for (uint32_t k = node.first; k < node.first + node.count; ++k)
                if (auto hit = intersect_triangle(mesh_, order_[k], r)) {
                    if constexpr (AnyHit)
                        return hit;
                    best = hit;
                    r.t_max = hit->t;
                }
        } else {
            uint32_t self = static_cast<uint32_t>(&node - nodes_.data());
            uint32_t left = self + 1, right = node.first;
            int axis = 0;
            Vec3 ext = node.hi - node.lo;
            if (ext.y > ext[axis])
                axis = 1;
            if (ext.z > ext[axis])
                axis = 2;
            // Visit the child nearer along the ray first.
            if (r.dir[axis] < 0)
                std::swap(left, right);
            stack[top++] = right;
            stack[top++] = left;
        }
    }
    return best;
}

std::optional<Hit> Bvh::intersect(const Ray &ray) const { return traverse<false>(ray); }

bool Bvh::occluded(const Vec3 &origin, const Vec3 &dir, double t_min) const {
    return traverse<true>(Ray{origin, dir, t_min}).has_value();
}

}  // namespace ssibl
