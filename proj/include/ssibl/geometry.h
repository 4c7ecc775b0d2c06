// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ssibl/brdf.h"
#include "ssibl/rng.h"
#include "ssibl/vecmath.h"

namespace ssibl {

using Triangle = std::array<uint32_t, 3>;

// Indexed triangle mesh with unit per-vertex normals. Construction drops
// zero-area triangles and validates indices and normals. An empty mesh is
// valid and stands for "no occluders".
class TriangleMesh {
  public:
    TriangleMesh() = default;
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Vec3> normals, std::vector<Triangle> triangles);

    // Fills normals with area-weighted averages of the adjacent faces.
    static TriangleMesh with_computed_normals(std::vector<Vec3> vertices, std::vector<Triangle> triangles);

    const std::vector<Vec3> &vertices() const { return vertices_; }
    const std::vector<Vec3> &normals() const { return normals_; }
    const std::vector<Triangle> &triangles() const { return triangles_; }
    bool empty() const { return triangles_.empty(); }

    double triangle_area(size_t index) const;
    Vec3 bounds_min() const { return lo_; }
    Vec3 bounds_max() const { return hi_; }
    double diagonal() const { return empty() ? 0.0 : length(hi_ - lo_); }

  private:
    std::vector<Vec3> vertices_;
    std::vector<Vec3> normals_;
    std::vector<Triangle> triangles_;
    Vec3 lo_, hi_;
};

// Concatenate meshes (fixtures are built from parts).
TriangleMesh merge(const std::vector<TriangleMesh> &parts);

// Wavefront OBJ subset: v, vn and f records (v, v/vt, v//vn, v/vt/vn, negative
// indices). Polygons are fan-triangulated. Corners without a normal get the
// area-weighted vertex normal. Other record types are ignored.
// Errors: kParse (with line number), kEmptyMesh unless allow_empty.
TriangleMesh load_obj(const std::filesystem::path &path, bool allow_empty = false);
TriangleMesh parse_obj(std::string_view text, bool allow_empty = false);
std::string format_obj(const TriangleMesh &mesh);

struct Ray {
    Vec3 origin;
    Vec3 dir;  // unit
    double t_min = 0;
    double t_max = std::numeric_limits<double>::infinity();
};

struct Hit {
    double t = 0;
    uint32_t triangle = 0;
    double b1 = 0, b2 = 0;  // barycentrics of vertices 1 and 2
};

// Moller-Trumbore with a 1e-9 determinant cutoff. Returns a hit only for
// t in (ray.t_min, ray.t_max).
std::optional<Hit> intersect_triangle(const TriangleMesh &mesh, uint32_t index, const Ray &ray);

// Reference path: tests every triangle.
std::optional<Hit> intersect_brute_force(const TriangleMesh &mesh, const Ray &ray);

// Binned-SAH bounding volume hierarchy. Owns its mesh. Immutable after
// construction; concurrent queries are safe.
class Bvh {
  public:
    explicit Bvh(TriangleMesh mesh);

    const TriangleMesh &mesh() const { return mesh_; }

    std::optional<Hit> intersect(const Ray &ray) const;
    // True iff some triangle is hit at t in (t_min, infinity).
    bool occluded(const Vec3 &origin, const Vec3 &dir, double t_min) const;

    size_t node_count() const { return nodes_.size(); }

  private:
    struct Node {
        Vec3 lo, hi;
        uint32_t first = 0;  // first primitive (leaf) or right child (interior)
        uint32_t count = 0;  // primitives in leaf, 0 for interior
    };

    template <bool AnyHit>
    std::optional<Hit> traverse(const Ray &ray) const;
    uint32_t build(uint32_t begin, uint32_t end, std::vector<Vec3> &centroids, std::vector<Vec3> &lo,
                   std::vector<Vec3> &hi);

    TriangleMesh mesh_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> order_;
};

// Self-intersection offset used when the caller has no better value.
double default_ray_offset(const TriangleMesh &mesh);

struct SurfacePoint {
    Vec3 position;
    Vec3 normal;  // unit
    Material material;
};

// Constant material or one per mesh vertex (interpolated barycentrically).
using MaterialSource = std::variant<Material, std::vector<Material>>;

Material material_at(const MaterialSource &source, const TriangleMesh &mesh, uint32_t triangle, double b1,
                     double b2);

// Shading point for a ray hit: interpolated, renormalised vertex normal.
SurfacePoint surface_point(const TriangleMesh &mesh, const MaterialSource &materials, const Ray &ray,
                           const Hit &hit);

// Area-proportional triangle choice, uniform barycentrics.
std::vector<SurfacePoint> sample_surface(const TriangleMesh &mesh, int count, RngStream &rng,
                                         const MaterialSource &materials);

// Per-vertex material table: one line per vertex, "r g b metalness roughness".
std::vector<Material> load_material_table(const std::filesystem::path &path);

}  // namespace ssibl
