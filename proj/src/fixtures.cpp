// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/fixtures.h"

#include <cmath>
#include <functional>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"

namespace ssibl::fixtures {

namespace {

RadianceMap tabulate(int height, const std::function<Rgb(const Vec3 &, double u, double v)> &f) {
    require(height >= 1, "environment height must be >= 1");
    Image image(2 * height, height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < 2 * height; ++x) {
            double u = (x + 0.5) / (2 * height), v = (y + 0.5) / height;
            image.at(x, y) = f(uv_to_dir(u, v), u, v);
        }
    return RadianceMap(std::move(image));
}

double smoothstep(double e0, double e1, double x) {
    double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3 - 2 * t);
}

}  // namespace

RadianceMap standard_env(int height) {
    const Vec3 sun = normalize(Vec3{0.5, 0.6, -0.6});
    return tabulate(height, [&](const Vec3 &d, double, double) {
        const Rgb horizon(0.9, 0.9, 1.0), zenith(0.25, 0.45, 0.9), ground(0.35, 0.28, 0.2);
        const double up = std::max(0.0, d.y);
        Rgb sky = horizon * (1 - up) + zenith * up;
        Rgb c = ground * (1 + 0.4 * d.y) * (1 - smoothstep(-0.15, 0.15, d.y)) + sky * smoothstep(-0.15, 0.15, d.y);
        double s = std::pow(std::max(0.0, dot(d, sun)), 32);
        return c + Rgb(6.0, 5.0, 3.5) * s;
    });
}

RadianceMap high_frequency_env(int height) {
    return tabulate(height, [](const Vec3 &d, double u, double v) {
        const int cu = static_cast<int>(std::floor(u * 16)), cv = static_cast<int>(std::floor(v * 8));
        const bool on = (cu + cv) % 2 == 0;
        Rgb c = on ? Rgb(1.0, 0.8, 0.55) : Rgb(0.08, 0.12, 0.3);
        // Thin bright band just above the horizon.
        if (d.y > 0.05 && d.y < 0.2)
            c += Rgb(1.5, 1.2, 0.8);
        return c;
    });
}

RadianceMap bright_texel_env(int height, int x, int y, double background, double peak) {
    require(x >= 0 && x < 2 * height && y >= 0 && y < height, "bright texel outside the map");
    Image image(2 * height, height, Rgb(background));
    image.at(x, y) = Rgb(peak);
    return RadianceMap(std::move(image));
}

TriangleMesh uv_sphere(double radius, int segments, int rings, Vec3 centre) {
    require(radius > 0 && segments >= 3 && rings >= 2, "invalid sphere tessellation");
    std::vector<Vec3> vertices, normals;
    for (int r = 0; r <= rings; ++r) {
        double theta = kPi * r / rings;
        for (int s = 0; s <= segments; ++s) {
            double phi = 2 * kPi * s / segments;
            Vec3 n{std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi)};
            normals.push_back(n);
            vertices.push_back(centre + radius * n);
        }
    }
    std::vector<Triangle> triangles;
    auto id = [&](int r, int s) { return static_cast<uint32_t>(r * (segments + 1) + s); };
    for (int r = 0; r < rings; ++r)
        for (int s = 0; s < segments; ++s) {
            if (r != 0)
                triangles.push_back({id(r, s), id(r, s + 1), id(r + 1, s)});
            if (r != rings - 1)
                triangles.push_back({id(r, s + 1), id(r + 1, s + 1), id(r + 1, s)});
        }
    return TriangleMesh(std::move(vertices), std::move(normals), std::move(triangles));
}

TriangleMesh quad(int axis, double offset, double a0, double a1, double b0, double b1, bool positive) {
    require(axis >= 0 && axis < 3, "quad axis must be 0, 1 or 2");
    const int ia = (axis + 1) % 3, ib = (axis + 2) % 3;
    auto point = [&](double a, double b) {
        Vec3 p;
        p[axis] = offset;
        p[ia] = a;
        p[ib] = b;
        return p;
    };
    Vec3 n;
    n[axis] = positive ? 1 : -1;
    std::vector<Vec3> vertices{point(a0, b0), point(a1, b0), point(a1, b1), point(a0, b1)};
    std::vector<Vec3> normals(4, n);
    std::vector<Triangle> triangles{{0, 1, 2}, {0, 2, 3}};
    return TriangleMesh(std::move(vertices), std::move(normals), std::move(triangles));
}

TriangleMesh closed_box(Vec3 lo, Vec3 hi) {
    std::vector<TriangleMesh> faces;
    for (int axis = 0; axis < 3; ++axis) {
        const int ia = (axis + 1) % 3, ib = (axis + 2) % 3;
        faces.push_back(quad(axis, lo[axis], lo[ia], hi[ia], lo[ib], hi[ib], false));
        faces.push_back(quad(axis, hi[axis], lo[ia], hi[ia], lo[ib], hi[ib], true));
    }
    return merge(faces);
}

TriangleMesh half_wall(double wall_x, double extent) {
    // Wall: x = wall_x, y in [0, extent], z in [-extent, extent].
    TriangleMesh wall = quad(0, wall_x, 0, extent, -extent, extent, true);
    // Ground: y = 0, z in [-extent, extent], x in [wall_x, extent].
    TriangleMesh ground = quad(1, 0, -extent, extent, wall_x, extent, true);
    return merge({wall, ground});
}

Camera sphere_camera(int size) {
    Camera c;
    c.position = {0, 0, 3};
    c.look_at = {0, 0, 0};
    c.up = {0, 1, 0};
    c.fov_y = 0.8;
    c.width = size;
    c.height = size;
    return c;
}

void write_all(const std::filesystem::path &dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        fail(ErrorCode::kIo, "cannot create " + dir.string());

    save_hdr(RadianceMap(32, Rgb(1.0)), dir / "constant.hdr");
    save_hdr(standard_env(32), dir / "standard.hdr");
    save_hdr(high_frequency_env(32), dir / "high_frequency.hdr");
    save_hdr(bright_texel_env(32, 40, 12), dir / "bright_texel.hdr");

    write_file_atomic(dir / "sphere.obj", format_obj(uv_sphere(1.0)));
    write_file_atomic(dir / "box.obj", format_obj(closed_box({-1, -1, -1}, {1, 1, 1})));
    write_file_atomic(dir / "half_wall.obj", format_obj(half_wall()));
    write_file_atomic(dir / "empty.obj", std::string_view("# no geometry\n"));
    write_file_atomic(dir / "box_probes.txt",
                      std::string_view("# x y z nx ny nz\n0 0 0 0 1 0\n0.5 -0.5 0.25 1 0 0\n-0.3 0.2 -0.6 0 0 -1\n"));

    const std::string camera =
        R"("camera": {"position": [0, 0, 3], "look_at": [0, 0, 0], "up": [0, 1, 0], "fov_y_deg": 45.8366, "width": 128, "height": 128})";
    write_file_atomic(dir / "lambertian.json",
                      "{\n  \"mesh\": \"sphere.obj\",\n  \"env\": \"constant.hdr\",\n"
                      "  \"material\": {\"albedo\": [0.8, 0.8, 0.8], \"metalness\": 0, \"roughness\": 1},\n  " +
                          camera +
                          ",\n  \"illumination\": {\"source\": \"mc\", \"samples\": 8192},\n"
                          "  \"shade\": {\"diffuse\": true, \"specular\": false},\n"
                          "  \"reference\": {\"samples\": 1024, \"occlusion\": false},\n  \"seed\": 1\n}\n");
    write_file_atomic(dir / "glossy.json",
                      "{\n  \"mesh\": \"sphere.obj\",\n  \"env\": \"high_frequency.hdr\",\n"
                      "  \"material\": {\"albedo\": [0.8, 0.8, 0.8], \"metalness\": 0, \"roughness\": 0.4},\n  " +
                          camera +
                          ",\n  \"illumination\": {\"source\": \"pyramid\", \"levels\": 6, \"samples\": 8192},\n"
                          "  \"occlusion\": {\"mode\": \"none\"},\n"
                          "  \"reference\": {\"samples\": 1024, \"occlusion\": false},\n  \"seed\": 1\n}\n");
    write_file_atomic(dir / "fit.json", std::string_view("{\n  \"steps\": 2000,\n  \"seed\": 1\n}\n"));
}

}  // namespace ssibl::fixtures
