// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/geometry.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"

namespace ssibl {

namespace {

Vec3 face_normal_weighted(const std::vector<Vec3> &v, const Triangle &t) {
    // Length is twice the triangle area.
    return cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]);
}

}  // namespace

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Vec3> normals, std::vector<Triangle> triangles)
    : vertices_(std::move(vertices)), normals_(std::move(normals)) {
    require(normals_.size() == vertices_.size(), "mesh needs exactly one normal per vertex");
    for (const Vec3 &n : normals_)
        require(std::abs(length(n) - 1) <= 1e-4, "mesh normals must be unit length");

    if (!vertices_.empty()) {
        lo_ = hi_ = vertices_[0];
        for (const Vec3 &p : vertices_) {
            require(std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z), "non-finite vertex");
            lo_ = min(lo_, p);
            hi_ = max(hi_, p);
        }
    }
    const double diag2 = dot(hi_ - lo_, hi_ - lo_);
    triangles_.reserve(triangles.size());
    for (const Triangle &t : triangles) {
        for (uint32_t i : t)
            require(i < vertices_.size(), "triangle index out of range");
        double area = 0.5 * length(face_normal_weighted(vertices_, t));
        if (area > 1e-14 * diag2)
            triangles_.push_back(t);
    }
    if (triangles_.empty()) {
        lo_ = hi_ = Vec3();
    } else {
        // Bounds over referenced vertices only.
        lo_ = hi_ = vertices_[triangles_[0][0]];
        for (const Triangle &t : triangles_)
            for (uint32_t i : t) {
                lo_ = min(lo_, vertices_[i]);
                hi_ = max(hi_, vertices_[i]);
            }
    }
}

TriangleMesh TriangleMesh::with_computed_normals(std::vector<Vec3> vertices, std::vector<Triangle> triangles) {
    std::vector<Vec3> normals(vertices.size());
    for (const Triangle &t : triangles) {
        for (uint32_t i : t)
            require(i < vertices.size(), "triangle index out of range");
        Vec3 fn = face_normal_weighted(vertices, t);
        for (uint32_t i : t)
            normals[i] += fn;
    }
    for (Vec3 &n : normals) {
        double len = length(n);
        n = len > 0 ? n / len : Vec3(0, 1, 0);
    }
    return TriangleMesh(std::move(vertices), std::move(normals), std::move(triangles));
}

double TriangleMesh::triangle_area(size_t index) const {
    return 0.5 * length(face_normal_weighted(vertices_, triangles_[index]));
}

TriangleMesh merge(const std::vector<TriangleMesh> &parts) {
    std::vector<Vec3> vertices, normals;
    std::vector<Triangle> triangles;
    for (const TriangleMesh &m : parts) {
        auto base = static_cast<uint32_t>(vertices.size());
        vertices.insert(vertices.end(), m.vertices().begin(), m.vertices().end());
        normals.insert(normals.end(), m.normals().begin(), m.normals().end());
        for (Triangle t : m.triangles())
            triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
    }
    return TriangleMesh(std::move(vertices), std::move(normals), std::move(triangles));
}

// ---------------------------------------------------------------------------
// OBJ

namespace {

[[noreturn]] void parse_error(int line, const std::string &what) {
    fail(ErrorCode::kParse, "OBJ line " + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view token, int line) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
        parse_error(line, "bad number '" + std::string(token) + "'");
    return value;
}

// Resolves a 1-based (or negative, relative) OBJ index to 0-based.
int resolve_index(std::string_view token, size_t count, int line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || value == 0)
        parse_error(line, "bad index '" + std::string(token) + "'");
    long resolved = value > 0 ? value - 1 : long(count) + value;
    if (resolved < 0 || resolved >= long(count))
        parse_error(line, "index " + std::string(token) + " out of range");
    return static_cast<int>(resolved);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r'))
            ++i;
        size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != '\r')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

}  // namespace

TriangleMesh parse_obj(std::string_view text, bool allow_empty) {
    std::vector<Vec3> positions, obj_normals;
    struct Corner {
        int v, n;
    };
    std::vector<std::array<Corner, 3>> faces;

    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        auto tok = split_ws(line);
        if (tok.empty())
            continue;
        if (tok[0] == "v") {
            if (tok.size() < 4)
                parse_error(line_no, "vertex needs three coordinates");
            positions.push_back(
                {parse_double(tok[1], line_no), parse_double(tok[2], line_no), parse_double(tok[3], line_no)});
        } else if (tok[0] == "vn") {
            if (tok.size() < 4)
                parse_error(line_no, "normal needs three coordinates");
            Vec3 n{parse_double(tok[1], line_no), parse_double(tok[2], line_no), parse_double(tok[3], line_no)};
            if (length(n) == 0)
                parse_error(line_no, "zero-length normal");
            obj_normals.push_back(normalize(n));
        } else if (tok[0] == "f") {
            if (tok.size() < 4)
                parse_error(line_no, "face needs at least three corners");
            std::vector<Corner> corners;
            for (size_t k = 1; k < tok.size(); ++k) {
                std::string_view c = tok[k];
                size_t s1 = c.find('/');
                Corner corner{resolve_index(c.substr(0, s1), positions.size(), line_no), -1};
                if (s1 != std::string_view::npos) {
                    size_t s2 = c.find('/', s1 + 1);
                    if (s2 != std::string_view::npos && s2 + 1 < c.size())
                        corner.n = resolve_index(c.substr(s2 + 1), obj_normals.size(), line_no);
                }
                corners.push_back(corner);
            }
            for (size_t k = 1; k + 1 < corners.size(); ++k)
                faces.push_back({corners[0], corners[k], corners[k + 1]});
        }
        if (end == text.size())
            break;
    }

    if (faces.empty()) {
        if (!allow_empty)
            fail(ErrorCode::kEmptyMesh, "OBJ contains no faces");
        return {};
    }

    std::vector<Vec3> computed(positions.size());
    for (const auto &f : faces) {
        Vec3 fn = cross(positions[f[1].v] - positions[f[0].v], positions[f[2].v] - positions[f[0].v]);
        for (const Corner &c : f)
            computed[c.v] += fn;
    }

    std::map<std::pair<int, int>, uint32_t> remap;
    std::vector<Vec3> vertices, normals;
    std::vector<Triangle> triangles;
    for (const auto &f : faces) {
        Triangle t{};
        for (int k = 0; k < 3; ++k) {
            auto key = std::pair{f[k].v, f[k].n};
            auto [it, inserted] = remap.try_emplace(key, static_cast<uint32_t>(vertices.size()));
            if (inserted) {
                vertices.push_back(positions[f[k].v]);
                Vec3 n = f[k].n >= 0 ? obj_normals[f[k].n] : computed[f[k].v];
                double len = length(n);
                normals.push_back(len > 0 ? n / len : Vec3(0, 1, 0));
            }
            t[k] = it->second;
        }
        triangles.push_back(t);
    }
    TriangleMesh mesh(std::move(vertices), std::move(normals), std::move(triangles));
    if (mesh.empty() && !allow_empty)
        fail(ErrorCode::kEmptyMesh, "OBJ contains only degenerate faces");
    return mesh;
}

TriangleMesh load_obj(const std::filesystem::path &path, bool allow_empty) {
    auto bytes = read_file(path);
    return parse_obj(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()), allow_empty);
}

std::string format_obj(const TriangleMesh &mesh) {
    std::ostringstream out;
    out.precision(17);
    for (const Vec3 &v : mesh.vertices())
        out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const Vec3 &n : mesh.normals())
        out << "vn " << n.x << ' ' << n.y << ' ' << n.z << '\n';
    for (const Triangle &t : mesh.triangles()) {
        out << 'f';
        for (uint32_t i : t)
            out << ' ' << i + 1 << "//" << i + 1;
        out << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Surface points

Material material_at(const MaterialSource &source, const TriangleMesh &mesh, uint32_t triangle, double b1,
                     double b2) {
    if (const auto *constant = std::get_if<Material>(&source))
        return *constant;
    const auto &table = std::get<std::vector<Material>>(source);
    require(table.size() == mesh.vertices().size(), "per-vertex material table size does not match mesh");
    const Triangle &t = mesh.triangles()[triangle];
    double b0 = 1 - b1 - b2;
    const Material &m0 = table[t[0]], &m1 = table[t[1]], &m2 = table[t[2]];
    Material m;
    m.albedo = m0.albedo * b0 + m1.albedo * b1 + m2.albedo * b2;
    m.metalness = m0.metalness * b0 + m1.metalness * b1 + m2.metalness * b2;
    m.roughness = m0.roughness * b0 + m1.roughness * b1 + m2.roughness * b2;
    return m;
}

namespace {

Vec3 interpolated_normal(const TriangleMesh &mesh, uint32_t triangle, double b1, double b2) {
    const Triangle &t = mesh.triangles()[triangle];
    const auto &n = mesh.normals();
    Vec3 s = n[t[0]] * (1 - b1 - b2) + n[t[1]] * b1 + n[t[2]] * b2;
    double len = length(s);
    if (len > 0)
        return s / len;
    const auto &v = mesh.vertices();
    return normalize(cross(v[t[1]] - v[t[0]], v[t[2]] - v[t[0]]));
}

}  // namespace

SurfacePoint surface_point(const TriangleMesh &mesh, const MaterialSource &materials, const Ray &ray,
                           const Hit &hit) {
    return {ray.origin + ray.dir * hit.t, interpolated_normal(mesh, hit.triangle, hit.b1, hit.b2),
            material_at(materials, mesh, hit.triangle, hit.b1, hit.b2)};
}

std::vector<SurfacePoint> sample_surface(const TriangleMesh &mesh, int count, RngStream &rng,
                                         const MaterialSource &materials) {
    require(count >= 1, "sample count must be >= 1");
    require(!mesh.empty(), "cannot sample an empty mesh");
    std::vector<double> cdf(mesh.triangles().size());
    double total = 0;
    for (size_t i = 0; i < cdf.size(); ++i) {
        total += mesh.triangle_area(i);
        cdf[i] = total;
    }

    std::vector<SurfacePoint> out;
    out.reserve(count);
    const auto &v = mesh.vertices();
    for (int k = 0; k < count; ++k) {
        double target = rng.uniform() * total;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        auto tri = static_cast<uint32_t>(std::min<size_t>(it - cdf.begin(), cdf.size() - 1));
        double su = std::sqrt(rng.uniform());
        double r2 = rng.uniform();
        double b1 = su * (1 - r2);
        double b2 = su * r2;
        const Triangle &t = mesh.triangles()[tri];
        Vec3 p = v[t[0]] * (1 - b1 - b2) + v[t[1]] * b1 + v[t[2]] * b2;
        out.push_back({p, interpolated_normal(mesh, tri, b1, b2), material_at(materials, mesh, tri, b1, b2)});
    }
    return out;
}

std::vector<Material> load_material_table(const std::filesystem::path &path) {
    auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<Material> table;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::istringstream fields(line);
        Material m;
        if (!(fields >> m.albedo.r))
            continue;
        if (!(fields >> m.albedo.g >> m.albedo.b >> m.metalness >> m.roughness))
            fail(ErrorCode::kParse, "material table line " + std::to_string(line_no) + ": expected 5 numbers");
        validate(m);
        table.push_back(m);
    }
    return table;
}

}  // namespace ssibl
