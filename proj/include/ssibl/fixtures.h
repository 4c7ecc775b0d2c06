// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>

#include "ssibl/envmap.h"
#include "ssibl/geometry.h"
#include "ssibl/shading.h"

// Synthetic scenes and environments shared by the tests, the acceptance
// suite and the make-fixtures command.
namespace ssibl::fixtures {

// Smooth sky: blue-to-white gradient, warm ground and a soft sun lobe.
RadianceMap standard_env(int height = 32);

// Sharp stripes and checkers over a dim base; most energy above 8 cycles.
RadianceMap high_frequency_env(int height = 32);

// Dim uniform background with one bright texel at (x, y).
RadianceMap bright_texel_env(int height, int x, int y, double background = 0.05, double peak = 20.0);

// Latitude-longitude sphere with exact unit normals.
TriangleMesh uv_sphere(double radius, int segments = 96, int rings = 48, Vec3 centre = {});

// Closed axis-aligned box with outward normals.
TriangleMesh closed_box(Vec3 lo, Vec3 hi);

// Axis-aligned quad spanning [a0, a1] x [b0, b1] on the plane axis = offset;
// the normal points along +axis when positive is true.
TriangleMesh quad(int axis, double offset, double a0, double a1, double b0, double b1, bool positive);

// Ground y = 0 for x >= wall_x plus a vertical wall at x = wall_x facing +x.
// A point at the origin with normal +y sees the wall cover half its
// hemisphere, split along the azimuth.
TriangleMesh half_wall(double wall_x = -0.05, double extent = 5.0);

Camera sphere_camera(int size);

// Writes env maps, meshes, scene configs and a training config into dir.
void write_all(const std::filesystem::path &dir);

}  // namespace ssibl::fixtures
