// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "ssibl/brdf.h"
#include "ssibl/illum_field.h"
#include "ssibl/shading.h"

namespace ssibl {

enum class IllumKind { kPyramid, kField, kMonteCarlo };

struct IllumSpec {
    IllumKind kind = IllumKind::kPyramid;
    std::filesystem::path pyramid;  // baked from env when empty
    std::filesystem::path field;
    int levels = kDefaultPyramidLevels;
    int samples = kDefaultLightSamples;  // per texel (pyramid) or shared set (mc)
};

struct OcclusionSpec {
    OcclusionMode mode = OcclusionMode::kNone;
    int samples = 64;
    std::filesystem::path table;
    bool channel_average = false;
};

// Scene description read from JSON. Relative paths resolve against the
// directory holding the file. See docs/scene_config.md for the schema.
struct SceneConfig {
    std::filesystem::path mesh;
    std::filesystem::path env;
    std::filesystem::path material_table;  // per-vertex; overrides material
    std::filesystem::path lut;             // baked with defaults when empty
    Material material;
    Camera camera;
    IllumSpec illum;
    OcclusionSpec occlusion;
    bool background_env = true;
    int reference_samples = 1024;
    bool reference_occlusion = true;
    bool diffuse = true;
    bool specular = true;
    uint64_t seed = 1;
    double exposure = 1.0;
    double ray_offset = -1;
};

// Throws kParse on malformed JSON, unknown keys or wrongly typed values,
// kInvalidArgument on out-of-range values.
SceneConfig parse_scene_config(std::string_view json, const std::filesystem::path &base_dir);
SceneConfig load_scene_config(const std::filesystem::path &path);

// Training options; missing keys keep TrainConfig defaults.
// "paper_architecture": true selects 5 hidden layers of 256 units.
TrainConfig parse_train_config(std::string_view json);
TrainConfig load_train_config(const std::filesystem::path &path);
std::string train_config_json(const TrainConfig &cfg);

IllumKind parse_illum_kind(std::string_view name);
OcclusionMode parse_occlusion_mode(std::string_view name);

}  // namespace ssibl
