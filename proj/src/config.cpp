// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/config.h"

#include <initializer_list>
#include <json.hpp>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"

namespace ssibl {

namespace {

using nlohmann::json;

json parse_json(std::string_view text, const std::string &what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        fail(ErrorCode::kParse, what + ": " + e.what());
    }
}

void check_object(const json &j, const std::string &where) {
    if (!j.is_object())
        fail(ErrorCode::kParse, where + " must be a JSON object");
}

void check_keys(const json &j, const std::string &where, std::initializer_list<std::string_view> allowed) {
    check_object(j, where);
    for (const auto &[key, value] : j.items()) {
        bool known = false;
        for (auto a : allowed)
            known = known || key == a;
        if (!known)
            fail(ErrorCode::kParse, where + ": unknown key '" + key + "'");
    }
}

template <typename T>
void read(const json &j, const char *key, T &out, const std::string &where) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception &) {
        fail(ErrorCode::kParse, where + "." + key + " has the wrong type");
    }
}

void read_vec3(const json &j, const char *key, Vec3 &out, const std::string &where) {
    if (!j.contains(key))
        return;
    const json &v = j.at(key);
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        fail(ErrorCode::kParse, where + "." + key + " must be an array of three numbers");
    out = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

void read_path(const json &j, const char *key, std::filesystem::path &out, const std::filesystem::path &base,
               const std::string &where) {
    std::string s;
    read(j, key, s, where);
    if (s.empty())
        return;
    std::filesystem::path p(s);
    out = p.is_absolute() ? p : base / p;
}

}  // namespace

IllumKind parse_illum_kind(std::string_view name) {
    if (name == "pyramid")
        return IllumKind::kPyramid;
    if (name == "field")
        return IllumKind::kField;
    if (name == "mc")
        return IllumKind::kMonteCarlo;
    fail(ErrorCode::kInvalidArgument, "unknown illumination source '" + std::string(name) + "' (pyramid|field|mc)");
}

OcclusionMode parse_occlusion_mode(std::string_view name) {
    if (name == "none")
        return OcclusionMode::kNone;
    if (name == "mc")
        return OcclusionMode::kMonteCarlo;
    if (name == "baked")
        return OcclusionMode::kBaked;
    fail(ErrorCode::kInvalidArgument, "unknown occlusion mode '" + std::string(name) + "' (none|mc|baked)");
}

SceneConfig parse_scene_config(std::string_view text, const std::filesystem::path &base_dir) {
    const json j = parse_json(text, "scene config");
    check_keys(j, "scene", {"mesh", "env", "material", "material_table", "lut", "camera", "illumination",
                            "occlusion", "background", "reference", "shade", "seed", "exposure", "ray_offset"});
    SceneConfig cfg;
    read_path(j, "mesh", cfg.mesh, base_dir, "scene");
    read_path(j, "env", cfg.env, base_dir, "scene");
    read_path(j, "material_table", cfg.material_table, base_dir, "scene");
    read_path(j, "lut", cfg.lut, base_dir, "scene");
    if (cfg.mesh.empty() || cfg.env.empty())
        fail(ErrorCode::kParse, "scene: 'mesh' and 'env' are required");

    if (j.contains("material")) {
        const json &m = j.at("material");
        check_keys(m, "scene.material", {"albedo", "metalness", "roughness"});
        Vec3 albedo{cfg.material.albedo.r, cfg.material.albedo.g, cfg.material.albedo.b};
        read_vec3(m, "albedo", albedo, "scene.material");
        cfg.material.albedo = {albedo.x, albedo.y, albedo.z};
        read(m, "metalness", cfg.material.metalness, "scene.material");
        read(m, "roughness", cfg.material.roughness, "scene.material");
    }
    validate(cfg.material);

    if (j.contains("camera")) {
        const json &c = j.at("camera");
        check_keys(c, "scene.camera", {"position", "look_at", "up", "fov_y_deg", "width", "height"});
        read_vec3(c, "position", cfg.camera.position, "scene.camera");
        read_vec3(c, "look_at", cfg.camera.look_at, "scene.camera");
        read_vec3(c, "up", cfg.camera.up, "scene.camera");
        if (c.contains("fov_y_deg")) {
            double deg = 0;
            read(c, "fov_y_deg", deg, "scene.camera");
            cfg.camera.fov_y = deg * kPi / 180;
        }
        read(c, "width", cfg.camera.width, "scene.camera");
        read(c, "height", cfg.camera.height, "scene.camera");
    }
    cfg.camera.validate();

    if (j.contains("illumination")) {
        const json &il = j.at("illumination");
        check_keys(il, "scene.illumination", {"source", "pyramid", "field", "levels", "samples"});
        std::string source = "pyramid";
        read(il, "source", source, "scene.illumination");
        cfg.illum.kind = parse_illum_kind(source);
        read_path(il, "pyramid", cfg.illum.pyramid, base_dir, "scene.illumination");
        read_path(il, "field", cfg.illum.field, base_dir, "scene.illumination");
        read(il, "levels", cfg.illum.levels, "scene.illumination");
        read(il, "samples", cfg.illum.samples, "scene.illumination");
    }
    require(cfg.illum.levels >= 2, "illumination.levels must be >= 2");
    require(cfg.illum.samples >= 1, "illumination.samples must be >= 1");

    if (j.contains("occlusion")) {
        const json &o = j.at("occlusion");
        check_keys(o, "scene.occlusion", {"mode", "samples", "table", "channel_average"});
        std::string mode = "none";
        read(o, "mode", mode, "scene.occlusion");
        cfg.occlusion.mode = parse_occlusion_mode(mode);
        read(o, "samples", cfg.occlusion.samples, "scene.occlusion");
        read_path(o, "table", cfg.occlusion.table, base_dir, "scene.occlusion");
        read(o, "channel_average", cfg.occlusion.channel_average, "scene.occlusion");
    }
    require(cfg.occlusion.samples >= 1, "occlusion.samples must be >= 1");

    if (j.contains("background")) {
        std::string bg;
        read(j, "background", bg, "scene");
        if (bg != "env" && bg != "black")
            fail(ErrorCode::kInvalidArgument, "scene.background must be 'env' or 'black'");
        cfg.background_env = bg == "env";
    }
    if (j.contains("reference")) {
        const json &r = j.at("reference");
        check_keys(r, "scene.reference", {"samples", "occlusion"});
        read(r, "samples", cfg.reference_samples, "scene.reference");
        read(r, "occlusion", cfg.reference_occlusion, "scene.reference");
    }
    require(cfg.reference_samples >= 1, "reference.samples must be >= 1");
    if (j.contains("shade")) {
        const json &s = j.at("shade");
        check_keys(s, "scene.shade", {"diffuse", "specular"});
        read(s, "diffuse", cfg.diffuse, "scene.shade");
        read(s, "specular", cfg.specular, "scene.shade");
    }
    read(j, "seed", cfg.seed, "scene");
    read(j, "exposure", cfg.exposure, "scene");
    read(j, "ray_offset", cfg.ray_offset, "scene");
    require(cfg.exposure > 0 && std::isfinite(cfg.exposure), "exposure must be positive");
    return cfg;
}

SceneConfig load_scene_config(const std::filesystem::path &path) {
    auto bytes = read_file(path);
    return parse_scene_config(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()),
                              path.parent_path());
}

TrainConfig parse_train_config(std::string_view text) {
    const json j = parse_json(text, "train config");
    check_keys(j, "train", {"steps", "learning_rate", "warmup_steps", "final_lr_ratio", "beta1", "beta2",
                            "recon_batch", "reg_batch", "lambda_rec", "lambda_d", "light_samples", "seed",
                            "dir_frequencies", "rough_frequencies", "hidden_layers", "hidden_width",
                            "paper_architecture"});
    TrainConfig cfg;
    bool paper = false;
    read(j, "paper_architecture", paper, "train");
    if (paper)
        cfg.shape = {5, 256};
    read(j, "steps", cfg.steps, "train");
    read(j, "learning_rate", cfg.learning_rate, "train");
    read(j, "warmup_steps", cfg.warmup_steps, "train");
    read(j, "final_lr_ratio", cfg.final_lr_ratio, "train");
    read(j, "beta1", cfg.beta1, "train");
    read(j, "beta2", cfg.beta2, "train");
    read(j, "recon_batch", cfg.recon_batch, "train");
    read(j, "reg_batch", cfg.reg_batch, "train");
    read(j, "lambda_rec", cfg.lambda_rec, "train");
    read(j, "lambda_d", cfg.lambda_d, "train");
    read(j, "light_samples", cfg.light_samples, "train");
    read(j, "seed", cfg.seed, "train");
    read(j, "dir_frequencies", cfg.encoding.dir_frequencies, "train");
    read(j, "rough_frequencies", cfg.encoding.rough_frequencies, "train");
    read(j, "hidden_layers", cfg.shape.hidden_layers, "train");
    read(j, "hidden_width", cfg.shape.hidden_width, "train");
    cfg.validate();
    return cfg;
}

TrainConfig load_train_config(const std::filesystem::path &path) {
    auto bytes = read_file(path);
    return parse_train_config(std::string_view(reinterpret_cast<const char *>(bytes.data()), bytes.size()));
}

std::string train_config_json(const TrainConfig &cfg) {
    nlohmann::ordered_json j;
    j["steps"] = cfg.steps;
    j["learning_rate"] = cfg.learning_rate;
    j["warmup_steps"] = cfg.warmup_steps;
    j["final_lr_ratio"] = cfg.final_lr_ratio;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["recon_batch"] = cfg.recon_batch;
    j["reg_batch"] = cfg.reg_batch;
    j["lambda_rec"] = cfg.lambda_rec;
    j["lambda_d"] = cfg.lambda_d;
    j["light_samples"] = cfg.light_samples;
    j["seed"] = cfg.seed;
    j["dir_frequencies"] = cfg.encoding.dir_frequencies;
    j["rough_frequencies"] = cfg.encoding.rough_frequencies;
    j["hidden_layers"] = cfg.shape.hidden_layers;
    j["hidden_width"] = cfg.shape.hidden_width;
    return j.dump(2);
}

}  // namespace ssibl
