// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "ssibl/config.h"
#include "ssibl/error.h"
#include "ssibl/illum_field.h"
#include "ssibl/metrics.h"
#include "ssibl/occlusion.h"
#include "ssibl/shading.h"

// Command implementations behind the ssibl executable. Each validates its
// inputs before writing anything and writes outputs through temporary files.
namespace ssibl::cmd {

struct PrefilterArgs {
    std::filesystem::path env;
    std::filesystem::path out_dir;
    int levels = kDefaultPyramidLevels;
    int samples = kDefaultLightSamples;
    uint64_t seed = 1;
};
PrefilteredPyramid prefilter(const PrefilterArgs &args, std::ostream &log);

struct BakeLutArgs {
    std::filesystem::path out;
    int resolution = kDefaultLutResolution;
    int samples = kDefaultLutSamples;
    uint64_t seed = 1;
};
BrdfLut bake_lut(const BakeLutArgs &args, std::ostream &log);

struct FitIllumArgs {
    std::filesystem::path env;
    std::filesystem::path config;  // optional JSON TrainConfig
    std::filesystem::path out;
    std::filesystem::path loss_log;  // optional CSV of every step
    std::optional<int> steps;
    std::optional<uint64_t> seed;
    int log_every = 100;
};
struct FitIllumReport {
    TrainConfig config;
    std::vector<TrainStep> history;
    double psnr_rho0 = 0;     // exported g(., 0) against the training env
    double initial_ld = 0;    // L_D on a fixed evaluation set, before training
    double final_ld = 0;      // ... and after
    double consistency = 0;   // median relative |g(n,1) - irradiance|
};
FitIllumReport fit_illum(const FitIllumArgs &args, std::ostream &log);

struct BakeOcclusionArgs {
    std::filesystem::path mesh;
    std::filesystem::path env;
    std::filesystem::path out;
    std::filesystem::path probes;  // optional "x y z nx ny nz" lines; replaces surface sampling
    int samples = 64;
    int points = 1024;
    double roughness = Material{}.roughness;
    bool channel_average = false;
    uint64_t seed = 1;
};
BakedOcclusion bake_occlusion(const BakeOcclusionArgs &args, std::ostream &log);

// "x y z nx ny nz" per line; '#' starts a comment.
std::vector<SurfacePoint> load_probe_points(const std::filesystem::path &path, const Material &material);

struct RenderArgs {
    std::filesystem::path scene;
    std::filesystem::path out;  // .hdr (linear) or .png (sRGB)
    std::optional<IllumKind> illum;
    std::optional<OcclusionMode> occlusion;
    bool reference = false;
    std::optional<uint64_t> seed;
    std::optional<double> exposure;
};
RenderResult render(const RenderArgs &args, std::ostream &log);

struct CompareArgs {
    std::filesystem::path a;
    std::filesystem::path b;
    bool channel_scale = false;
};
// Prints the per-channel scales and the PSNR ("inf" for identical images).
CompareResult compare(const CompareArgs &args, std::ostream &out);
std::string format_psnr(double psnr);

void make_fixtures(const std::filesystem::path &dir, std::ostream &log);

// 2 for filesystem errors, 1 for everything else.
int exit_code(const Error &e);

}  // namespace ssibl::cmd
