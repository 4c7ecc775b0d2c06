// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "ssibl/commands.h"
#include "ssibl/parallel.h"

namespace {

template <typename T>
std::optional<T> if_set(const CLI::Option *opt, const T &value) {
    return opt->count() > 0 ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char **argv) {
    using namespace ssibl;
    CLI::App app{"Split-sum image-based lighting: baking, fitting, rendering and comparison"};
    app.require_subcommand(1);
    app.fallthrough();
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all available cores)")->check(CLI::NonNegativeNumber);

    cmd::PrefilterArgs pre;
    auto *sc_pre = app.add_subcommand("prefilter", "Bake a prefiltered environment pyramid");
    sc_pre->add_option("env", pre.env, "Input environment (.hdr)")->required();
    sc_pre->add_option("out_dir", pre.out_dir, "Output directory")->required();
    sc_pre->add_option("--levels", pre.levels, "Roughness levels, 0 to 1 inclusive")->capture_default_str();
    sc_pre->add_option("--samples", pre.samples, "Light samples per texel")->capture_default_str();
    sc_pre->add_option("--seed", pre.seed)->capture_default_str();

    cmd::BakeLutArgs lut;
    auto *sc_lut = app.add_subcommand("bake-lut", "Bake the (F1, F2) BRDF lookup table");
    sc_lut->add_option("out", lut.out, "Output file (.lut)")->required();
    sc_lut->add_option("--res", lut.resolution, "Cells per axis")->capture_default_str();
    sc_lut->add_option("--samples", lut.samples, "Samples per cell")->capture_default_str();
    sc_lut->add_option("--seed", lut.seed)->capture_default_str();

    cmd::FitIllumArgs fit;
    int fit_steps = 0;
    uint64_t fit_seed = 0;
    auto *sc_fit = app.add_subcommand("fit-illum", "Train the pre-integrated illumination field");
    sc_fit->add_option("env", fit.env, "Training environment (.hdr)")->required();
    sc_fit->add_option("out", fit.out, "Output field (.illf); a .json sidecar is written next to it")->required();
    sc_fit->add_option("--config", fit.config, "Training configuration (JSON)");
    auto *opt_steps = sc_fit->add_option("--steps", fit_steps, "Override the step count");
    auto *opt_fit_seed = sc_fit->add_option("--seed", fit_seed, "Override the seed");
    sc_fit->add_option("--loss-log", fit.loss_log, "Write every step's loss as CSV");
    sc_fit->add_option("--log-every", fit.log_every, "Steps between progress lines")->capture_default_str();

    cmd::BakeOcclusionArgs occ;
    auto *sc_occ = app.add_subcommand("bake-occlusion", "Monte Carlo occlusion factors at surface points");
    sc_occ->add_option("mesh", occ.mesh, "Occluder mesh (.obj)")->required();
    sc_occ->add_option("env", occ.env, "Environment (.hdr)")->required();
    sc_occ->add_option("out", occ.out, "Output table (.occl)")->required();
    sc_occ->add_option("--samples", occ.samples, "Samples per point and lobe")->capture_default_str();
    sc_occ->add_option("--points", occ.points, "Surface points to sample")->capture_default_str();
    sc_occ->add_option("--probes", occ.probes, "Explicit points: 'x y z nx ny nz' per line");
    sc_occ->add_option("--roughness", occ.roughness, "Specular lobe roughness")->capture_default_str();
    sc_occ->add_flag("--channel-average", occ.channel_average, "Store per-channel averages");
    sc_occ->add_option("--seed", occ.seed)->capture_default_str();

    cmd::RenderArgs ren;
    std::string illum_name, occl_name;
    uint64_t ren_seed = 0;
    double exposure = 1;
    auto *sc_ren = app.add_subcommand("render", "Render a scene with split-sum shading or the reference");
    sc_ren->add_option("scene", ren.scene, "Scene configuration (JSON)")->required();
    sc_ren->add_option("out", ren.out, "Output image (.hdr linear or .png sRGB)")->required();
    auto *opt_illum = sc_ren->add_option("--illum", illum_name, "Illumination source")
                          ->check(CLI::IsMember({"pyramid", "field", "mc"}));
    auto *opt_occl = sc_ren->add_option("--occlusion", occl_name, "Occlusion mode")
                         ->check(CLI::IsMember({"none", "mc", "baked"}));
    sc_ren->add_flag("--reference", ren.reference, "Brute-force Monte Carlo oracle instead of split-sum");
    auto *opt_ren_seed = sc_ren->add_option("--seed", ren_seed, "Override the scene seed");
    auto *opt_exposure = sc_ren->add_option("--exposure", exposure, "PNG exposure multiplier");

    cmd::CompareArgs cmp;
    auto *sc_cmp = app.add_subcommand("compare", "PSNR between two .hdr images");
    sc_cmp->add_option("a", cmp.a, "Reference image")->required();
    sc_cmp->add_option("b", cmp.b, "Test image")->required();
    sc_cmp->add_flag("--channel-scale", cmp.channel_scale, "Fit a per-channel scale to b first");

    std::string fixtures_dir;
    auto *sc_fix = app.add_subcommand("make-fixtures", "Write test environments, meshes and configs");
    sc_fix->add_option("dir", fixtures_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        set_thread_count(threads);
        if (sc_pre->parsed()) {
            cmd::prefilter(pre, std::cerr);
        } else if (sc_lut->parsed()) {
            cmd::bake_lut(lut, std::cerr);
        } else if (sc_fit->parsed()) {
            fit.steps = if_set(opt_steps, fit_steps);
            fit.seed = if_set(opt_fit_seed, fit_seed);
            cmd::fit_illum(fit, std::cerr);
        } else if (sc_occ->parsed()) {
            cmd::bake_occlusion(occ, std::cerr);
        } else if (sc_ren->parsed()) {
            if (opt_illum->count())
                ren.illum = parse_illum_kind(illum_name);
            if (opt_occl->count())
                ren.occlusion = parse_occlusion_mode(occl_name);
            ren.seed = if_set(opt_ren_seed, ren_seed);
            ren.exposure = if_set(opt_exposure, exposure);
            cmd::render(ren, std::cerr);
        } else if (sc_cmp->parsed()) {
            cmd::compare(cmp, std::cout);
        } else if (sc_fix->parsed()) {
            cmd::make_fixtures(fixtures_dir, std::cerr);
        }
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return cmd::exit_code(e);
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
