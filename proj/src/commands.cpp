// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/commands.h"

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

#include "ssibl/binary_io.h"
#include "ssibl/fixtures.h"
#include "ssibl/reference.h"

namespace ssibl::cmd {

namespace fs = std::filesystem;

namespace {

std::string lower_extension(const fs::path &p) {
    std::string ext = p.extension().string();
    for (char &c : ext)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

void check_output_kind(const fs::path &out) {
    const std::string ext = lower_extension(out);
    require(ext == ".hdr" || ext == ".png", "output image must end in .hdr or .png: " + out.string());
}

// Evaluation set for L_D before and after training.
constexpr int kEvalTuples = 512;
constexpr int kEvalLightSamples = 8192;
constexpr uint64_t kEvalSeed = 0x5eedULL;

}  // namespace

PrefilteredPyramid prefilter(const PrefilterArgs &args, std::ostream &log) {
    require(args.levels >= 2, "--levels must be >= 2");
    require(args.samples >= 1, "--samples must be >= 1");
    require(!args.out_dir.empty(), "output directory required");
    RadianceMap env = load_hdr(args.env);
    log << "prefilter: " << env.width() << "x" << env.height() << ", " << args.levels << " levels, "
        << args.samples << " samples per texel\n";
    PrefilteredPyramid pyramid = bake_pyramid(env, args.levels, args.samples, args.seed);
    save_pyramid(pyramid, args.out_dir);
    log << "prefilter: wrote " << args.out_dir.string() << "\n";
    return pyramid;
}

BrdfLut bake_lut(const BakeLutArgs &args, std::ostream &log) {
    require(args.resolution >= 16, "--res must be >= 16");
    require(args.samples >= 256, "--samples must be >= 256");
    require(!args.out.empty(), "output path required");
    BrdfLut lut = bake_brdf_lut(args.resolution, args.samples, args.seed);
    save_lut(lut, args.out);
    log << "bake-lut: " << args.resolution << "x" << args.resolution << " cells, " << args.samples
        << " samples each -> " << args.out.string() << "\n";
    return lut;
}

FitIllumReport fit_illum(const FitIllumArgs &args, std::ostream &log) {
    require(!args.out.empty(), "output path required");
    require(args.log_every >= 1, "--log-every must be >= 1");
    FitIllumReport report;
    report.config = args.config.empty() ? TrainConfig{} : load_train_config(args.config);
    if (args.steps)
        report.config.steps = *args.steps;
    if (args.seed)
        report.config.seed = *args.seed;
    report.config.validate();
    const TrainConfig &cfg = report.config;
    RadianceMap env = load_hdr(args.env);

    {
        IllumField initial(cfg.encoding, cfg.shape, cfg.seed);
        report.initial_ld = evaluate_regularizer(initial, kEvalTuples, kEvalLightSamples, kEvalSeed);
    }
    log << "fit-illum: " << cfg.steps << " steps, " << cfg.shape.hidden_layers << "x" << cfg.shape.hidden_width
        << " hidden, seed " << cfg.seed << "\n";
    FitResult fitted = fit(env, cfg, [&](const TrainStep &s) {
        if (s.step % args.log_every == 0 || s.step == cfg.steps - 1)
            log << "step " << s.step << " lr " << s.learning_rate << " loss " << s.loss.total << " rec "
                << s.loss.reconstruction << " reg " << s.loss.regularizer << "\n";
    });
    report.history = std::move(fitted.history);
    report.final_ld = evaluate_regularizer(fitted.field, kEvalTuples, kEvalLightSamples, kEvalSeed);
    RadianceMap exported = export_envmap(fitted.field, 0.0, env.height());
    report.psnr_rho0 = compare_images(env.image(), exported.image(), false).psnr;
    report.consistency = irradiance_consistency(fitted.field, env.height(), 64, kEvalSeed);

    log << "fit-illum: PSNR(g(.,0), env) = " << format_psnr(report.psnr_rho0) << " dB\n";
    log << "fit-illum: L_D " << report.initial_ld << " -> " << report.final_ld << "\n";
    log << "fit-illum: median irradiance consistency error " << report.consistency << "\n";

    nlohmann::ordered_json meta;
    meta["config"] = nlohmann::json::parse(train_config_json(cfg));
    meta["psnr_rho0_db"] = std::isfinite(report.psnr_rho0) ? nlohmann::json(report.psnr_rho0) : nlohmann::json("inf");
    meta["initial_regularizer"] = report.initial_ld;
    meta["final_regularizer"] = report.final_ld;
    meta["irradiance_consistency"] = report.consistency;
    meta["final_loss"] = report.history.back().loss.total;

    if (!args.loss_log.empty()) {
        std::ostringstream csv;
        csv << std::setprecision(9) << "step,learning_rate,loss,reconstruction,regularizer\n";
        for (const TrainStep &s : report.history)
            csv << s.step << ',' << s.learning_rate << ',' << s.loss.total << ',' << s.loss.reconstruction << ','
                << s.loss.regularizer << '\n';
        write_file_atomic(args.loss_log, csv.str());
    }
    save_field(fitted.field, args.out, meta.dump());
    log << "fit-illum: wrote " << args.out.string() << "\n";
    return report;
}

std::vector<SurfacePoint> load_probe_points(const fs::path &path, const Material &material) {
    auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<SurfacePoint> points;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;)
            tokens.push_back(t);
        if (tokens.empty())
            continue;
        double v[6];
        bool ok = tokens.size() == 6;
        for (size_t k = 0; ok && k < 6; ++k) {
            size_t used = 0;
            try {
                v[k] = std::stod(tokens[k], &used);
            } catch (const std::exception &) {
                used = 0;
            }
            ok = used == tokens[k].size() && std::isfinite(v[k]);
        }
        if (!ok)
            fail(ErrorCode::kParse, path.string() + ":" + std::to_string(number) + ": expected 'x y z nx ny nz'");
        Vec3 normal{v[3], v[4], v[5]};
        if (!(length(normal) > 0))
            fail(ErrorCode::kParse, path.string() + ":" + std::to_string(number) + ": zero normal");
        points.push_back({{v[0], v[1], v[2]}, normalize(normal), material});
    }
    if (points.empty())
        fail(ErrorCode::kParse, path.string() + ": no probe points");
    return points;
}

BakedOcclusion bake_occlusion(const BakeOcclusionArgs &args, std::ostream &log) {
    require(args.samples >= 1, "--samples must be >= 1");
    require(args.points >= 1, "--points must be >= 1");
    require(args.roughness >= 0 && args.roughness <= 1, "--roughness must lie in [0,1]");
    require(!args.out.empty(), "output path required");
    Material material;
    material.roughness = args.roughness;
    const bool have_probes = !args.probes.empty();
    TriangleMesh mesh = load_obj(args.mesh, have_probes);
    RadianceMap env = load_hdr(args.env);
    std::vector<SurfacePoint> points;
    if (have_probes) {
        points = load_probe_points(args.probes, material);
    } else {
        RngStream rng(args.seed, 0x5a3f1eULL);
        points = sample_surface(mesh, args.points, rng, material);
    }
    Bvh bvh(std::move(mesh));
    OcclusionBakeConfig cfg;
    cfg.samples = args.samples;
    cfg.seed = args.seed;
    cfg.channel_average = args.channel_average;
    BakedOcclusion baked = ssibl::bake_occlusion(points, env, bvh, cfg);
    save_occlusion(baked, args.out);
    log << "bake-occlusion: " << points.size() << " points, " << args.samples << " samples each -> "
        << args.out.string() << "\n";
    return baked;
}

RenderResult render(const RenderArgs &args, std::ostream &log) {
    check_output_kind(args.out);
    SceneConfig scene_cfg = load_scene_config(args.scene);
    if (args.illum)
        scene_cfg.illum.kind = *args.illum;
    if (args.occlusion)
        scene_cfg.occlusion.mode = *args.occlusion;
    if (args.seed)
        scene_cfg.seed = *args.seed;
    if (args.exposure) {
        require(*args.exposure > 0 && std::isfinite(*args.exposure), "--exposure must be positive");
        scene_cfg.exposure = *args.exposure;
    }

    auto env = std::make_shared<const RadianceMap>(load_hdr(scene_cfg.env));
    Scene scene;
    scene.bvh = std::make_shared<const Bvh>(load_obj(scene_cfg.mesh, true));
    if (!scene_cfg.material_table.empty()) {
        auto table = load_material_table(scene_cfg.material_table);
        if (table.size() != scene.bvh->mesh().vertices().size())
            fail(ErrorCode::kDimensionMismatch, "material table has " + std::to_string(table.size()) +
                                                    " rows for " +
                                                    std::to_string(scene.bvh->mesh().vertices().size()) +
                                                    " vertices");
        scene.materials = std::move(table);
    } else {
        scene.materials = scene_cfg.material;
    }
    std::shared_ptr<const RadianceMap> background = scene_cfg.background_env ? env : nullptr;

    RenderResult result;
    if (args.reference) {
        ReferenceConfig ref;
        ref.samples = scene_cfg.reference_samples;
        ref.occlusion = scene_cfg.reference_occlusion;
        ref.seed = scene_cfg.seed;
        ref.background = background;
        ref.options.ray_offset = scene_cfg.ray_offset;
        if (!scene_cfg.diffuse && !scene_cfg.specular)
            fail(ErrorCode::kInvalidArgument, "shade.diffuse and shade.specular are both off");
        ref.options.mode = !scene_cfg.specular  ? ReflectanceMode::kDiffuseOnly
                           : !scene_cfg.diffuse ? ReflectanceMode::kSpecularOnly
                                                : ReflectanceMode::kFull;
        log << "render: reference, " << ref.samples << " samples per lobe\n";
        result = render_reference(scene, scene_cfg.camera, *env, ref);
    } else {
        BrdfLut lut = scene_cfg.lut.empty() ? bake_brdf_lut(kDefaultLutResolution, kDefaultLutSamples, scene_cfg.seed)
                                            : load_lut(scene_cfg.lut);
        std::optional<IllumSource> illum;
        switch (scene_cfg.illum.kind) {
        case IllumKind::kPyramid:
            illum.emplace(std::make_shared<const PrefilteredPyramid>(
                scene_cfg.illum.pyramid.empty()
                    ? bake_pyramid(*env, scene_cfg.illum.levels, scene_cfg.illum.samples, scene_cfg.seed)
                    : load_pyramid(scene_cfg.illum.pyramid)));
            break;
        case IllumKind::kField:
            require(!scene_cfg.illum.field.empty(), "illumination.field path required for --illum field");
            illum.emplace(std::make_shared<const IllumField>(load_field(scene_cfg.illum.field)));
            break;
        case IllumKind::kMonteCarlo:
            illum.emplace(DirectIllum::make(env, scene_cfg.illum.samples, scene_cfg.seed));
            break;
        }
        RenderConfig rc;
        rc.occlusion = scene_cfg.occlusion.mode;
        rc.occlusion_samples = scene_cfg.occlusion.samples;
        rc.occlusion_env = env;
        if (rc.occlusion == OcclusionMode::kBaked) {
            require(!scene_cfg.occlusion.table.empty(), "occlusion.table path required for baked occlusion");
            rc.baked_occlusion = std::make_shared<const BakedOcclusion>(load_occlusion(scene_cfg.occlusion.table));
        }
        rc.channel_average = scene_cfg.occlusion.channel_average;
        rc.background = background;
        rc.ray_offset = scene_cfg.ray_offset;
        rc.seed = scene_cfg.seed;
        rc.shade.diffuse = scene_cfg.diffuse;
        rc.shade.specular = scene_cfg.specular;
        log << "render: split-sum, " << scene_cfg.camera.width << "x" << scene_cfg.camera.height << "\n";
        result = ssibl::render(scene, scene_cfg.camera, *illum, lut, rc);
    }
    if (result.back_facing > 0)
        log << "render: warning: " << result.back_facing << " back-facing shading points rendered black\n";

    if (lower_extension(args.out) == ".png")
        save_png_srgb(result.image, args.out, scene_cfg.exposure);
    else
        write_hdr_image(result.image, args.out);
    log << "render: wrote " << args.out.string() << "\n";
    return result;
}

std::string format_psnr(double psnr) {
    if (std::isinf(psnr))
        return psnr > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << psnr;
    return s.str();
}

CompareResult compare(const CompareArgs &args, std::ostream &out) {
    Image a = read_hdr_image(args.a);
    Image b = read_hdr_image(args.b);
    CompareResult r = compare_images(a, b, args.channel_scale);
    out << std::setprecision(6) << "scales " << r.scales.r << ' ' << r.scales.g << ' ' << r.scales.b << "\n";
    out << "mse " << r.mse << "\n";
    out << "peak " << r.peak << "\n";
    out << "psnr " << format_psnr(r.psnr) << "\n";
    return r;
}

void make_fixtures(const fs::path &dir, std::ostream &log) {
    fixtures::write_all(dir);
    log << "make-fixtures: wrote " << dir.string() << "\n";
}

int exit_code(const Error &e) { return e.code() == ErrorCode::kIo ? 2 : 1; }

}  // namespace ssibl::cmd
