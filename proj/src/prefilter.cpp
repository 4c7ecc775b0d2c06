// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/prefilter.h"

#include <fstream>
#include <sstream>

#include "ssibl/binary_io.h"
#include "ssibl/brdf.h"
#include "ssibl/error.h"
#include "ssibl/parallel.h"
#include "ssibl/sampling.h"

namespace ssibl {

namespace {

class RatioAccumulator {
  public:
    RatioAccumulator(const Vec3 &axis, double roughness) : axis_(axis), roughness_(roughness) {}

    void add(const Vec3 &dir, const Rgb &radiance) {
        double t = dot(dir, axis_);
        if (t <= 0)
            return;
        double w = ggx_ndf_simplified(std::min(t, 1.0), roughness_) * t;
        numerator_ += radiance * w;
        denominator_ += w;
    }

    Rgb result() const {
        if (!(denominator_ > 1e-12))
            fail(ErrorCode::kDegenerateEstimator, "no light sample in the hemisphere about the lobe axis");
        return numerator_ / denominator_;
    }

  private:
    Vec3 axis_;
    double roughness_;
    Rgb numerator_;
    double denominator_ = 0;
};

void check_roughness(double roughness) {
    if (!(roughness >= kMinRoughness && roughness <= 1))
        fail(ErrorCode::kInvalidArgument, "roughness " + std::to_string(roughness) + " outside [1e-3, 1]");
}

}  // namespace

std::vector<LightSample> draw_light_samples(const RadianceMap &env, int count, RngStream &rng) {
    require(count >= 1, "light sample count must be >= 1");
    std::vector<LightSample> out(count);
    for (auto &s : out) {
        s.dir = uniform_sphere(rng).dir;
        s.radiance = sample_bilinear(env, s.dir);
    }
    return out;
}

Rgb prefilter_ratio(const Vec3 &reflected, double roughness, std::span<const LightSample> samples) {
    check_roughness(roughness);
    RatioAccumulator acc(reflected, roughness);
    for (const LightSample &s : samples)
        acc.add(s.dir, s.radiance);
    return acc.result();
}

Rgb mc_prefilter(const RadianceMap &env, const Vec3 &reflected, double roughness,
                 std::span<const LightSample> samples) {
    if (roughness < kMinRoughness)
        return sample_bilinear(env, reflected);
    return prefilter_ratio(reflected, roughness, samples);
}

Rgb diffuse_irradiance_quadrature(const RadianceMap &env, const Vec3 &n) {
    // Each texel is split into kSub x kSub cells so the clamped cosine is
    // resolved along the horizon; radiance is constant over the texel.
    constexpr int kSub = 4;
    const int w = env.width(), h = env.height();
    Rgb sum;
    for (int y = 0; y < h; ++y) {
        for (int sy = 0; sy < kSub; ++sy) {
            const double v0 = (y + double(sy) / kSub) / h, v1 = (y + double(sy + 1) / kSub) / h;
            const double dw = (2 * kPi / (w * kSub)) * (std::cos(kPi * v0) - std::cos(kPi * v1));
            const double v = (v0 + v1) / 2;
            for (int x = 0; x < w; ++x) {
                double weight = 0;
                for (int sx = 0; sx < kSub; ++sx) {
                    const double c = dot(uv_to_dir((x + (sx + 0.5) / kSub) / w, v), n);
                    if (c > 0)
                        weight += c;
                }
                if (weight > 0)
                    sum += env.at(x, y) * (weight * dw);
            }
        }
    }
    return sum * kInvPi;
}

Rgb diffuse_irradiance_mc(const Vec3 &n, std::span<const LightSample> samples) {
    return prefilter_ratio(n, 1.0, samples);
}

// ---------------------------------------------------------------------------

PrefilteredPyramid::PrefilteredPyramid(std::vector<PyramidLevel> levels) : levels_(std::move(levels)) {
    require(levels_.size() >= 2, "pyramid needs at least two levels");
    require(levels_.front().roughness == 0 && levels_.back().roughness == 1,
            "pyramid roughness must run from 0 to 1");
    for (size_t k = 1; k < levels_.size(); ++k)
        require(levels_[k].roughness > levels_[k - 1].roughness, "pyramid roughness must increase strictly");
}

PrefilteredPyramid bake_pyramid(const RadianceMap &env, int level_count, int samples_per_texel, uint64_t seed) {
    require(level_count >= 2, "pyramid needs at least two levels");
    require(samples_per_texel >= 1, "samples per texel must be >= 1");
    const int w = env.width(), h = env.height();
    const int64_t texels = int64_t(w) * h;

    std::vector<PyramidLevel> levels;
    levels.push_back({0.0, env});
    for (int k = 1; k < level_count; ++k) {
        const double roughness = k == level_count - 1 ? 1.0 : double(k) / (level_count - 1);
        Image image(w, h);
        parallel_for(0, texels, [&](int64_t id) {
            int x = static_cast<int>(id % w), y = static_cast<int>(id / w);
            RngStream rng(seed, uint64_t(k) * texels + id);
            RatioAccumulator acc(env.texel_direction(x, y), roughness);
            for (int s = 0; s < samples_per_texel; ++s) {
                Vec3 dir = uniform_sphere(rng).dir;
                acc.add(dir, sample_bilinear(env, dir));
            }
            image.at(x, y) = acc.result();
        });
        levels.push_back({roughness, RadianceMap(std::move(image))});
    }
    return PrefilteredPyramid(std::move(levels));
}

Rgb lookup_pyramid(const PrefilteredPyramid &pyramid, const Vec3 &dir, double roughness) {
    const auto &levels = pyramid.levels();
    roughness = std::clamp(roughness, 0.0, 1.0);
    size_t hi = 1;
    while (hi + 1 < levels.size() && levels[hi].roughness < roughness)
        ++hi;
    const PyramidLevel &a = levels[hi - 1], &b = levels[hi];
    double t = std::clamp((roughness - a.roughness) / (b.roughness - a.roughness), 0.0, 1.0);
    if (t == 0)
        return sample_bilinear(a.map, dir);
    if (t == 1)
        return sample_bilinear(b.map, dir);
    return sample_bilinear(a.map, dir) * (1 - t) + sample_bilinear(b.map, dir) * t;
}

// ---------------------------------------------------------------------------

namespace fs = std::filesystem;

void save_pyramid(const PrefilteredPyramid &pyramid, const fs::path &dir) {
    fs::path staging = dir;
    staging += ".partial";
    std::error_code ec;
    fs::remove_all(staging, ec);
    if (!fs::create_directories(staging, ec) && ec)
        fail(ErrorCode::kIo, "cannot create " + staging.string());

    std::ostringstream meta;
    meta.precision(17);
    meta << "ssibl-pyramid 1\n";
    meta << "levels " << pyramid.size() << "\n";
    try {
        for (size_t k = 0; k < pyramid.size(); ++k) {
            std::string name = "level_" + std::to_string(k) + ".hdr";
            save_hdr(pyramid.levels()[k].map, staging / name);
            meta << "level " << k << ' ' << pyramid.levels()[k].roughness << ' ' << name << "\n";
        }
        write_file_atomic(staging / "pyramid.txt", meta.str());
    } catch (...) {
        fs::remove_all(staging, ec);
        throw;
    }

    fs::remove_all(dir, ec);
    fs::rename(staging, dir, ec);
    if (ec) {
        fs::remove_all(staging, ec);
        fail(ErrorCode::kIo, "cannot move pyramid into place at " + dir.string());
    }
}

PrefilteredPyramid load_pyramid(const fs::path &dir) {
    auto bytes = read_file(dir / "pyramid.txt");
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string tag;
    int version = 0;
    size_t count = 0;
    if (!(in >> tag >> version) || tag != "ssibl-pyramid" || version != 1)
        fail(ErrorCode::kMalformedHeader, "pyramid.txt: missing 'ssibl-pyramid 1' header");
    if (!(in >> tag >> count) || tag != "levels" || count < 2 || count > 1024)
        fail(ErrorCode::kMalformedHeader, "pyramid.txt: bad level count");
    std::vector<PyramidLevel> levels;
    for (size_t k = 0; k < count; ++k) {
        size_t index = 0;
        double roughness = 0;
        std::string file;
        if (!(in >> tag >> index >> roughness >> file) || tag != "level" || index != k)
            fail(ErrorCode::kParse, "pyramid.txt: bad entry for level " + std::to_string(k));
        if (file.find('/') != std::string::npos || file.find("..") != std::string::npos)
            fail(ErrorCode::kParse, "pyramid.txt: level file must be a plain file name");
        levels.push_back({roughness, load_hdr(dir / file)});
    }
    return PrefilteredPyramid(std::move(levels));
}

}  // namespace ssibl
