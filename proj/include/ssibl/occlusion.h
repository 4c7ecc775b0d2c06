// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ssibl/envmap.h"
#include "ssibl/geometry.h"
#include "ssibl/mlp.h"
#include "ssibl/rng.h"

namespace ssibl {

// One ratio estimate sum(L V w) / sum(L w) per channel.
struct RatioEstimate {
    Rgb value{1.0};
    Rgb std_error;  // delta-method standard error of the ratio
    int sample_count = 0;
};

struct OcclusionEstimate {
    RatioEstimate diffuse;   // o_d
    RatioEstimate specular;  // o_s
};

struct OcclusionQuery {
    Vec3 position;
    Vec3 normal;  // unit
    // Negative means default_ray_offset of the mesh.
    double ray_offset = -1;
};

// Cosine-weighted directions about the normal; L from bilinear env lookups.
// A channel whose radiance sum vanishes while others do not takes the
// channel-mean ratio. Throws kDegenerateEstimator when every channel sum
// vanishes.
RatioEstimate mc_occlusion_diffuse(const OcclusionQuery &query, const RadianceMap &env, const Bvh &bvh, int samples,
                                   RngStream &rng);

// GGX lobe samples about axis (the normal when unset), weighted by the
// clamped cosine to the normal. Roughness must lie in [kMinRoughness, 1].
RatioEstimate mc_occlusion_specular(const OcclusionQuery &query, double roughness, const RadianceMap &env,
                                    const Bvh &bvh, int samples, RngStream &rng,
                                    std::optional<Vec3> axis = std::nullopt);

// Unit-weight estimator without the radiance factor (cosine-weighted
// visibility fraction). Used as a cross-check.
double visibility_fraction(const OcclusionQuery &query, const Bvh &bvh, int samples, RngStream &rng);

RatioEstimate channel_average(const RatioEstimate &est);
OcclusionEstimate channel_average(const OcclusionEstimate &est);

// (1/|X|) sum_i w_i ||predicted_i - target_i||^2. Weights must be
// non-negative and sum to 1 within 1e-6.
double occlusion_loss(std::span<const Rgb> predicted, std::span<const Rgb> targets, std::span<const double> weights);
// Diffuse and specular terms added.
double occlusion_loss(std::span<const OcclusionEstimate> predicted, std::span<const OcclusionEstimate> targets,
                      std::span<const double> weights);

// Per-point Monte Carlo bake with one RNG stream per point, run in parallel.
struct BakedOcclusion {
    std::vector<Vec3> positions;
    std::vector<OcclusionEstimate> estimates;
};

struct OcclusionBakeConfig {
    int samples = 64;
    uint64_t seed = 1;
    double ray_offset = -1;
    bool channel_average = false;
    std::optional<Vec3> specular_axis;  // world-space override; normal otherwise
};

BakedOcclusion bake_occlusion(std::span<const SurfacePoint> points, const RadianceMap &env, const Bvh &bvh,
                              const OcclusionBakeConfig &cfg);

// Nearest baked point (brute force). Throws kInvalidArgument when empty.
const OcclusionEstimate &nearest_occlusion(const BakedOcclusion &baked, const Vec3 &position);

// "OCCL1", u32 count, then per point position, o_d and o_s as float32 triples.
std::vector<uint8_t> encode_occlusion(const BakedOcclusion &baked);
BakedOcclusion decode_occlusion(std::span<const uint8_t> bytes);
void save_occlusion(const BakedOcclusion &baked, const std::filesystem::path &path);
BakedOcclusion load_occlusion(const std::filesystem::path &path);

// Positional field x -> (o_d, o_s) with sigmoid heads. Positions are mapped
// to [-1, 1]^3 through the stored bounds before encoding.
class OcclusionField {
  public:
    OcclusionField(int frequencies, Vec3 lo, Vec3 hi, Mlp mlp);

    int frequencies() const { return frequencies_; }
    const Mlp &mlp() const { return mlp_; }
    Mlp &mlp() { return mlp_; }

    static int encoding_size(int frequencies) { return 3 + 6 * frequencies; }
    Eigen::MatrixXd encode_batch(std::span<const Vec3> positions) const;

    // 6 x N: rows 0..2 o_d, rows 3..5 o_s.
    Eigen::MatrixXd predict_batch(std::span<const Vec3> positions) const;
    OcclusionEstimate predict(const Vec3 &position) const;

  private:
    int frequencies_;
    Vec3 lo_, hi_;
    Mlp mlp_;
};

struct OcclusionFitConfig {
    int steps = 1500;
    double learning_rate = 5e-3;
    int warmup_steps = 50;
    double final_lr_ratio = 0.1;
    int batch = 256;
    int frequencies = 4;
    int hidden_layers = 3;
    int hidden_width = 64;
    uint64_t seed = 1;

    void validate() const;
};

struct OcclusionFitResult {
    OcclusionField field;
    BakedOcclusion targets;
    std::vector<double> loss_history;
};

// Supervises the field with occlusion_loss against per-point Monte Carlo
// targets under uniform weights.
OcclusionFitResult fit_occlusion_field(std::span<const SurfacePoint> points, const RadianceMap &env, const Bvh &bvh,
                                       const OcclusionBakeConfig &bake, const OcclusionFitConfig &cfg);
// Samples count training points on the mesh first.
OcclusionFitResult fit_occlusion_field(const Bvh &bvh, const RadianceMap &env, int count,
                                       const MaterialSource &materials, const OcclusionBakeConfig &bake,
                                       const OcclusionFitConfig &cfg);

}  // namespace ssibl
