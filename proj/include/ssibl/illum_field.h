// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssibl/envmap.h"
#include "ssibl/mlp.h"
#include "ssibl/vecmath.h"

namespace ssibl {

struct EncodingConfig {
    int dir_frequencies = 10;
    int rough_frequencies = 5;

    // Raw (x, y, z, rho) plus a sin/cos pair per component and frequency.
    int size() const { return 4 + 2 * (3 * dir_frequencies + rough_frequencies); }

    friend bool operator==(const EncodingConfig &, const EncodingConfig &) = default;
};

// Writes [x, y, z, rho, then for each direction component c and k < L:
// sin(2^k pi c), cos(2^k pi c), then the same for rho] into out.
void positional_encode(const Vec3 &dir, double roughness, const EncodingConfig &cfg, std::span<double> out);
std::vector<double> positional_encode(const Vec3 &dir, double roughness, const EncodingConfig &cfg);

struct IllumFieldShape {
    int hidden_layers = 4;
    int hidden_width = 64;
};

// Pre-integrated illumination g(w, rho) as an MLP over the positional
// encoding of (w, rho), with a softplus RGB head.
class IllumField {
  public:
    IllumField(const EncodingConfig &encoding, const IllumFieldShape &shape, uint64_t seed);
    IllumField(const EncodingConfig &encoding, Mlp mlp);

    const EncodingConfig &encoding() const { return encoding_; }
    const Mlp &mlp() const { return mlp_; }
    Mlp &mlp() { return mlp_; }

    // Throws kNonFinite if the network produces a non-finite value.
    Rgb evaluate(const Vec3 &dir, double roughness) const;
    // 3 x N matrix, column k for (dirs[k], roughness[k]).
    Eigen::MatrixXd evaluate_batch(std::span<const Vec3> dirs, std::span<const double> roughness) const;

    Eigen::MatrixXd encode_batch(std::span<const Vec3> dirs, std::span<const double> roughness) const;

  private:
    EncodingConfig encoding_;
    Mlp mlp_;
};

// One optimisation batch. Reconstruction pairs supervise g(w, 0) directly;
// regulariser tuples (w_s, rho_s) are matched against the ratio estimator
// built from the field's own g(., 0) at the shared light directions.
struct TrainingBatch {
    std::vector<Vec3> recon_dirs;
    std::vector<Rgb> recon_targets;
    std::vector<Vec3> reg_dirs;
    std::vector<double> reg_roughness;
    std::vector<Vec3> light_dirs;
    double lambda_rec = 10.0;
    double lambda_d = 10.0;
};

struct LossBreakdown {
    double total = 0;
    double reconstruction = 0;  // mean squared error at rho = 0
    double regularizer = 0;     // L_D
};

struct LossGradient {
    LossBreakdown loss;
    Eigen::VectorXd gradient;
};

// Ratio-estimator targets for every regulariser tuple, from the field's own
// rho = 0 predictions at batch.light_dirs. Tuples with rho < kMinRoughness
// take g(w_s, 0) directly. Throws kDegenerateEstimator when no light
// direction lies in a tuple's hemisphere.
std::vector<Rgb> regularizer_targets(const IllumField &field, const TrainingBatch &batch);

// loss = lambda_rec mean ||g(w,0) - L||^2 + lambda_d mean ||g(s) - target(s)||^2
// The targets are constants: no gradient flows through them.
LossGradient loss_and_grad(const IllumField &field, const TrainingBatch &batch, std::span<const Rgb> targets);
LossGradient loss_and_grad(const IllumField &field, const TrainingBatch &batch);
LossBreakdown loss_value(const IllumField &field, const TrainingBatch &batch, std::span<const Rgb> targets);

struct TrainConfig {
    int steps = 2000;
    double learning_rate = 5e-3;
    int warmup_steps = 100;
    double final_lr_ratio = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.99;
    int recon_batch = 1024;
    int reg_batch = 512;
    double lambda_rec = 10.0;
    double lambda_d = 10.0;
    int light_samples = 8192;
    uint64_t seed = 1;
    EncodingConfig encoding;
    IllumFieldShape shape;

    void validate() const;
};

struct TrainStep {
    int step = 0;
    double learning_rate = 0;
    LossBreakdown loss;
};

struct FitResult {
    IllumField field;
    std::vector<TrainStep> history;
};

// Adam on uniformly chosen texel centres (reconstruction) and regulariser
// tuples whose roughness is uniform in [0,1] for the first half of the batch
// and exactly 1 for the second half. Deterministic per seed. Throws
// kDivergence when the loss becomes non-finite.
FitResult fit(const RadianceMap &env, const TrainConfig &cfg,
              const std::function<void(const TrainStep &)> &on_step = {});

// L_D on a fixed evaluation set: tuples as in training, drawn from seed.
double evaluate_regularizer(const IllumField &field, int tuples, int light_samples, uint64_t seed);

// Median over probe normals of |g(n, 1) - E(n)| / |E(n)| (Euclidean norms)
// where E is the quadrature irradiance of the field's own rho = 0 export at
// the given height. Probe normals are uniform on the sphere.
double irradiance_consistency(const IllumField &field, int height, int probes, uint64_t seed);

// Evaluates the field at every texel centre of a (2h x h) map.
RadianceMap export_envmap(const IllumField &field, double roughness, int height);

// Binary layout (all little-endian):
//   "ILLF1", u32 dir_frequencies, u32 rough_frequencies, u32 output activation,
//   u32 layer dimension count n, n x u32 dimensions (inputs, hidden..., outputs),
//   then every parameter as float32 in the MLP's flat order.
std::vector<uint8_t> encode_field(const IllumField &field);
IllumField decode_field(std::span<const uint8_t> bytes);
void save_field(const IllumField &field, const std::filesystem::path &path, const std::string &metadata_json = {});
IllumField load_field(const std::filesystem::path &path);

}  // namespace ssibl
