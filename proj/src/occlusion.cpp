// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/occlusion.h"

#include <cmath>
#include <limits>

#include "ssibl/binary_io.h"
#include "ssibl/error.h"
#include "ssibl/parallel.h"
#include "ssibl/sampling.h"

namespace ssibl {

namespace {

// Running sums for sum(a_i) / sum(b_i) with a_i = b_i V_i, kept per sample so
// the delta-method variance can be formed afterwards.
class RatioSums {
  public:
    explicit RatioSums(int reserve) { samples_.reserve(reserve); }

    void add(const Rgb &weight, bool visible) { samples_.push_back({weight, visible}); }

    RatioEstimate result() const {
        Rgb num, den;
        for (const auto &s : samples_) {
            den += s.weight;
            if (s.visible)
                num += s.weight;
        }
        const double den_mean = den.average();
        if (!(den.max_component() > 1e-300))
            fail(ErrorCode::kDegenerateEstimator, "occlusion denominator vanished (all-black radiance)");

        RatioEstimate est;
        est.sample_count = static_cast<int>(samples_.size());
        for (int c = 0; c < 3; ++c) {
            const bool flat = !(den[c] > 1e-300);
            // A black channel borrows the channel-mean ratio.
            const double numer = flat ? num.average() : num[c];
            const double denom = flat ? den_mean : den[c];
            const double ratio = std::clamp(numer / denom, 0.0, 1.0);
            est.value[c] = ratio;
            const size_t n = samples_.size();
            if (n < 2)
                continue;
            double ss = 0;
            for (const auto &s : samples_) {
                const double b = flat ? s.weight.average() : s.weight[c];
                const double r = (s.visible ? b : 0.0) - ratio * b;
                ss += r * r;
            }
            const double mean_b = denom / double(n);
            est.std_error[c] = std::sqrt(ss / (double(n) * double(n - 1))) / mean_b;
        }
        return est;
    }

  private:
    struct Sample {
        Rgb weight;
        bool visible;
    };
    std::vector<Sample> samples_;
};

double ray_offset_for(const OcclusionQuery &q, const Bvh &bvh) {
    return q.ray_offset >= 0 ? q.ray_offset : default_ray_offset(bvh.mesh());
}

}  // namespace

RatioEstimate mc_occlusion_diffuse(const OcclusionQuery &query, const RadianceMap &env, const Bvh &bvh, int samples,
                                   RngStream &rng) {
    require(samples >= 1, "occlusion sample count must be >= 1");
    const double t_min = ray_offset_for(query, bvh);
    RatioSums sums(samples);
    for (int i = 0; i < samples; ++i) {
        Vec3 dir = cos_hemisphere(query.normal, rng).dir;
        Rgb radiance = sample_bilinear(env, dir);
        sums.add(radiance, !bvh.occluded(query.position, dir, t_min));
    }
    return sums.result();
}

RatioEstimate mc_occlusion_specular(const OcclusionQuery &query, double roughness, const RadianceMap &env,
                                    const Bvh &bvh, int samples, RngStream &rng, std::optional<Vec3> axis) {
    require(samples >= 1, "occlusion sample count must be >= 1");
    const double t_min = ray_offset_for(query, bvh);
    const Vec3 lobe_axis = axis ? normalize(*axis) : query.normal;
    RatioSums sums(samples);
    for (int i = 0; i < samples; ++i) {
        Vec3 dir = ggx_lobe(lobe_axis, roughness, rng).dir;
        double c = dot(dir, query.normal);
        if (c <= 0) {
            sums.add(Rgb(), false);
            continue;
        }
        Rgb weight = sample_bilinear(env, dir) * c;
        sums.add(weight, !bvh.occluded(query.position, dir, t_min));
    }
    return sums.result();
}

double visibility_fraction(const OcclusionQuery &query, const Bvh &bvh, int samples, RngStream &rng) {
    require(samples >= 1, "occlusion sample count must be >= 1");
    const double t_min = ray_offset_for(query, bvh);
    int visible = 0;
    for (int i = 0; i < samples; ++i) {
        Vec3 dir = cos_hemisphere(query.normal, rng).dir;
        if (!bvh.occluded(query.position, dir, t_min))
            ++visible;
    }
    return double(visible) / samples;
}

RatioEstimate channel_average(const RatioEstimate &est) {
    RatioEstimate out = est;
    out.value = Rgb(est.value.average());
    out.std_error = Rgb(est.std_error.average());
    return out;
}

OcclusionEstimate channel_average(const OcclusionEstimate &est) {
    return {channel_average(est.diffuse), channel_average(est.specular)};
}

namespace {

void check_weights(size_t n, std::span<const double> weights) {
    if (weights.size() != n)
        fail(ErrorCode::kDimensionMismatch, "occlusion loss: weight count differs from point count");
    double sum = 0;
    for (double w : weights) {
        require(w >= 0 && std::isfinite(w), "occlusion loss weights must be non-negative");
        sum += w;
    }
    require(n == 0 || std::abs(sum - 1) <= 1e-6, "occlusion loss weights must sum to 1");
}

}  // namespace

double occlusion_loss(std::span<const Rgb> predicted, std::span<const Rgb> targets, std::span<const double> weights) {
    if (predicted.size() != targets.size())
        fail(ErrorCode::kDimensionMismatch, "occlusion loss: predicted and target counts differ");
    check_weights(predicted.size(), weights);
    if (predicted.empty())
        return 0;
    double sum = 0;
    for (size_t i = 0; i < predicted.size(); ++i)
        sum += weights[i] * squared_norm(predicted[i] - targets[i]);
    return sum / double(predicted.size());
}

double occlusion_loss(std::span<const OcclusionEstimate> predicted, std::span<const OcclusionEstimate> targets,
                      std::span<const double> weights) {
    if (predicted.size() != targets.size())
        fail(ErrorCode::kDimensionMismatch, "occlusion loss: predicted and target counts differ");
    std::vector<Rgb> pd, td, ps, ts;
    for (size_t i = 0; i < predicted.size(); ++i) {
        pd.push_back(predicted[i].diffuse.value);
        td.push_back(targets[i].diffuse.value);
        ps.push_back(predicted[i].specular.value);
        ts.push_back(targets[i].specular.value);
    }
    return occlusion_loss(pd, td, weights) + occlusion_loss(ps, ts, weights);
}

// ---------------------------------------------------------------------------

BakedOcclusion bake_occlusion(std::span<const SurfacePoint> points, const RadianceMap &env, const Bvh &bvh,
                              const OcclusionBakeConfig &cfg) {
    require(cfg.samples >= 1, "occlusion sample count must be >= 1");
    BakedOcclusion baked;
    baked.positions.resize(points.size());
    baked.estimates.resize(points.size());
    parallel_for(0, int64_t(points.size()), [&](int64_t i) {
        const SurfacePoint &p = points[i];
        OcclusionQuery q{p.position, p.normal, cfg.ray_offset};
        RngStream rng(cfg.seed, uint64_t(i));
        OcclusionEstimate est;
        est.diffuse = mc_occlusion_diffuse(q, env, bvh, cfg.samples, rng);
        est.specular = mc_occlusion_specular(q, std::clamp(p.material.roughness, kMinRoughness, 1.0), env, bvh,
                                             cfg.samples, rng, cfg.specular_axis);
        baked.positions[i] = p.position;
        baked.estimates[i] = cfg.channel_average ? channel_average(est) : est;
    });
    return baked;
}

const OcclusionEstimate &nearest_occlusion(const BakedOcclusion &baked, const Vec3 &position) {
    require(!baked.positions.empty(), "no baked occlusion points");
    size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < baked.positions.size(); ++i) {
        Vec3 d = baked.positions[i] - position;
        double d2 = dot(d, d);
        if (d2 < best_d) {
            best_d = d2;
            best = i;
        }
    }
    return baked.estimates[best];
}

std::vector<uint8_t> encode_occlusion(const BakedOcclusion &baked) {
    require(baked.positions.size() == baked.estimates.size(), "baked occlusion arrays differ in length");
    ByteWriter out;
    out.text("OCCL1");
    out.u32(static_cast<uint32_t>(baked.positions.size()));
    auto put3 = [&](double a, double b, double c) {
        out.f32(static_cast<float>(a));
        out.f32(static_cast<float>(b));
        out.f32(static_cast<float>(c));
    };
    for (size_t i = 0; i < baked.positions.size(); ++i) {
        const Vec3 &p = baked.positions[i];
        const OcclusionEstimate &e = baked.estimates[i];
        put3(p.x, p.y, p.z);
        put3(e.diffuse.value.r, e.diffuse.value.g, e.diffuse.value.b);
        put3(e.specular.value.r, e.specular.value.g, e.specular.value.b);
    }
    return out.buffer();
}

BakedOcclusion decode_occlusion(std::span<const uint8_t> bytes) {
    ByteReader in(bytes, "occlusion table");
    if (!in.expect("OCCL1"))
        fail(ErrorCode::kMalformedHeader, "missing OCCL1 magic");
    const uint32_t count = in.u32();
    if (in.remaining() != size_t(count) * 9 * 4)
        fail(in.remaining() < size_t(count) * 9 * 4 ? ErrorCode::kTruncated : ErrorCode::kParse,
             "occlusion table size does not match its point count");
    BakedOcclusion baked;
    baked.positions.resize(count);
    baked.estimates.resize(count);
    for (uint32_t i = 0; i < count; ++i) {
        Vec3 &p = baked.positions[i];
        p.x = in.f32();
        p.y = in.f32();
        p.z = in.f32();
        for (RatioEstimate *r : {&baked.estimates[i].diffuse, &baked.estimates[i].specular}) {
            for (int c = 0; c < 3; ++c) {
                double v = in.f32();
                if (!(v >= 0 && v <= 1))
                    fail(ErrorCode::kParse, "occlusion value outside [0,1] at point " + std::to_string(i));
                r->value[c] = v;
            }
        }
    }
    return baked;
}

void save_occlusion(const BakedOcclusion &baked, const std::filesystem::path &path) {
    write_file_atomic(path, encode_occlusion(baked));
}

BakedOcclusion load_occlusion(const std::filesystem::path &path) { return decode_occlusion(read_file(path)); }

// ---------------------------------------------------------------------------

OcclusionField::OcclusionField(int frequencies, Vec3 lo, Vec3 hi, Mlp mlp)
    : frequencies_(frequencies), lo_(lo), hi_(hi), mlp_(std::move(mlp)) {
    require(frequencies_ >= 1, "occlusion field needs at least one frequency");
    require(mlp_.layout().inputs == encoding_size(frequencies_) && mlp_.layout().outputs == 6 &&
                mlp_.layout().activation == OutputActivation::kSigmoid,
            "occlusion field needs a 6-channel sigmoid head over the position encoding");
}

Eigen::MatrixXd OcclusionField::encode_batch(std::span<const Vec3> positions) const {
    Eigen::MatrixXd x(encoding_size(frequencies_), Eigen::Index(positions.size()));
    for (size_t k = 0; k < positions.size(); ++k) {
        Eigen::Index row = 0;
        const auto col = Eigen::Index(k);
        Vec3 p;
        for (int a = 0; a < 3; ++a) {
            double extent = hi_[a] - lo_[a];
            p[a] = extent > 0 ? 2 * (positions[k][a] - lo_[a]) / extent - 1 : 0.0;
            x(row++, col) = p[a];
        }
        for (int a = 0; a < 3; ++a) {
            double freq = kPi;
            for (int f = 0; f < frequencies_; ++f, freq *= 2) {
                x(row++, col) = std::sin(freq * p[a]);
                x(row++, col) = std::cos(freq * p[a]);
            }
        }
    }
    return x;
}

Eigen::MatrixXd OcclusionField::predict_batch(std::span<const Vec3> positions) const {
    Eigen::MatrixXd out = mlp_.forward(encode_batch(positions));
    if (!out.allFinite())
        fail(ErrorCode::kNonFinite, "occlusion field produced a non-finite value");
    return out;
}

OcclusionEstimate OcclusionField::predict(const Vec3 &position) const {
    Eigen::MatrixXd out = predict_batch(std::span(&position, 1));
    OcclusionEstimate est;
    est.diffuse.value = {out(0, 0), out(1, 0), out(2, 0)};
    est.specular.value = {out(3, 0), out(4, 0), out(5, 0)};
    return est;
}

void OcclusionFitConfig::validate() const {
    require(steps >= 1, "steps must be >= 1");
    require(learning_rate > 0 && std::isfinite(learning_rate), "learning rate must be positive");
    require(warmup_steps >= 0, "warmup steps must be >= 0");
    require(final_lr_ratio > 0 && final_lr_ratio <= 1, "final_lr_ratio must lie in (0, 1]");
    require(batch >= 1, "batch size must be >= 1");
    require(frequencies >= 1, "frequencies must be >= 1");
    require(hidden_layers >= 1 && hidden_width >= 1, "field shape must be positive");
}

OcclusionFitResult fit_occlusion_field(std::span<const SurfacePoint> points, const RadianceMap &env, const Bvh &bvh,
                                       const OcclusionBakeConfig &bake, const OcclusionFitConfig &cfg) {
    cfg.validate();
    require(!points.empty(), "occlusion fit needs at least one training point");
    BakedOcclusion targets = bake_occlusion(points, env, bvh, bake);

    Vec3 lo = points[0].position, hi = points[0].position;
    for (const SurfacePoint &p : points) {
        lo = min(lo, p.position);
        hi = max(hi, p.position);
    }
    if (!bvh.mesh().empty()) {
        lo = min(lo, bvh.mesh().bounds_min());
        hi = max(hi, bvh.mesh().bounds_max());
    }

    MlpLayout layout{OcclusionField::encoding_size(cfg.frequencies), std::vector<int>(cfg.hidden_layers, cfg.hidden_width),
                     6, OutputActivation::kSigmoid};
    RngStream init(cfg.seed, 0x0cc1ULL);
    OcclusionField field(cfg.frequencies, lo, hi, Mlp(layout, init));
    Adam adam(layout.parameter_count(), 0.9, 0.99);

    const int n = static_cast<int>(points.size());
    const int batch = std::min(cfg.batch, n);
    const Eigen::MatrixXd all_inputs = field.encode_batch(targets.positions);
    Eigen::MatrixXd all_targets(6, n);
    for (int i = 0; i < n; ++i) {
        const OcclusionEstimate &e = targets.estimates[i];
        all_targets.col(i) << e.diffuse.value.r, e.diffuse.value.g, e.diffuse.value.b, e.specular.value.r,
            e.specular.value.g, e.specular.value.b;
    }

    OcclusionFitResult result{field, std::move(targets), {}};
    result.loss_history.reserve(cfg.steps);
    Eigen::MatrixXd inputs(all_inputs.rows(), batch), goal(6, batch);
    Mlp::Tape tape;
    for (int step = 0; step < cfg.steps; ++step) {
        RngStream rng(cfg.seed, 0x0cc10000ULL + uint64_t(step));
        for (int k = 0; k < batch; ++k) {
            int i = batch == n ? k : std::min(n - 1, static_cast<int>(rng.uniform() * n));
            inputs.col(k) = all_inputs.col(i);
            goal.col(k) = all_targets.col(i);
        }
        const Eigen::MatrixXd &out = field.mlp().forward(inputs, tape);
        // Uniform weights w = 1/B in (1/B) sum w ||o - t||^2, summed over both heads.
        const double scale = 1.0 / (double(batch) * double(batch));
        Eigen::MatrixXd residual = out - goal;
        const double loss = residual.squaredNorm() * scale;
        if (!std::isfinite(loss))
            fail(ErrorCode::kDivergence, "occlusion fit diverged at step " + std::to_string(step));
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout.parameter_count());
        field.mlp().backward(tape, 2 * scale * residual, grad);
        double lr = warmup_exponential_lr(step, cfg.steps, cfg.warmup_steps, cfg.learning_rate, cfg.final_lr_ratio);
        adam.step(field.mlp().parameters(), grad, lr);
        if (!field.mlp().parameters_finite())
            fail(ErrorCode::kDivergence, "occlusion field parameters became non-finite at step " + std::to_string(step));
        result.loss_history.push_back(loss);
    }
    result.field = std::move(field);
    return result;
}

OcclusionFitResult fit_occlusion_field(const Bvh &bvh, const RadianceMap &env, int count,
                                       const MaterialSource &materials, const OcclusionBakeConfig &bake,
                                       const OcclusionFitConfig &cfg) {
    require(!bvh.mesh().empty(), "cannot sample training points on an empty mesh");
    RngStream rng(cfg.seed, 0x5afaceULL);
    std::vector<SurfacePoint> points = sample_surface(bvh.mesh(), count, rng, materials);
    return fit_occlusion_field(points, env, bvh, bake, cfg);
}

}  // namespace ssibl
