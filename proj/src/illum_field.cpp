// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/illum_field.h"

#include <algorithm>
#include <json.hpp>

#include "ssibl/binary_io.h"
#include "ssibl/brdf.h"
#include "ssibl/error.h"
#include "ssibl/prefilter.h"
#include "ssibl/sampling.h"

namespace ssibl {

void positional_encode(const Vec3 &dir, double roughness, const EncodingConfig &cfg, std::span<double> out) {
    require(out.size() == size_t(cfg.size()), "encoding buffer has the wrong size");
    size_t k = 0;
    out[k++] = dir.x;
    out[k++] = dir.y;
    out[k++] = dir.z;
    out[k++] = roughness;
    auto bands = [&](double v, int frequencies) {
        double freq = kPi;
        for (int f = 0; f < frequencies; ++f, freq *= 2) {
            out[k++] = std::sin(freq * v);
            out[k++] = std::cos(freq * v);
        }
    };
    bands(dir.x, cfg.dir_frequencies);
    bands(dir.y, cfg.dir_frequencies);
    bands(dir.z, cfg.dir_frequencies);
    bands(roughness, cfg.rough_frequencies);
}

std::vector<double> positional_encode(const Vec3 &dir, double roughness, const EncodingConfig &cfg) {
    std::vector<double> out(cfg.size());
    positional_encode(dir, roughness, cfg, out);
    return out;
}

namespace {

MlpLayout field_layout(const EncodingConfig &encoding, const IllumFieldShape &shape) {
    require(encoding.dir_frequencies >= 1 && encoding.rough_frequencies >= 1, "encoding frequencies must be >= 1");
    require(shape.hidden_layers >= 1 && shape.hidden_width >= 1, "field needs at least one hidden layer");
    return {encoding.size(), std::vector<int>(shape.hidden_layers, shape.hidden_width), 3,
            OutputActivation::kSoftplus};
}

}  // namespace

IllumField::IllumField(const EncodingConfig &encoding, const IllumFieldShape &shape, uint64_t seed)
    : encoding_(encoding), mlp_([&] {
          RngStream init(seed, 0x1111f1e1dULL);
          return Mlp(field_layout(encoding, shape), init);
      }()) {}

IllumField::IllumField(const EncodingConfig &encoding, Mlp mlp) : encoding_(encoding), mlp_(std::move(mlp)) {
    require(mlp_.layout().inputs == encoding_.size(), "MLP input width does not match the encoding");
    require(mlp_.layout().outputs == 3 && mlp_.layout().activation == OutputActivation::kSoftplus,
            "illumination field needs a 3-channel softplus head");
}

Eigen::MatrixXd IllumField::encode_batch(std::span<const Vec3> dirs, std::span<const double> roughness) const {
    require(dirs.size() == roughness.size(), "direction and roughness counts differ");
    Eigen::MatrixXd x(encoding_.size(), Eigen::Index(dirs.size()));
    for (size_t k = 0; k < dirs.size(); ++k)
        positional_encode(dirs[k], roughness[k], encoding_, std::span(x.col(Eigen::Index(k)).data(), x.rows()));
    return x;
}

Eigen::MatrixXd IllumField::evaluate_batch(std::span<const Vec3> dirs, std::span<const double> roughness) const {
    Eigen::MatrixXd out = mlp_.forward(encode_batch(dirs, roughness));
    if (!out.allFinite())
        fail(ErrorCode::kNonFinite, "illumination field produced a non-finite value");
    return out;
}

Rgb IllumField::evaluate(const Vec3 &dir, double roughness) const {
    double rho[1] = {roughness};
    Eigen::MatrixXd out = evaluate_batch(std::span(&dir, 1), rho);
    return {out(0, 0), out(1, 0), out(2, 0)};
}

// ---------------------------------------------------------------------------
// Loss

std::vector<Rgb> regularizer_targets(const IllumField &field, const TrainingBatch &batch) {
    const size_t s_count = batch.reg_dirs.size();
    require(batch.reg_roughness.size() == s_count, "regulariser tuple arrays differ in length");
    std::vector<Rgb> targets(s_count);
    if (s_count == 0)
        return targets;
    require(!batch.light_dirs.empty(), "regulariser needs light directions");

    const auto m = Eigen::Index(batch.light_dirs.size());
    std::vector<double> zeros(batch.light_dirs.size(), 0.0);
    Eigen::MatrixXd radiance = field.evaluate_batch(batch.light_dirs, zeros);  // 3 x M

    Eigen::MatrixXd lights(3, m);
    for (Eigen::Index i = 0; i < m; ++i)
        lights.col(i) << batch.light_dirs[i].x, batch.light_dirs[i].y, batch.light_dirs[i].z;

    // Rows with rho below the lobe floor take g(w_s, 0) itself.
    std::vector<Vec3> direct_dirs;
    std::vector<size_t> direct_rows;
    Eigen::VectorXd weights(m);
    for (size_t s = 0; s < s_count; ++s) {
        const double rho = batch.reg_roughness[s];
        if (rho < kMinRoughness) {
            direct_dirs.push_back(batch.reg_dirs[s]);
            direct_rows.push_back(s);
            continue;
        }
        const Vec3 &ws = batch.reg_dirs[s];
        Eigen::RowVector3d axis(ws.x, ws.y, ws.z);
        Eigen::RowVectorXd t = axis * lights;
        const double a2m1 = rho * rho - 1;
        const double a2 = rho * rho;
        double den = 0;
        for (Eigen::Index i = 0; i < m; ++i) {
            double c = t[i];
            if (c <= 0) {
                weights[i] = 0;
                continue;
            }
            double d = (1 + std::min(c, 1.0)) * 0.5 * a2m1 + 1;
            double w = a2 / (kPi * d * d) * c;
            weights[i] = w;
            den += w;
        }
        if (!(den > 1e-12))
            fail(ErrorCode::kDegenerateEstimator, "no light direction in the hemisphere of a regulariser tuple");
        Eigen::Vector3d num = radiance * weights;
        targets[s] = {num[0] / den, num[1] / den, num[2] / den};
    }
    if (!direct_dirs.empty()) {
        std::vector<double> z(direct_dirs.size(), 0.0);
        Eigen::MatrixXd direct = field.evaluate_batch(direct_dirs, z);
        for (size_t k = 0; k < direct_rows.size(); ++k)
            targets[direct_rows[k]] = {direct(0, Eigen::Index(k)), direct(1, Eigen::Index(k)),
                                       direct(2, Eigen::Index(k))};
    }
    return targets;
}

namespace {

struct BatchInputs {
    std::vector<Vec3> dirs;
    std::vector<double> roughness;
};

BatchInputs stacked_inputs(const TrainingBatch &batch) {
    require(batch.recon_dirs.size() == batch.recon_targets.size(), "reconstruction arrays differ in length");
    BatchInputs in;
    in.dirs = batch.recon_dirs;
    in.dirs.insert(in.dirs.end(), batch.reg_dirs.begin(), batch.reg_dirs.end());
    in.roughness.assign(batch.recon_dirs.size(), 0.0);
    in.roughness.insert(in.roughness.end(), batch.reg_roughness.begin(), batch.reg_roughness.end());
    return in;
}

// Fills per-column d(loss)/d(output) and returns the loss terms.
LossBreakdown residuals(const Eigen::MatrixXd &out, const TrainingBatch &batch, std::span<const Rgb> targets,
                        Eigen::MatrixXd *grad_out) {
    const auto r = Eigen::Index(batch.recon_dirs.size());
    const auto s = Eigen::Index(batch.reg_dirs.size());
    require(Eigen::Index(targets.size()) == s, "one regulariser target per tuple required");
    LossBreakdown loss;
    if (grad_out)
        grad_out->setZero(3, r + s);
    for (Eigen::Index k = 0; k < r; ++k) {
        const Rgb &t = batch.recon_targets[k];
        for (int c = 0; c < 3; ++c) {
            double e = out(c, k) - t[c];
            loss.reconstruction += e * e;
            if (grad_out)
                (*grad_out)(c, k) = batch.lambda_rec * 2 * e / double(r);
        }
    }
    for (Eigen::Index k = 0; k < s; ++k) {
        const Rgb &t = targets[k];
        for (int c = 0; c < 3; ++c) {
            double e = out(c, r + k) - t[c];
            loss.regularizer += e * e;
            if (grad_out)
                (*grad_out)(c, r + k) = batch.lambda_d * 2 * e / double(s);
        }
    }
    if (r > 0)
        loss.reconstruction /= double(r);
    if (s > 0)
        loss.regularizer /= double(s);
    loss.total = batch.lambda_rec * loss.reconstruction + batch.lambda_d * loss.regularizer;
    return loss;
}

}  // namespace

LossGradient loss_and_grad(const IllumField &field, const TrainingBatch &batch, std::span<const Rgb> targets) {
    BatchInputs in = stacked_inputs(batch);
    LossGradient result;
    result.gradient = Eigen::VectorXd::Zero(field.mlp().parameters().size());
    if (in.dirs.empty())
        return result;
    Mlp::Tape tape;
    const Eigen::MatrixXd &out = field.mlp().forward(field.encode_batch(in.dirs, in.roughness), tape);
    Eigen::MatrixXd grad_out;
    result.loss = residuals(out, batch, targets, &grad_out);
    if (!std::isfinite(result.loss.total))
        fail(ErrorCode::kNonFinite, "loss is not finite");
    field.mlp().backward(tape, grad_out, result.gradient);
    return result;
}

LossGradient loss_and_grad(const IllumField &field, const TrainingBatch &batch) {
    std::vector<Rgb> targets = regularizer_targets(field, batch);
    return loss_and_grad(field, batch, targets);
}

LossBreakdown loss_value(const IllumField &field, const TrainingBatch &batch, std::span<const Rgb> targets) {
    BatchInputs in = stacked_inputs(batch);
    if (in.dirs.empty())
        return {};
    Eigen::MatrixXd out = field.mlp().forward(field.encode_batch(in.dirs, in.roughness));
    return residuals(out, batch, targets, nullptr);
}

// ---------------------------------------------------------------------------
// Training

void TrainConfig::validate() const {
    require(steps >= 1, "steps must be >= 1");
    require(learning_rate > 0 && std::isfinite(learning_rate), "learning rate must be positive");
    require(warmup_steps >= 0, "warmup steps must be >= 0");
    require(final_lr_ratio > 0 && final_lr_ratio <= 1, "final_lr_ratio must lie in (0, 1]");
    require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "Adam betas must lie in [0, 1)");
    require(recon_batch >= 1 && reg_batch >= 2, "batch sizes must be positive (regulariser >= 2)");
    require(lambda_rec >= 0 && lambda_d >= 0, "loss weights must be non-negative");
    require(light_samples >= 1, "light sample count must be >= 1");
    require(encoding.dir_frequencies >= 1 && encoding.rough_frequencies >= 1, "encoding frequencies must be >= 1");
    require(shape.hidden_layers >= 1 && shape.hidden_width >= 1, "field shape must be positive");
}

namespace {

void draw_regularizer_tuples(int count, RngStream &rng, std::vector<Vec3> &dirs, std::vector<double> &roughness) {
    dirs.resize(count);
    roughness.resize(count);
    const int uniform_half = count / 2;
    for (int k = 0; k < count; ++k) {
        dirs[k] = uniform_sphere(rng).dir;
        roughness[k] = k < uniform_half ? rng.uniform() : 1.0;
    }
}

}  // namespace

FitResult fit(const RadianceMap &env, const TrainConfig &cfg, const std::function<void(const TrainStep &)> &on_step) {
    cfg.validate();
    IllumField field(cfg.encoding, cfg.shape, cfg.seed);
    Adam adam(field.mlp().parameters().size(), cfg.beta1, cfg.beta2);
    FitResult result{field, {}};
    result.history.reserve(cfg.steps);

    const int64_t texels = int64_t(env.width()) * env.height();
    TrainingBatch batch;
    batch.lambda_rec = cfg.lambda_rec;
    batch.lambda_d = cfg.lambda_d;
    for (int step = 0; step < cfg.steps; ++step) {
        RngStream rng(cfg.seed, 0x5eed0000ULL + uint64_t(step));
        batch.recon_dirs.resize(cfg.recon_batch);
        batch.recon_targets.resize(cfg.recon_batch);
        for (int k = 0; k < cfg.recon_batch; ++k) {
            auto id = std::min<int64_t>(texels - 1, static_cast<int64_t>(rng.uniform() * double(texels)));
            int x = static_cast<int>(id % env.width()), y = static_cast<int>(id / env.width());
            batch.recon_dirs[k] = env.texel_direction(x, y);
            batch.recon_targets[k] = env.at(x, y);
        }
        draw_regularizer_tuples(cfg.reg_batch, rng, batch.reg_dirs, batch.reg_roughness);
        batch.light_dirs.resize(cfg.light_samples);
        for (auto &d : batch.light_dirs)
            d = uniform_sphere(rng).dir;

        LossGradient lg;
        try {
            lg = loss_and_grad(field, batch);
        } catch (const Error &e) {
            if (e.code() == ErrorCode::kNonFinite)
                fail(ErrorCode::kDivergence, "training diverged at step " + std::to_string(step) + ": " + e.what());
            throw;
        }
        if (!std::isfinite(lg.loss.total) || !lg.gradient.allFinite())
            fail(ErrorCode::kDivergence, "training diverged at step " + std::to_string(step) +
                                             " (loss " + std::to_string(lg.loss.total) + ")");

        double lr = warmup_exponential_lr(step, cfg.steps, cfg.warmup_steps, cfg.learning_rate, cfg.final_lr_ratio);
        adam.step(field.mlp().parameters(), lg.gradient, lr);
        if (!field.mlp().parameters_finite())
            fail(ErrorCode::kDivergence, "parameters became non-finite at step " + std::to_string(step));

        TrainStep record{step, lr, lg.loss};
        result.history.push_back(record);
        if (on_step)
            on_step(record);
    }
    result.field = std::move(field);
    return result;
}

double evaluate_regularizer(const IllumField &field, int tuples, int light_samples, uint64_t seed) {
    RngStream rng(seed, 0xe7a1ULL);
    TrainingBatch batch;
    draw_regularizer_tuples(tuples, rng, batch.reg_dirs, batch.reg_roughness);
    batch.light_dirs.resize(light_samples);
    for (auto &d : batch.light_dirs)
        d = uniform_sphere(rng).dir;
    batch.lambda_rec = 0;
    batch.lambda_d = 1;
    std::vector<Rgb> targets = regularizer_targets(field, batch);
    return loss_value(field, batch, targets).regularizer;
}

RadianceMap export_envmap(const IllumField &field, double roughness, int height) {
    require(roughness >= 0 && roughness <= 1, "export roughness must lie in [0,1]");
    require(height >= 1, "export height must be >= 1");
    Image image(2 * height, height);
    std::vector<Vec3> dirs;
    dirs.reserve(size_t(2) * height * height);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < 2 * height; ++x)
            dirs.push_back(uv_to_dir((x + 0.5) / (2 * height), (y + 0.5) / height));
    std::vector<double> rho(dirs.size(), roughness);
    // Chunked to bound memory on large exports.
    const size_t chunk = 4096;
    for (size_t start = 0; start < dirs.size(); start += chunk) {
        size_t n = std::min(chunk, dirs.size() - start);
        Eigen::MatrixXd out =
            field.evaluate_batch(std::span(dirs).subspan(start, n), std::span(rho).subspan(start, n));
        for (size_t k = 0; k < n; ++k)
            image.texels()[start + k] = {out(0, Eigen::Index(k)), out(1, Eigen::Index(k)), out(2, Eigen::Index(k))};
    }
    return RadianceMap(std::move(image));
}

double irradiance_consistency(const IllumField &field, int height, int probes, uint64_t seed) {
    require(probes >= 1, "probe count must be >= 1");
    const RadianceMap exported = export_envmap(field, 0.0, height);
    RngStream rng(seed, 0xc0de5ULL);
    std::vector<double> errors;
    for (int k = 0; k < probes; ++k) {
        Vec3 n = uniform_sphere(rng).dir;
        Rgb e = diffuse_irradiance_quadrature(exported, n);
        Rgb g = field.evaluate(n, 1.0);
        errors.push_back(std::sqrt(squared_norm(g - e) / std::max(squared_norm(e), 1e-300)));
    }
    std::nth_element(errors.begin(), errors.begin() + errors.size() / 2, errors.end());
    double hi = errors[errors.size() / 2];
    if (errors.size() % 2 == 1)
        return hi;
    double lo = *std::max_element(errors.begin(), errors.begin() + errors.size() / 2);
    return (lo + hi) / 2;
}

// ---------------------------------------------------------------------------
// Serialization

std::vector<uint8_t> encode_field(const IllumField &field) {
    const MlpLayout &layout = field.mlp().layout();
    ByteWriter out;
    out.text("ILLF1");
    out.u32(static_cast<uint32_t>(field.encoding().dir_frequencies));
    out.u32(static_cast<uint32_t>(field.encoding().rough_frequencies));
    out.u32(static_cast<uint32_t>(layout.activation));
    out.u32(static_cast<uint32_t>(layout.hidden.size() + 2));
    out.u32(static_cast<uint32_t>(layout.inputs));
    for (int w : layout.hidden)
        out.u32(static_cast<uint32_t>(w));
    out.u32(static_cast<uint32_t>(layout.outputs));
    for (double p : field.mlp().parameters())
        out.f32(static_cast<float>(p));
    return out.buffer();
}

IllumField decode_field(std::span<const uint8_t> bytes) {
    ByteReader in(bytes, "field");
    if (!in.expect("ILLF1"))
        fail(ErrorCode::kMalformedHeader, "missing ILLF1 magic");
    EncodingConfig enc;
    enc.dir_frequencies = static_cast<int>(in.u32());
    enc.rough_frequencies = static_cast<int>(in.u32());
    uint32_t activation = in.u32();
    uint32_t dims = in.u32();
    if (enc.dir_frequencies < 1 || enc.dir_frequencies > 64 || enc.rough_frequencies < 1 ||
        enc.rough_frequencies > 64 || activation != uint32_t(OutputActivation::kSoftplus) || dims < 3 || dims > 64)
        fail(ErrorCode::kMalformedHeader, "implausible field header");
    MlpLayout layout;
    layout.activation = OutputActivation::kSoftplus;
    layout.inputs = static_cast<int>(in.u32());
    for (uint32_t k = 0; k + 2 < dims; ++k) {
        uint32_t w = in.u32();
        if (w < 1 || w > 65536)
            fail(ErrorCode::kMalformedHeader, "implausible hidden width");
        layout.hidden.push_back(static_cast<int>(w));
    }
    layout.outputs = static_cast<int>(in.u32());
    if (layout.inputs != enc.size() || layout.outputs != 3)
        fail(ErrorCode::kMalformedHeader, "field layout does not match its encoding");
    Eigen::VectorXd params(layout.parameter_count());
    for (Eigen::Index k = 0; k < params.size(); ++k)
        params[k] = in.f32();
    if (in.remaining() != 0)
        fail(ErrorCode::kParse, "trailing bytes after field parameters");
    if (!params.allFinite())
        fail(ErrorCode::kNonFinite, "field file holds non-finite parameters");
    return IllumField(enc, Mlp(layout, std::move(params)));
}

void save_field(const IllumField &field, const std::filesystem::path &path, const std::string &metadata_json) {
    const MlpLayout &layout = field.mlp().layout();
    nlohmann::ordered_json meta;
    meta["format"] = "ILLF1";
    meta["encoding"] = {{"dir_frequencies", field.encoding().dir_frequencies},
                        {"rough_frequencies", field.encoding().rough_frequencies}};
    meta["layer_dims"] = nlohmann::json::array();
    meta["layer_dims"].push_back(layout.inputs);
    for (int w : layout.hidden)
        meta["layer_dims"].push_back(w);
    meta["layer_dims"].push_back(layout.outputs);
    meta["hidden_activation"] = "relu";
    meta["output_activation"] = "softplus";
    meta["parameter_count"] = layout.parameter_count();
    if (!metadata_json.empty())
        meta["training"] = nlohmann::ordered_json::parse(metadata_json);

    write_file_atomic(path, encode_field(field));
    std::filesystem::path sidecar = path;
    sidecar += ".json";
    write_file_atomic(sidecar, meta.dump(2) + "\n");
}

IllumField load_field(const std::filesystem::path &path) { return decode_field(read_file(path)); }

}  // namespace ssibl
