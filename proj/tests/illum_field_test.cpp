// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "ssibl/binary_io.h"
#include "ssibl/envmap.h"
#include "ssibl/error.h"
#include "ssibl/fixtures.h"
#include "ssibl/illum_field.h"
#include "ssibl/mlp.h"
#include "ssibl/parallel.h"
#include "ssibl/prefilter.h"
#include "ssibl/sampling.h"
#include "test_support.h"

using namespace ssibl;

namespace {

// Reduced training budget for unit tests; the acceptance suite runs the defaults.
TrainConfig small_config() {
    TrainConfig cfg;
    cfg.steps = 600;
    cfg.warmup_steps = 50;
    cfg.recon_batch = 512;
    cfg.reg_batch = 256;
    cfg.light_samples = 2048;
    cfg.shape = {3, 64};
    return cfg;
}

TrainingBatch tiny_batch(uint64_t seed) {
    RngStream rng(seed, 0);
    TrainingBatch b;
    for (int i = 0; i < 6; ++i) {
        b.recon_dirs.push_back(uniform_sphere(rng).dir);
        b.recon_targets.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    }
    for (int i = 0; i < 6; ++i) {
        b.reg_dirs.push_back(uniform_sphere(rng).dir);
        b.reg_roughness.push_back(i < 3 ? rng.uniform() : 1.0);
    }
    for (int i = 0; i < 64; ++i)
        b.light_dirs.push_back(uniform_sphere(rng).dir);
    return b;
}

double spatial_variance(const RadianceMap &m) {
    double sum = 0, sum2 = 0, n = double(m.width()) * m.height();
    for (const Rgb &c : m.image().texels()) {
        sum += c.average();
        sum2 += c.average() * c.average();
    }
    return sum2 / n - (sum / n) * (sum / n);
}

}  // namespace

TEST(Encoding, LengthAndZeroComponents) {
    EncodingConfig cfg;
    EXPECT_EQ(cfg.size(), 74);
    auto e = positional_encode({0, 0, 1}, 0.0, cfg);
    ASSERT_EQ(e.size(), 74u);
    EXPECT_EQ(e[0], 0);
    EXPECT_EQ(e[1], 0);
    EXPECT_EQ(e[2], 1);
    EXPECT_EQ(e[3], 0);
    // x block, y block, then z block, then rho block; each k gives (sin, cos).
    auto block = [&](int component, int k) { return 4 + 2 * (component * cfg.dir_frequencies + k); };
    for (int k = 0; k < cfg.dir_frequencies; ++k)
        for (int c : {0, 1}) {
            EXPECT_EQ(e[block(c, k)], 0.0);
            EXPECT_EQ(e[block(c, k) + 1], 1.0);
        }
    for (int k = 0; k < cfg.rough_frequencies; ++k) {
        EXPECT_EQ(e[block(3, k)], 0.0);
        EXPECT_EQ(e[block(3, k) + 1], 1.0);
    }
    // z = 1: sin(2^k pi) vanishes to rounding, cos(2^k pi) = 1 for k >= 1.
    EXPECT_NEAR(e[block(2, 0) + 1], -1.0, 1e-15);
    EXPECT_NEAR(e[block(2, 3) + 1], 1.0, 1e-15);
}

TEST(Encoding, FrequenciesAndReproducibility) {
    EncodingConfig cfg{3, 2};
    Vec3 d = normalize(Vec3{0.3, -0.2, 0.9});
    auto a = positional_encode(d, 0.37, cfg), b = positional_encode(d, 0.37, cfg);
    EXPECT_EQ(a, b);
    ASSERT_EQ(a.size(), size_t(cfg.size()));
    for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(a[4 + 2 * (3 + k)], std::sin(std::ldexp(kPi, k) * d.y), 1e-12);
        EXPECT_NEAR(a[4 + 2 * (3 + k) + 1], std::cos(std::ldexp(kPi, k) * d.y), 1e-12);
    }
    EXPECT_NEAR(a[4 + 2 * 9 + 2], std::sin(2 * kPi * 0.37), 1e-12);
}

TEST(Field, ZeroOutputLayerGivesLn2) {
    IllumField f(EncodingConfig{}, IllumFieldShape{}, 3);
    f.mlp().zero_output_layer();
    RngStream rng(1, 0);
    for (int i = 0; i < 50; ++i) {
        Rgb g = f.evaluate(uniform_sphere(rng).dir, rng.uniform());
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(g[c], std::log(2.0), 1e-15);
    }
}

TEST(Field, PositiveAndPure) {
    IllumField f(EncodingConfig{}, IllumFieldShape{}, 4);
    RngStream rng(2, 0);
    for (int i = 0; i < 1000; ++i) {
        Vec3 d = uniform_sphere(rng).dir;
        double rho = rng.uniform();
        Rgb g = f.evaluate(d, rho);
        EXPECT_GT(g.min_component(), 0);
        EXPECT_EQ(g, f.evaluate(d, rho));
    }
}

TEST(Field, BatchMatchesSingle) {
    IllumField f(EncodingConfig{}, IllumFieldShape{2, 16}, 5);
    RngStream rng(3, 0);
    std::vector<Vec3> dirs;
    std::vector<double> rho;
    for (int i = 0; i < 20; ++i) {
        dirs.push_back(uniform_sphere(rng).dir);
        rho.push_back(rng.uniform());
    }
    Eigen::MatrixXd out = f.evaluate_batch(dirs, rho);
    for (int i = 0; i < 20; ++i) {
        Rgb g = f.evaluate(dirs[i], rho[i]);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(out(c, i), g[c], 1e-14);
    }
}

TEST(Field, NonFiniteParametersAreReported) {
    IllumField f(EncodingConfig{}, IllumFieldShape{2, 8}, 6);
    f.mlp().parameters()[0] = std::nan("");
    try {
        f.evaluate({0, 1, 0}, 0.5);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::kNonFinite);
    }
}

TEST(Loss, ZeroWhenTargetsEqualOutputs) {
    IllumField f(EncodingConfig{2, 1}, IllumFieldShape{2, 8}, 7);
    TrainingBatch b = tiny_batch(1);
    for (size_t i = 0; i < b.recon_dirs.size(); ++i)
        b.recon_targets[i] = f.evaluate(b.recon_dirs[i], 0.0);
    std::vector<Rgb> targets;
    for (size_t i = 0; i < b.reg_dirs.size(); ++i)
        targets.push_back(f.evaluate(b.reg_dirs[i], b.reg_roughness[i]));
    LossGradient lg = loss_and_grad(f, b, targets);
    EXPECT_NEAR(lg.loss.total, 0, 1e-20);
    EXPECT_LT(lg.gradient.norm(), 1e-12);
}

TEST(Loss, WithoutRegularizerIsPureReconstruction) {
    IllumField f(EncodingConfig{2, 1}, IllumFieldShape{2, 8}, 8);
    TrainingBatch b = tiny_batch(2);
    b.lambda_d = 0;
    double mse = 0;
    for (size_t i = 0; i < b.recon_dirs.size(); ++i)
        mse += squared_norm(f.evaluate(b.recon_dirs[i], 0.0) - b.recon_targets[i]) / b.recon_dirs.size();
    LossGradient lg = loss_and_grad(f, b);
    EXPECT_NEAR(lg.loss.reconstruction, mse, 1e-12);
    EXPECT_NEAR(lg.loss.total, b.lambda_rec * mse, 1e-11);

    TrainingBatch no_reg = b;
    no_reg.reg_dirs.clear();
    no_reg.reg_roughness.clear();
    LossGradient lg2 = loss_and_grad(f, no_reg);
    EXPECT_NEAR(lg2.loss.total, lg.loss.total, 1e-12);
    EXPECT_LT((lg2.gradient - lg.gradient).norm(), 1e-12);
}

TEST(Loss, RegularizerTargetsFollowRatioEstimator) {
    IllumField f(EncodingConfig{2, 1}, IllumFieldShape{2, 8}, 9);
    TrainingBatch b = tiny_batch(3);
    b.reg_roughness[0] = 0.0;
    auto targets = regularizer_targets(f, b);
    std::vector<LightSample> lights;
    for (const Vec3 &d : b.light_dirs)
        lights.push_back({d, f.evaluate(d, 0.0)});
    EXPECT_EQ(targets[0], f.evaluate(b.reg_dirs[0], 0.0));
    for (size_t i = 1; i < targets.size(); ++i) {
        Rgb expect = prefilter_ratio(b.reg_dirs[i], b.reg_roughness[i], lights);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(targets[i][c], expect[c], 1e-12);
    }
    b.light_dirs = {{0, -1, 0}};
    b.reg_dirs[1] = {0, 1, 0};
    EXPECT_THROW(regularizer_targets(f, b), Error);
}

TEST(Loss, GradientMatchesCentralDifferences) {
    IllumField f(EncodingConfig{2, 1}, IllumFieldShape{2, 8}, 10);
    TrainingBatch b = tiny_batch(4);
    auto targets = regularizer_targets(f, b);
    LossGradient lg = loss_and_grad(f, b, targets);
    const double h = 1e-4;
    Eigen::VectorXd &p = f.mlp().parameters();
    for (int64_t i = 0; i < p.size(); ++i) {
        double keep = p[i];
        p[i] = keep + h;
        double up = loss_value(f, b, targets).total;
        p[i] = keep - h;
        double down = loss_value(f, b, targets).total;
        p[i] = keep;
        double fd = (up - down) / (2 * h);
        EXPECT_NEAR(lg.gradient[i], fd, 1e-4 * std::max(std::abs(fd), 1e-3)) << "parameter " << i;
    }
}

TEST(Fit, ConstantEnvironment) {
    const Rgb c{0.6, 0.8, 1.0};
    // Full schedule and architecture: the short schedule leaves ripples
    // between training texels at rho = 0.
    TrainConfig cfg = small_config();
    cfg.steps = TrainConfig{}.steps;
    cfg.warmup_steps = TrainConfig{}.warmup_steps;
    cfg.shape = TrainConfig{}.shape;
    FitResult r = fit(RadianceMap(64, c), cfg);
    double worst = 0;
    for (int y = 0; y < 12; ++y)
        for (int x = 0; x < 24; ++x) {
            Vec3 d = uv_to_dir((x + 0.5) / 24, (y + 0.5) / 12);
            for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                Rgb g = r.field.evaluate(d, rho);
                for (int k = 0; k < 3; ++k)
                    worst = std::max(worst, std::abs(g[k] - c[k]) / c[k]);
            }
        }
    EXPECT_LE(worst, 0.02);
}

TEST(Fit, BrightTexelPeakLocation) {
    const int tx = 41, ty = 11;
    RadianceMap env = fixtures::bright_texel_env(32, tx, ty);
    TrainConfig cfg = small_config();
    cfg.steps = 1000;
    FitResult r = fit(env, cfg);
    RadianceMap out = export_envmap(r.field, 0.0, 32);
    int bx = 0, by = 0;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (out.at(x, y).average() > out.at(bx, by).average()) {
                bx = x;
                by = y;
            }
    int dx = std::abs(bx - tx);
    dx = std::min(dx, out.width() - dx);
    EXPECT_LE(std::max(dx, std::abs(by - ty)), 2) << bx << "," << by;
}

TEST(Fit, RougherExportsAreSmoother) {
    RadianceMap env = fixtures::high_frequency_env(16);
    FitResult r = fit(env, small_config());
    double v02 = spatial_variance(export_envmap(r.field, 0.2, 16));
    double v08 = spatial_variance(export_envmap(r.field, 0.8, 16));
    EXPECT_LE(v08, v02);
}

TEST(Fit, RegularizerLossFalls) {
    RadianceMap env = fixtures::standard_env(16);
    TrainConfig cfg = small_config();
    IllumField init(cfg.encoding, cfg.shape, cfg.seed);
    double before = evaluate_regularizer(init, 256, 4096, 11);
    FitResult r = fit(env, cfg);
    double after = evaluate_regularizer(r.field, 256, 4096, 11);
    EXPECT_LE(after, 0.1 * before);
    EXPECT_EQ(r.history.size(), size_t(cfg.steps));
    EXPECT_EQ(r.history.back().learning_rate, warmup_exponential_lr(cfg.steps - 1, cfg.steps, cfg.warmup_steps,
                                                                    cfg.learning_rate, cfg.final_lr_ratio));
    EXPECT_NEAR(r.history.back().learning_rate, cfg.learning_rate * cfg.final_lr_ratio, 1e-2 * cfg.learning_rate);
}

TEST(Fit, DeterministicAcrossRunsAndThreads) {
    RadianceMap env = fixtures::standard_env(8);
    TrainConfig cfg = small_config();
    cfg.steps = 15;
    cfg.shape = {2, 16};
    set_thread_count(1);
    FitResult a = fit(env, cfg);
    set_thread_count(4);
    FitResult b = fit(env, cfg);
    set_thread_count(0);
    EXPECT_EQ(a.field.mlp().parameters(), b.field.mlp().parameters());
    cfg.seed = 2;
    FitResult c = fit(env, cfg);
    EXPECT_NE(a.field.mlp().parameters(), c.field.mlp().parameters());
}

TEST(Fit, RejectsBadConfig) {
    TrainConfig cfg = small_config();
    cfg.steps = 0;
    EXPECT_THROW(fit(RadianceMap(4, Rgb(1)), cfg), Error);
    cfg = small_config();
    cfg.lambda_d = -1;
    EXPECT_THROW(fit(RadianceMap(4, Rgb(1)), cfg), Error);
}

TEST(Export, ConstantFieldGivesConstantMap) {
    IllumField f(EncodingConfig{}, IllumFieldShape{2, 8}, 12);
    f.mlp().zero_output_layer();
    RadianceMap m = export_envmap(f, 0.4, 8);
    EXPECT_EQ(m.width(), 16);
    for (const Rgb &t : m.image().texels())
        EXPECT_NEAR(t.r, std::log(2.0), 1e-15);
}

TEST(Serialization, Roundtrip) {
    testutil::TempDir dir;
    IllumField f(EncodingConfig{4, 2}, IllumFieldShape{2, 16}, 13);
    save_field(f, dir / "f.illf", R"({"steps": 3})");
    ASSERT_TRUE(std::filesystem::exists(dir / "f.illf.json"));
    IllumField g = load_field(dir / "f.illf");
    EXPECT_EQ(g.encoding(), f.encoding());
    EXPECT_EQ(g.mlp().layout(), f.mlp().layout());
    RngStream rng(4, 0);
    for (int i = 0; i < 100; ++i) {
        Vec3 d = uniform_sphere(rng).dir;
        double rho = rng.uniform();
        Rgb a = f.evaluate(d, rho), b = g.evaluate(d, rho);
        for (int c = 0; c < 3; ++c)
            EXPECT_NEAR(a[c], b[c], 1e-5 * std::max(1.0, a[c]));
    }
    // Float parameters round-trip exactly once quantised.
    EXPECT_EQ(encode_field(g), encode_field(f));

    auto bytes = encode_field(f);
    auto cut = std::vector<uint8_t>(bytes.begin(), bytes.end() - 4);
    EXPECT_THROW(decode_field(cut), Error);
    auto extra = bytes;
    extra.push_back(0);
    EXPECT_THROW(decode_field(extra), Error);
    bytes[0] = 'X';
    EXPECT_THROW(decode_field(bytes), Error);
}
