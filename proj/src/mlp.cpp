// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#include "ssibl/mlp.h"

#include <cmath>

#include "ssibl/error.h"

namespace ssibl {

int64_t MlpLayout::parameter_count() const {
    int64_t n = 0;
    for (int l = 0; l < layer_count(); ++l)
        n += int64_t(fan_out(l)) * (fan_in(l) + 1);
    return n;
}

namespace {

void check_layout(const MlpLayout &layout) {
    require(layout.inputs >= 1 && layout.outputs >= 1, "MLP needs inputs and outputs");
    for (int w : layout.hidden)
        require(w >= 1, "hidden layer widths must be positive");
}

std::vector<int64_t> layer_offsets(const MlpLayout &layout) {
    std::vector<int64_t> offsets;
    int64_t o = 0;
    for (int l = 0; l < layout.layer_count(); ++l) {
        offsets.push_back(o);
        o += int64_t(layout.fan_out(l)) * (layout.fan_in(l) + 1);
    }
    return offsets;
}

}  // namespace

Mlp::Mlp(MlpLayout layout, RngStream &init) : layout_(std::move(layout)) {
    check_layout(layout_);
    offsets_ = layer_offsets(layout_);
    params_ = Eigen::VectorXd::Zero(layout_.parameter_count());
    for (int l = 0; l < layout_.layer_count(); ++l) {
        const int fi = layout_.fan_in(l), fo = layout_.fan_out(l);
        const bool last = l == layout_.layer_count() - 1;
        const double limit = last ? std::sqrt(6.0 / (fi + fo)) : std::sqrt(6.0 / fi);
        for (int64_t k = 0; k < int64_t(fi) * fo; ++k)
            params_[offsets_[l] + k] = (2 * init.uniform() - 1) * limit;
    }
}

Mlp::Mlp(MlpLayout layout, Eigen::VectorXd parameters) : layout_(std::move(layout)), params_(std::move(parameters)) {
    check_layout(layout_);
    require(params_.size() == layout_.parameter_count(), "parameter vector does not match MLP layout");
    offsets_ = layer_offsets(layout_);
}

Mlp::LayerView Mlp::layer(int l) const {
    const int fi = layout_.fan_in(l), fo = layout_.fan_out(l);
    const double *base = params_.data() + offsets_[l];
    return {Eigen::Map<const Eigen::MatrixXd>(base, fo, fi),
            Eigen::Map<const Eigen::VectorXd>(base + int64_t(fo) * fi, fo)};
}

void Mlp::zero_output_layer() {
    const int l = layout_.layer_count() - 1;
    params_.segment(offsets_[l], int64_t(layout_.fan_out(l)) * (layout_.fan_in(l) + 1)).setZero();
}

double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0)
        return 1 / (1 + std::exp(-x));
    double e = std::exp(x);
    return e / (1 + e);
}

namespace {

Eigen::MatrixXd apply_output(OutputActivation act, const Eigen::MatrixXd &pre) {
    if (act == OutputActivation::kSoftplus)
        return pre.unaryExpr([](double x) { return softplus(x); });
    return pre.unaryExpr([](double x) { return sigmoid(x); });
}

}  // namespace

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd &inputs) const {
    require(inputs.rows() == layout_.inputs, "MLP input width mismatch");
    Eigen::MatrixXd a = inputs;
    const int last = layout_.layer_count() - 1;
    for (int l = 0; l < last; ++l) {
        auto [w, b] = layer(l);
        Eigen::MatrixXd z = w * a;
        z.colwise() += b;
        a = z.cwiseMax(0.0);
    }
    auto [w, b] = layer(last);
    Eigen::MatrixXd z = w * a;
    z.colwise() += b;
    return apply_output(layout_.activation, z);
}

const Eigen::MatrixXd &Mlp::forward(const Eigen::MatrixXd &inputs, Tape &tape) const {
    require(inputs.rows() == layout_.inputs, "MLP input width mismatch");
    const int last = layout_.layer_count() - 1;
    tape.activations.resize(last + 1);
    tape.activations[0] = inputs;
    for (int l = 0; l < last; ++l) {
        auto [w, b] = layer(l);
        Eigen::MatrixXd z = w * tape.activations[l];
        z.colwise() += b;
        tape.activations[l + 1] = z.cwiseMax(0.0);
    }
    auto [w, b] = layer(last);
    tape.pre_output = w * tape.activations[last];
    tape.pre_output.colwise() += b;
    tape.output = apply_output(layout_.activation, tape.pre_output);
    return tape.output;
}

void Mlp::backward(const Tape &tape, const Eigen::MatrixXd &grad_output, Eigen::VectorXd &grad) const {
    require(grad.size() == params_.size(), "gradient vector does not match MLP layout");
    require(grad_output.rows() == tape.output.rows() && grad_output.cols() == tape.output.cols(),
            "output gradient shape mismatch");

    Eigen::MatrixXd delta;
    if (layout_.activation == OutputActivation::kSoftplus)
        delta = grad_output.cwiseProduct(tape.pre_output.unaryExpr([](double x) { return sigmoid(x); }));
    else
        delta = grad_output.cwiseProduct(tape.output.unaryExpr([](double s) { return s * (1 - s); }));

    for (int l = layout_.layer_count() - 1; l >= 0; --l) {
        const int fi = layout_.fan_in(l), fo = layout_.fan_out(l);
        const Eigen::MatrixXd &a = tape.activations[l];
        Eigen::Map<Eigen::MatrixXd> dw(grad.data() + offsets_[l], fo, fi);
        Eigen::Map<Eigen::VectorXd> db(grad.data() + offsets_[l] + int64_t(fo) * fi, fo);
        dw.noalias() += delta * a.transpose();
        db += delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = layer(l).weight.transpose() * delta;
            // ReLU derivative: active where the stored post-activation is positive.
            delta = back.cwiseProduct((a.array() > 0.0).cast<double>().matrix());
        }
    }
}

Adam::Adam(int64_t size, double beta1, double beta2, double epsilon)
    : beta1_(beta1), beta2_(beta2), epsilon_(epsilon), m_(Eigen::VectorXd::Zero(size)),
      v_(Eigen::VectorXd::Zero(size)) {}

void Adam::step(Eigen::VectorXd &params, const Eigen::VectorXd &grad, double learning_rate) {
    ++t_;
    m_ = beta1_ * m_ + (1 - beta1_) * grad;
    v_ = beta2_ * v_ + (1 - beta2_) * grad.cwiseAbs2();
    double c1 = 1 - std::pow(beta1_, double(t_));
    double c2 = 1 - std::pow(beta2_, double(t_));
    params.array() -= learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + epsilon_);
}

double warmup_exponential_lr(int64_t step, int64_t total_steps, int64_t warmup_steps, double peak,
                             double final_ratio) {
    if (step < warmup_steps)
        return peak * double(step + 1) / double(warmup_steps);
    int64_t decay_span = std::max<int64_t>(1, total_steps - warmup_steps);
    double progress = std::clamp(double(step - warmup_steps) / double(decay_span), 0.0, 1.0);
    return peak * std::pow(final_ratio, progress);
}

}  // namespace ssibl
