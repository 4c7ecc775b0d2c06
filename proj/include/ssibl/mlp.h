// Copyright 2026 The ssibl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ssibl/rng.h"

namespace ssibl {

enum class OutputActivation : uint32_t {
    kSoftplus = 0,  // (0, inf)
    kSigmoid = 1,   // (0, 1)
};

struct MlpLayout {
    int inputs = 0;
    std::vector<int> hidden;  // widths of the ReLU layers
    int outputs = 0;
    OutputActivation activation = OutputActivation::kSoftplus;

    int layer_count() const { return static_cast<int>(hidden.size()) + 1; }
    int fan_in(int layer) const { return layer == 0 ? inputs : hidden[layer - 1]; }
    int fan_out(int layer) const { return layer == int(hidden.size()) ? outputs : hidden[layer]; }
    int64_t parameter_count() const;

    friend bool operator==(const MlpLayout &, const MlpLayout &) = default;
};

// Fully connected network with ReLU hidden layers and a bounded output head.
// All parameters live in one flat vector; layer l stores its weight matrix
// (fan_out x fan_in, column-major) followed by its bias.
//
// Batches are column-major: one sample per column.
class Mlp {
  public:
    // He-uniform hidden weights, Glorot-uniform output weights, zero biases.
    Mlp(MlpLayout layout, RngStream &init);
    Mlp(MlpLayout layout, Eigen::VectorXd parameters);

    const MlpLayout &layout() const { return layout_; }
    const Eigen::VectorXd &parameters() const { return params_; }
    Eigen::VectorXd &parameters() { return params_; }

    bool parameters_finite() const { return params_.allFinite(); }
    void zero_output_layer();

    // Intermediate values kept for the backward pass.
    struct Tape {
        std::vector<Eigen::MatrixXd> activations;  // inputs, then each hidden output
        Eigen::MatrixXd pre_output;
        Eigen::MatrixXd output;
    };

    Eigen::MatrixXd forward(const Eigen::MatrixXd &inputs) const;
    const Eigen::MatrixXd &forward(const Eigen::MatrixXd &inputs, Tape &tape) const;

    // Adds d(loss)/d(parameters) to grad given d(loss)/d(output) for the batch
    // recorded in tape.
    void backward(const Tape &tape, const Eigen::MatrixXd &grad_output, Eigen::VectorXd &grad) const;

  private:
    struct LayerView {
        Eigen::Map<const Eigen::MatrixXd> weight;
        Eigen::Map<const Eigen::VectorXd> bias;
    };
    LayerView layer(int l) const;
    int64_t offset(int l) const { return offsets_[l]; }

    MlpLayout layout_;
    Eigen::VectorXd params_;
    std::vector<int64_t> offsets_;
};

double softplus(double x);
double sigmoid(double x);

// Adam with bias correction.
class Adam {
  public:
    Adam(int64_t size, double beta1, double beta2, double epsilon = 1e-15);

    void step(Eigen::VectorXd &params, const Eigen::VectorXd &grad, double learning_rate);
    int64_t steps() const { return t_; }

  private:
    double beta1_, beta2_, epsilon_;
    Eigen::VectorXd m_, v_;
    int64_t t_ = 0;
};

// Linear warmup to peak over warmup_steps, then exponential decay reaching
// peak * final_ratio at total_steps.
double warmup_exponential_lr(int64_t step, int64_t total_steps, int64_t warmup_steps, double peak,
                             double final_ratio);

}  // namespace ssibl
