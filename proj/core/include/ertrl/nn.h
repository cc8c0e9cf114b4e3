// Copyright 2026 The ertrl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ERTRL_NN_H_
#define ERTRL_NN_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ertrl/rng.h"

namespace ertrl::nn {

// Batches are row-major in the sense that each row is one sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class Activation { kIdentity, kRelu, kTanh, kSigmoid };

struct DenseLayer {
  Matrix weight;  // in x out
  RowVector bias;  // 1 x out
};

// Parameter-shaped accumulator for one network.
struct Gradients {
  std::vector<DenseLayer> layers;

  void SetZero();
  Vector Flatten() const;
};

// Activations recorded during a forward pass. inputs[l] is the input of
// layer l; inputs.back() is the network output.
struct Tape {
  std::vector<Matrix> inputs;

  const Matrix& output() const { return inputs.back(); }
};

// Fully connected network: ReLU hidden layers and a configurable output
// activation. Weights and biases are initialized U(-1/sqrt(fan_in),
// 1/sqrt(fan_in)).
class Mlp {
 public:
  Mlp() = default;
  Mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
      Activation output_activation, Rng& rng);

  Matrix Forward(const Matrix& x) const;
  Matrix Forward(const Matrix& x, Tape* tape) const;

  // Backpropagates d(loss)/d(output) through a recorded pass. Parameter
  // gradients are accumulated into `grads` (skipped when null). Returns
  // d(loss)/d(input).
  Matrix Backward(const Tape& tape, const Matrix& d_output,
                  Gradients* grads) const;

  Gradients ZeroGradients() const;

  int input_dim() const;
  int output_dim() const;
  Eigen::Index parameter_count() const;
  Activation output_activation() const { return output_activation_; }

  Vector Flatten() const;
  void Unflatten(const Vector& flat);

  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
  Activation output_activation_ = Activation::kIdentity;
};

struct AdamOptions {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First-order adaptive-moment optimizer with bias correction.
class Adam {
 public:
  Adam() = default;
  Adam(const Mlp& net, AdamOptions options);

  void Step(Mlp* net, const Gradients& grads);

  std::int64_t step_count() const { return step_count_; }
  const AdamOptions& options() const { return options_; }
  void set_learning_rate(double lr) { options_.learning_rate = lr; }

  // Flat moment vectors, for checkpoints.
  Vector first_moment() const;
  Vector second_moment() const;
  void Restore(const Vector& m, const Vector& v, std::int64_t step_count);

 private:
  AdamOptions options_;
  Gradients m_;
  Gradients v_;
  std::int64_t step_count_ = 0;
};

// Elementwise target <- tau * online + (1 - tau) * target.
void SoftUpdate(const Mlp& online, double tau, Mlp* target);

// Row-wise concatenation helper: [a | b | ...].
Matrix ConcatColumns(std::initializer_list<const Matrix*> blocks);

}  // namespace ertrl::nn

#endif  // ERTRL_NN_H_
