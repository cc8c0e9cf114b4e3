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

#include "ertrl/nn.h"

#include <cmath>
#include <stdexcept>

namespace ertrl::nn {
namespace {

void ApplyActivation(Activation act, Matrix* x) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      *x = x->cwiseMax(0.0);
      break;
    case Activation::kTanh:
      *x = x->array().tanh().matrix();
      break;
    case Activation::kSigmoid:
      *x = (1.0 / (1.0 + (-x->array()).exp())).matrix();
      break;
  }
}

// Multiplies `delta` in place by the activation derivative, expressed in
// terms of the activation output y.
void ActivationBackward(Activation act, const Matrix& y, Matrix* delta) {
  switch (act) {
    case Activation::kIdentity:
      break;
    case Activation::kRelu:
      *delta = (y.array() > 0.0).select(delta->array(), 0.0).matrix();
      break;
    case Activation::kTanh:
      delta->array() *= 1.0 - y.array().square();
      break;
    case Activation::kSigmoid:
      delta->array() *= y.array() * (1.0 - y.array());
      break;
  }
}

}  // namespace

void Gradients::SetZero() {
  for (auto& layer : layers) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

Vector Gradients::Flatten() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers) n += layer.weight.size() + layer.bias.size();
  Vector flat(n);
  Eigen::Index offset = 0;
  for (const auto& layer : layers) {
    flat.segment(offset, layer.weight.size()) = layer.weight.reshaped();
    offset += layer.weight.size();
    flat.segment(offset, layer.bias.size()) = layer.bias.transpose();
    offset += layer.bias.size();
  }
  return flat;
}

Mlp::Mlp(int input_dim, const std::vector<int>& hidden, int output_dim,
         Activation output_activation, Rng& rng)
    : output_activation_(output_activation) {
  if (input_dim <= 0 || output_dim <= 0) {
    throw std::invalid_argument("Mlp: dimensions must be positive");
  }
  std::vector<int> dims;
  dims.push_back(input_dim);
  for (int h : hidden) {
    if (h <= 0) throw std::invalid_argument("Mlp: hidden width must be positive");
    dims.push_back(h);
  }
  dims.push_back(output_dim);

  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(dims[l]));
    std::uniform_real_distribution<double> init(-bound, bound);
    DenseLayer layer;
    layer.weight.resize(dims[l], dims[l + 1]);
    layer.bias.resize(dims[l + 1]);
    for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) {
        layer.weight(i, j) = init(rng);
      }
    }
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias(j) = init(rng);
    layers_.push_back(std::move(layer));
  }
}

Matrix Mlp::Forward(const Matrix& x) const { return Forward(x, nullptr); }

Matrix Mlp::Forward(const Matrix& x, Tape* tape) const {
  if (x.cols() != input_dim()) {
    throw std::invalid_argument("Mlp::Forward: expected " +
                                std::to_string(input_dim()) + " input columns, got " +
                                std::to_string(x.cols()));
  }
  if (tape != nullptr) {
    tape->inputs.clear();
    tape->inputs.reserve(layers_.size() + 1);
    tape->inputs.push_back(x);
  }
  Matrix h = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix next = h * layers_[l].weight;
    next.rowwise() += layers_[l].bias;
    const bool last = l + 1 == layers_.size();
    ApplyActivation(last ? output_activation_ : Activation::kRelu, &next);
    if (tape != nullptr) tape->inputs.push_back(next);
    h = std::move(next);
  }
  return h;
}

Matrix Mlp::Backward(const Tape& tape, const Matrix& d_output,
                     Gradients* grads) const {
  if (tape.inputs.size() != layers_.size() + 1) {
    throw std::invalid_argument("Mlp::Backward: tape does not match network");
  }
  if (d_output.rows() != tape.output().rows() ||
      d_output.cols() != tape.output().cols()) {
    throw std::invalid_argument("Mlp::Backward: gradient shape mismatch");
  }
  Matrix delta = d_output;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const bool last = l + 1 == layers_.size();
    ActivationBackward(last ? output_activation_ : Activation::kRelu,
                       tape.inputs[l + 1], &delta);
    if (grads != nullptr) {
      grads->layers[l].weight.noalias() += tape.inputs[l].transpose() * delta;
      grads->layers[l].bias += delta.colwise().sum();
    }
    delta = delta * layers_[l].weight.transpose();
  }
  return delta;
}

Gradients Mlp::ZeroGradients() const {
  Gradients g;
  g.layers.reserve(layers_.size());
  for (const auto& layer : layers_) {
    g.layers.push_back({Matrix::Zero(layer.weight.rows(), layer.weight.cols()),
                        RowVector::Zero(layer.bias.size())});
  }
  return g;
}

int Mlp::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.rows());
}

int Mlp::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.cols());
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

Vector Mlp::Flatten() const {
  Gradients view{layers_};
  return view.Flatten();
}

void Mlp::Unflatten(const Vector& flat) {
  if (flat.size() != parameter_count()) {
    throw std::invalid_argument("Mlp::Unflatten: expected " +
                                std::to_string(parameter_count()) + " values, got " +
                                std::to_string(flat.size()));
  }
  Eigen::Index offset = 0;
  for (auto& layer : layers_) {
    layer.weight.reshaped() = flat.segment(offset, layer.weight.size());
    offset += layer.weight.size();
    layer.bias = flat.segment(offset, layer.bias.size()).transpose();
    offset += layer.bias.size();
  }
}

Adam::Adam(const Mlp& net, AdamOptions options)
    : options_(options), m_(net.ZeroGradients()), v_(net.ZeroGradients()) {}

void Adam::Step(Mlp* net, const Gradients& grads) {
  auto& layers = net->layers();
  if (grads.layers.size() != layers.size() || m_.layers.size() != layers.size()) {
    throw std::invalid_argument("Adam::Step: gradient/network mismatch");
  }
  ++step_count_;
  const double t = static_cast<double>(step_count_);
  const double c1 = 1.0 - std::pow(options_.beta1, t);
  const double c2 = 1.0 - std::pow(options_.beta2, t);
  const double lr = options_.learning_rate;
  const double b1 = options_.beta1;
  const double b2 = options_.beta2;
  const double eps = options_.epsilon;

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m.array() = b1 * m.array() + (1.0 - b1) * g.array();
    v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
    param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weight, grads.layers[l].weight, m_.layers[l].weight,
           v_.layers[l].weight);
    update(layers[l].bias, grads.layers[l].bias, m_.layers[l].bias,
           v_.layers[l].bias);
  }
}

Vector Adam::first_moment() const { return m_.Flatten(); }
Vector Adam::second_moment() const { return v_.Flatten(); }

void Adam::Restore(const Vector& m, const Vector& v, std::int64_t step_count) {
  auto restore = [](const Vector& flat, Gradients* g) {
    Eigen::Index n = 0;
    for (const auto& layer : g->layers) n += layer.weight.size() + layer.bias.size();
    if (flat.size() != n) {
      throw std::invalid_argument("Adam::Restore: moment size mismatch");
    }
    Eigen::Index offset = 0;
    for (auto& layer : g->layers) {
      layer.weight.reshaped() = flat.segment(offset, layer.weight.size());
      offset += layer.weight.size();
      layer.bias = flat.segment(offset, layer.bias.size()).transpose();
      offset += layer.bias.size();
    }
  };
  restore(m, &m_);
  restore(v, &v_);
  step_count_ = step_count;
}

void SoftUpdate(const Mlp& online, double tau, Mlp* target) {
  auto& dst = target->layers();
  const auto& src = online.layers();
  if (dst.size() != src.size()) {
    throw std::invalid_argument("SoftUpdate: network shape mismatch");
  }
  for (std::size_t l = 0; l < src.size(); ++l) {
    if (dst[l].weight.rows() != src[l].weight.rows() ||
        dst[l].weight.cols() != src[l].weight.cols()) {
      throw std::invalid_argument("SoftUpdate: layer shape mismatch");
    }
  }
  if (tau == 1.0) {
    dst = src;
    return;
  }
  for (std::size_t l = 0; l < src.size(); ++l) {
    dst[l].weight = tau * src[l].weight + (1.0 - tau) * dst[l].weight;
    dst[l].bias = tau * src[l].bias + (1.0 - tau) * dst[l].bias;
  }
}

Matrix ConcatColumns(std::initializer_list<const Matrix*> blocks) {
  Eigen::Index rows = -1;
  Eigen::Index cols = 0;
  for (const Matrix* b : blocks) {
    if (rows >= 0 && b->rows() != rows) {
      throw std::invalid_argument("ConcatColumns: row count mismatch");
    }
    rows = b->rows();
    cols += b->cols();
  }
  Matrix out(rows < 0 ? 0 : rows, cols);
  Eigen::Index offset = 0;
  for (const Matrix* b : blocks) {
    out.middleCols(offset, b->cols()) = *b;
    offset += b->cols();
  }
  return out;
}

}  // namespace ertrl::nn
