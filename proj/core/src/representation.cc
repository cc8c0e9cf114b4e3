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

#include "ertrl/representation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ertrl/errors.h"

namespace ertrl {

void EncoderLossConfig::Validate() const {
  if (!(lambda_dml >= 0.0)) throw ConfigError("lambda_dml must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("dml beta must be > 0");
  if (!(epsilon0 > 0.0)) throw ConfigError("dml epsilon0 must be > 0");
}

nn::Matrix TransitionFeatures(const TransitionTable& rows) {
  nn::Matrix x = rows.leftCols<kTransitionFeatureDim>().cast<double>();
  if (!x.allFinite()) {
    throw std::invalid_argument("context encoder: non-finite transition input");
  }
  return x;
}

nn::RowVector PairwiseColumnSum(const nn::Matrix& rows) {
  if (rows.rows() == 0) return nn::RowVector::Zero(rows.cols());
  nn::Matrix level = rows;
  while (level.rows() > 1) {
    const Eigen::Index half = level.rows() / 2;
    const bool odd = level.rows() % 2 != 0;
    nn::Matrix next(half + (odd ? 1 : 0), level.cols());
    for (Eigen::Index i = 0; i < half; ++i) {
      next.row(i) = level.row(2 * i) + level.row(2 * i + 1);
    }
    if (odd) next.row(half) = level.row(level.rows() - 1);
    level = std::move(next);
  }
  return level.row(0);
}

ContextEncoder::ContextEncoder(int latent_dim, const std::vector<int>& hidden,
                               Rng& rng)
    : net_(kTransitionFeatureDim, hidden, latent_dim, nn::Activation::kTanh, rng) {}

nn::RowVector ContextEncoder::EncodeTransition(const Transition& transition) const {
  return EncodeRows(ToTable({transition})).row(0);
}

nn::Matrix ContextEncoder::EncodeRows(const TransitionTable& rows) const {
  return net_.Forward(TransitionFeatures(rows));
}

nn::RowVector ContextEncoder::EncodeContext(const ContextBatch& context) const {
  return EncodeContext(context.transitions);
}

nn::RowVector ContextEncoder::EncodeContext(const TransitionTable& rows,
                                            Pass* pass) const {
  const Eigen::Index n = rows.rows();
  if (n == 0) throw std::invalid_argument("EncodeContext: empty context");
  const nn::Matrix features = TransitionFeatures(rows);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&features](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < features.cols(); ++k) {
      if (features(a, k) != features(b, k)) return features(a, k) < features(b, k);
    }
    return false;
  });
  nn::Matrix sorted(n, features.cols());
  for (Eigen::Index i = 0; i < n; ++i) sorted.row(i) = features.row(order[i]);

  nn::Matrix embeddings;
  if (pass != nullptr) {
    embeddings = net_.Forward(sorted, &pass->tape);
    pass->rows = n;
  } else {
    embeddings = net_.Forward(sorted);
  }
  return PairwiseColumnSum(embeddings) / static_cast<double>(n);
}

void ContextEncoder::BackwardContext(const Pass& pass, const nn::RowVector& d_z,
                                     nn::Gradients* grads) const {
  if (d_z.size() != latent_dim()) {
    throw std::invalid_argument("BackwardContext: gradient size mismatch");
  }
  nn::Matrix d_embeddings =
      d_z.replicate(pass.rows, 1) / static_cast<double>(pass.rows);
  net_.Backward(pass.tape, d_embeddings, grads);
}

double DmlLoss(const nn::Matrix& z, std::span<const int> task_ids,
               const EncoderLossConfig& config, nn::Matrix* grad) {
  const Eigen::Index n = z.rows();
  if (n < 2) throw std::invalid_argument("DmlLoss: need at least two representations");
  if (static_cast<Eigen::Index>(task_ids.size()) != n) {
    throw std::invalid_argument("DmlLoss: task id count does not match rows");
  }
  if (!(config.beta > 0.0) || !(config.epsilon0 > 0.0)) {
    throw std::invalid_argument("DmlLoss: beta and epsilon0 must be positive");
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  if (grad != nullptr) grad->setZero(n, z.cols());

  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const nn::RowVector diff = z.row(i) - z.row(j);
      const double d2 = diff.squaredNorm();
      double coeff = 0.0;  // d(term)/d(d2)
      if (task_ids[i] == task_ids[j]) {
        total += d2;
        coeff = 1.0;
      } else {
        const double denom = d2 + config.epsilon0;
        total += config.beta / denom;
        coeff = -config.beta / (denom * denom);
      }
      if (grad != nullptr) {
        grad->row(i) += (2.0 * coeff / pairs) * diff;
        grad->row(j) -= (2.0 * coeff / pairs) * diff;
      }
    }
  }
  return total / pairs;
}

double EncoderLoss(double mi_loss, double dml_loss, const EncoderLossConfig& config) {
  const double mi = config.mi_enabled ? mi_loss : 0.0;
  return mi + config.lambda_dml * dml_loss;
}

}  // namespace ertrl
