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

#ifndef ERTRL_REPRESENTATION_H_
#define ERTRL_REPRESENTATION_H_

#include <span>
#include <vector>

#include "ertrl/datasets.h"
#include "ertrl/nn.h"

namespace ertrl {

struct EncoderLossConfig {
  double lambda_dml = 0.5;
  double beta = 1.0;
  double epsilon0 = 1e-3;
  bool mi_enabled = true;

  void Validate() const;
};

// Encoder input features of one stored row (done flag excluded).
nn::Matrix TransitionFeatures(const TransitionTable& rows);

// Per-transition MLP with tanh output, mean-pooled over a context.
//
// Contexts are pooled in a canonical order: rows are sorted
// lexicographically before the forward pass, and embeddings are summed
// with bottom-up pairwise addition. A context therefore maps to the same
// bits under any row permutation, and duplicating every row leaves the
// mean unchanged.
class ContextEncoder {
 public:
  ContextEncoder() = default;
  ContextEncoder(int latent_dim, const std::vector<int>& hidden, Rng& rng);

  // Recorded pass over one context, for backpropagation.
  struct Pass {
    nn::Tape tape;
    Eigen::Index rows = 0;
  };

  nn::RowVector EncodeTransition(const Transition& transition) const;
  // One embedding per row, no pooling.
  nn::Matrix EncodeRows(const TransitionTable& rows) const;

  nn::RowVector EncodeContext(const ContextBatch& context) const;
  nn::RowVector EncodeContext(const TransitionTable& rows, Pass* pass = nullptr) const;

  // Accumulates parameter gradients given d(loss)/d(z) of one pooled context.
  void BackwardContext(const Pass& pass, const nn::RowVector& d_z,
                       nn::Gradients* grads) const;

  int latent_dim() const { return net_.output_dim(); }
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  nn::Mlp net_;
};

// Bottom-up pairwise column sums of `rows`.
nn::RowVector PairwiseColumnSum(const nn::Matrix& rows);

// Mean over all unordered pairs (i < j) of
//   ||z_i - z_j||^2                     if task_ids[i] == task_ids[j]
//   beta / (||z_i - z_j||^2 + eps0)     otherwise.
// When `grad` is non-null it receives d(loss)/d(z), same shape as z.
double DmlLoss(const nn::Matrix& z, std::span<const int> task_ids,
               const EncoderLossConfig& config, nn::Matrix* grad = nullptr);

// L = L_MI * [mi_enabled] + lambda * L_DML.
double EncoderLoss(double mi_loss, double dml_loss, const EncoderLossConfig& config);

}  // namespace ertrl

#endif  // ERTRL_REPRESENTATION_H_
