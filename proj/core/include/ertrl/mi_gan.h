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

#ifndef ERTRL_MI_GAN_H_
#define ERTRL_MI_GAN_H_

#include <cstdint>
#include <vector>

#include "ertrl/nn.h"

namespace ertrl {

inline constexpr double kCovarianceJitter = 1e-5;
inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr int kDefaultNoiseDim = 20;

// G(s, z, eps) -> action in (-1, 1)^k.
class Generator {
 public:
  Generator() = default;
  Generator(int state_dim, int latent_dim, int action_dim, int noise_dim,
            const std::vector<int>& hidden, Rng& rng);

  // states, z and noise share the row count (one z row per state row).
  nn::Matrix Generate(const nn::Matrix& states, const nn::Matrix& z,
                      const nn::Matrix& noise, nn::Tape* tape = nullptr) const;

  // Returns d(loss)/d(z) given d(loss)/d(actions) of a recorded pass.
  nn::Matrix Backward(const nn::Tape& tape, const nn::Matrix& d_actions,
                      nn::Gradients* grads) const;

  int state_dim() const { return state_dim_; }
  int latent_dim() const { return latent_dim_; }
  int noise_dim() const { return noise_dim_; }
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  nn::Mlp net_;
  int state_dim_ = 0;
  int latent_dim_ = 0;
  int noise_dim_ = 0;
};

// D(a, s, z) = P(a is a dataset action). The network emits a logit.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(int action_dim, int state_dim, int latent_dim,
                const std::vector<int>& hidden, Rng& rng);

  nn::Matrix Logits(const nn::Matrix& actions, const nn::Matrix& states,
                    const nn::Matrix& z, nn::Tape* tape = nullptr) const;
  // Squashed and clamped to [1e-7, 1 - 1e-7].
  nn::Vector Probability(const nn::Matrix& actions, const nn::Matrix& states,
                         const nn::Matrix& z) const;

  // Returns d(loss)/d(actions) given d(loss)/d(logits).
  nn::Matrix Backward(const nn::Tape& tape, const nn::Matrix& d_logits,
                      nn::Gradients* grads) const;

  int action_dim() const { return action_dim_; }
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  nn::Mlp net_;
  int action_dim_ = 0;
};

double ClampProbability(double p);

// Mean of -log D(real) - log(1 - D(fake)) over matched rows.
double DiscriminatorLossFromProbabilities(const nn::Vector& p_real,
                                          const nn::Vector& p_fake);
// Non-saturating generator objective: mean of -log D(fake).
double GeneratorLossFromProbabilities(const nn::Vector& p_fake);

double DiscriminatorLoss(const Discriminator& d, const nn::Matrix& real_actions,
                         const nn::Matrix& fake_actions, const nn::Matrix& states,
                         const nn::Matrix& z);
double GeneratorLoss(const Discriminator& d, const nn::Matrix& fake_actions,
                     const nn::Matrix& states, const nn::Matrix& z);

struct CovarianceEstimate {
  nn::Matrix sigma;
  std::int64_t sample_count = 0;
  double jitter = kCovarianceJitter;
};

// Population (1/N) covariance of the action rows. Jitter is recorded, not added.
CovarianceEstimate SampleCovariance(const nn::Matrix& actions);

// 0.5 * log det(sigma) + (k / 2) * log(2 pi e). Falls back to
// log det(sigma + jitter I) when sigma is not positive definite.
double EntropyEstimate(const CovarianceEstimate& cov);

// -0.5 * log det(Sigma + 1e-5 I) of the batch covariance. When `grad` is
// non-null it receives d(loss)/d(actions).
double MiLoss(const nn::Matrix& actions, nn::Matrix* grad = nullptr);

// Finite world for checking the meta-behavior entropy reduction: tasks
// with prior probabilities, a state distribution, tabular behavior policies
// behavior[task][state][action] and a deterministic encoder task -> z index.
struct DiscreteTaskWorld {
  std::vector<double> task_prob;
  std::vector<double> state_prob;
  std::vector<std::vector<std::vector<double>>> behavior;
  std::vector<int> encoder;

  int latent_count() const;
  void Validate() const;
};

// pi_hat(a | s, z): the behavior mixture of the tasks that encode to z.
// Indexed [z][state][action]; rows of unused z are zero.
std::vector<std::vector<std::vector<double>>> MetaBehaviorPolicy(
    const DiscreteTaskWorld& world);

// E_{p(s), p(z)} [H(pi_hat(a | s, z))] in nats.
double ExpectedMetaBehaviorEntropy(const DiscreteTaskWorld& world);

struct GanOptions {
  std::vector<int> generator_hidden = {200, 200, 200};
  std::vector<int> discriminator_hidden = {256, 256};
  int noise_dim = kDefaultNoiseDim;
  double learning_rate = 3e-4;
};

struct GanUpdateStats {
  double discriminator_loss = 0.0;
  double generator_loss = 0.0;
};

// Generator/discriminator pair with their optimizers; models the
// meta-behavior policy pi(a | s, z).
class ConditionalGan {
 public:
  ConditionalGan() = default;
  ConditionalGan(int state_dim, int latent_dim, int action_dim,
                 const GanOptions& options, Rng& rng);

  // One discriminator step followed by one generator step on fresh noise.
  // z rows are treated as constants.
  GanUpdateStats Update(const nn::Matrix& states, const nn::Matrix& z,
                        const nn::Matrix& real_actions, Rng& rng);

  Generator& generator() { return generator_; }
  const Generator& generator() const { return generator_; }
  Discriminator& discriminator() { return discriminator_; }
  const Discriminator& discriminator() const { return discriminator_; }
  nn::Adam& generator_optimizer() { return g_opt_; }
  nn::Adam& discriminator_optimizer() { return d_opt_; }
  const nn::Adam& generator_optimizer() const { return g_opt_; }
  const nn::Adam& discriminator_optimizer() const { return d_opt_; }

 private:
  Generator generator_;
  Discriminator discriminator_;
  nn::Adam g_opt_;
  nn::Adam d_opt_;
};

}  // namespace ertrl

#endif  // ERTRL_MI_GAN_H_
