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

#ifndef ERTRL_AGENT_H_
#define ERTRL_AGENT_H_

#include <vector>

#include "ertrl/datasets.h"
#include "ertrl/nn.h"

namespace ertrl {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;
// Dataset actions are clipped to +/- this before atanh for the behavior model.
inline constexpr double kBehaviorActionLimit = 0.999;

struct AgentConfig {
  double alpha = 50.0;
  double gamma = 0.99;
  double tau = 0.005;

  void Validate() const;
};

struct AgentOptions {
  std::vector<int> actor_hidden = {256, 256, 256};
  std::vector<int> critic_hidden = {256, 256, 256};
  std::vector<int> behavior_hidden = {256, 256, 256};
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  double behavior_lr = 3e-4;
};

// Training rows with their task representation broadcast per row.
struct AgentBatch {
  nn::Matrix states;
  nn::Matrix actions;
  nn::Matrix rewards;  // N x 1
  nn::Matrix next_states;
  nn::Matrix dones;  // N x 1, 0/1
  nn::Matrix z;

  Eigen::Index size() const { return states.rows(); }
};

AgentBatch MakeAgentBatch(const TransitionTable& rows, const nn::RowVector& z);
// Concatenates per-task batches.
AgentBatch StackBatches(const std::vector<AgentBatch>& parts);

// Pre-squash diagonal Gaussian per row.
struct GaussianHeads {
  nn::Matrix mean;
  nn::Matrix log_std;  // clamped
  nn::Matrix raw_log_std;  // before clamping

  nn::Matrix std() const { return log_std.array().exp().matrix(); }
};

// Network emitting [mean | log_std] for s || z.
class GaussianPolicyNet {
 public:
  GaussianPolicyNet() = default;
  GaussianPolicyNet(int state_dim, int latent_dim, int action_dim,
                    const std::vector<int>& hidden, Rng& rng);

  GaussianHeads Heads(const nn::Matrix& states, const nn::Matrix& z,
                      nn::Tape* tape = nullptr) const;
  // Backpropagates d(loss)/d(mean) and d(loss)/d(clamped log_std); the
  // log-std gradient is zeroed where the clamp is active.
  void Backward(const nn::Tape& tape, const GaussianHeads& heads,
                const nn::Matrix& d_mean, const nn::Matrix& d_log_std,
                nn::Gradients* grads) const;

  int action_dim() const { return action_dim_; }
  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  nn::Mlp net_;
  int action_dim_ = 0;
};

// Tanh-squashed Gaussian actor pi(a | s, z).
class Actor : public GaussianPolicyNet {
 public:
  using GaussianPolicyNet::GaussianPolicyNet;

  // Squashed mean (deterministic) or squashed reparameterized sample.
  nn::Matrix Act(const nn::Matrix& states, const nn::Matrix& z, bool deterministic,
                 Rng& rng) const;
  // tanh(mean + std * noise) with caller-supplied noise.
  nn::Matrix Sample(const GaussianHeads& heads, const nn::Matrix& noise) const;
};

// Maximum-likelihood diagonal Gaussian over pre-squash dataset actions.
class BehaviorModel : public GaussianPolicyNet {
 public:
  using GaussianPolicyNet::GaussianPolicyNet;
};

// Q(s, z, a).
class Critic {
 public:
  Critic() = default;
  Critic(int state_dim, int latent_dim, int action_dim, const std::vector<int>& hidden,
         Rng& rng);

  nn::Matrix Q(const nn::Matrix& states, const nn::Matrix& z,
               const nn::Matrix& actions, nn::Tape* tape = nullptr) const;
  // Returns d(loss)/d(actions) given d(loss)/d(Q).
  nn::Matrix Backward(const nn::Tape& tape, const nn::Matrix& d_q,
                      nn::Gradients* grads) const;

  nn::Mlp& network() { return net_; }
  const nn::Mlp& network() const { return net_; }

 private:
  nn::Mlp net_;
  int state_dim_ = 0;
  int latent_dim_ = 0;
};

// Closed-form KL(p || q) of diagonal Gaussians, summed over dimensions.
double KlDiagGaussian(const nn::Vector& p_mean, const nn::Vector& p_std,
                      const nn::Vector& q_mean, const nn::Vector& q_std);

// mean (Q(s, a, z) - y)^2 with y = r + gamma (1 - done) Qbar(s', a', z) and
// a' = tanh(mu' + sigma' * next_noise) from the actor. The target carries no
// gradient. Gradients w.r.t. the online critic go to `grads` when non-null.
double CriticLoss(const Critic& critic, const Critic& target, const Actor& actor,
                  const AgentBatch& batch, const AgentConfig& config,
                  const nn::Matrix& next_noise, nn::Gradients* grads);

struct ActorLossTerms {
  double q_term = 0.0;  // -E[Q]
  double kl = 0.0;  // E[KL], before alpha
};

// -E[Q(s, a~, z)] + alpha * E[KL(pi || pi_b)] with a~ = tanh(mu + sigma * noise).
double ActorLoss(const Actor& actor, const Critic& critic, const BehaviorModel& behavior,
                 const nn::Matrix& states, const nn::Matrix& z,
                 const AgentConfig& config, const nn::Matrix& noise,
                 nn::Gradients* grads, ActorLossTerms* terms = nullptr);

// Gaussian negative log-likelihood of atanh(clipped action), mean over rows.
double BehaviorLoss(const BehaviorModel& behavior, const nn::Matrix& states,
                    const nn::Matrix& z, const nn::Matrix& actions,
                    nn::Gradients* grads);

// target <- tau * online + (1 - tau) * target. Requires tau in [0, 1].
void EmaUpdate(const nn::Mlp& online, double tau, nn::Mlp* target);

struct AgentUpdateStats {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double kl = 0.0;
  double behavior_loss = 0.0;
};

class Agent {
 public:
  Agent() = default;
  Agent(int state_dim, int latent_dim, int action_dim, const AgentOptions& options,
        const AgentConfig& config, Rng& rng);

  // Critic, behavior model, actor, then the target EMA.
  AgentUpdateStats Update(const AgentBatch& batch, Rng& rng);

  Action Act(const State& observation, const nn::RowVector& z, bool deterministic,
             Rng& rng) const;

  const AgentConfig& config() const { return config_; }
  void set_config(const AgentConfig& config) { config_ = config; }

  Actor& actor() { return actor_; }
  const Actor& actor() const { return actor_; }
  Critic& critic() { return critic_; }
  const Critic& critic() const { return critic_; }
  Critic& target_critic() { return target_critic_; }
  const Critic& target_critic() const { return target_critic_; }
  BehaviorModel& behavior() { return behavior_; }
  const BehaviorModel& behavior() const { return behavior_; }
  nn::Adam& actor_optimizer() { return actor_opt_; }
  nn::Adam& critic_optimizer() { return critic_opt_; }
  nn::Adam& behavior_optimizer() { return behavior_opt_; }
  const nn::Adam& actor_optimizer() const { return actor_opt_; }
  const nn::Adam& critic_optimizer() const { return critic_opt_; }
  const nn::Adam& behavior_optimizer() const { return behavior_opt_; }

 private:
  AgentConfig config_;
  Actor actor_;
  Critic critic_;
  Critic target_critic_;
  BehaviorModel behavior_;
  nn::Adam actor_opt_;
  nn::Adam critic_opt_;
  nn::Adam behavior_opt_;
};

}  // namespace ertrl

#endif  // ERTRL_AGENT_H_
