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

#include "ertrl/agent.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

// Acting keeps float actions strictly inside the open box.
constexpr float kActionLimit = 1.0f - 1e-6f;

nn::Matrix StateColumns(const TransitionTable& rows, int offset) {
  return rows.middleCols(offset, kStateDim).cast<double>();
}

}  // namespace

void AgentConfig::Validate() const {
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
}

AgentBatch MakeAgentBatch(const TransitionTable& rows, const nn::RowVector& z) {
  AgentBatch b;
  b.states = StateColumns(rows, row::kState);
  b.actions = rows.middleCols(row::kAction, kActionDim).cast<double>();
  b.rewards = rows.col(row::kReward).cast<double>();
  b.next_states = StateColumns(rows, row::kNextState);
  b.dones = rows.col(row::kDone).cast<double>();
  b.z = z.replicate(rows.rows(), 1);
  return b;
}

AgentBatch StackBatches(const std::vector<AgentBatch>& parts) {
  if (parts.empty()) throw std::invalid_argument("StackBatches: no batches");
  Eigen::Index n = 0;
  for (const auto& p : parts) n += p.size();
  AgentBatch out;
  auto alloc = [n](nn::Matrix& m, Eigen::Index cols) { m.resize(n, cols); };
  alloc(out.states, parts[0].states.cols());
  alloc(out.actions, parts[0].actions.cols());
  alloc(out.rewards, 1);
  alloc(out.next_states, parts[0].next_states.cols());
  alloc(out.dones, 1);
  alloc(out.z, parts[0].z.cols());
  Eigen::Index offset = 0;
  for (const auto& p : parts) {
    const Eigen::Index m = p.size();
    out.states.middleRows(offset, m) = p.states;
    out.actions.middleRows(offset, m) = p.actions;
    out.rewards.middleRows(offset, m) = p.rewards;
    out.next_states.middleRows(offset, m) = p.next_states;
    out.dones.middleRows(offset, m) = p.dones;
    out.z.middleRows(offset, m) = p.z;
    offset += m;
  }
  return out;
}

GaussianPolicyNet::GaussianPolicyNet(int state_dim, int latent_dim, int action_dim,
                                     const std::vector<int>& hidden, Rng& rng)
    : net_(state_dim + latent_dim, hidden, 2 * action_dim, nn::Activation::kIdentity,
           rng),
      action_dim_(action_dim) {}

GaussianHeads GaussianPolicyNet::Heads(const nn::Matrix& states, const nn::Matrix& z,
                                       nn::Tape* tape) const {
  if (states.rows() != z.rows()) {
    throw std::invalid_argument("GaussianPolicyNet: row count mismatch");
  }
  const nn::Matrix out = net_.Forward(nn::ConcatColumns({&states, &z}), tape);
  GaussianHeads h;
  h.mean = out.leftCols(action_dim_);
  h.raw_log_std = out.rightCols(action_dim_);
  h.log_std = h.raw_log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
  return h;
}

void GaussianPolicyNet::Backward(const nn::Tape& tape, const GaussianHeads& heads,
                                 const nn::Matrix& d_mean, const nn::Matrix& d_log_std,
                                 nn::Gradients* grads) const {
  nn::Matrix d_out(d_mean.rows(), 2 * action_dim_);
  d_out.leftCols(action_dim_) = d_mean;
  d_out.rightCols(action_dim_) =
      (heads.raw_log_std.array() == heads.log_std.array())
          .select(d_log_std.array(), 0.0)
          .matrix();
  net_.Backward(tape, d_out, grads);
}

nn::Matrix Actor::Sample(const GaussianHeads& heads, const nn::Matrix& noise) const {
  return (heads.mean.array() + heads.std().array() * noise.array()).tanh().matrix();
}

nn::Matrix Actor::Act(const nn::Matrix& states, const nn::Matrix& z,
                      bool deterministic, Rng& rng) const {
  const GaussianHeads heads = Heads(states, z);
  if (deterministic) return heads.mean.array().tanh().matrix();
  return Sample(heads, StandardNormal(states.rows(), action_dim(), rng));
}

Critic::Critic(int state_dim, int latent_dim, int action_dim,
               const std::vector<int>& hidden, Rng& rng)
    : net_(state_dim + latent_dim + action_dim, hidden, 1, nn::Activation::kIdentity,
           rng),
      state_dim_(state_dim),
      latent_dim_(latent_dim) {}

nn::Matrix Critic::Q(const nn::Matrix& states, const nn::Matrix& z,
                     const nn::Matrix& actions, nn::Tape* tape) const {
  if (states.rows() != z.rows() || states.rows() != actions.rows()) {
    throw std::invalid_argument("Critic: row count mismatch");
  }
  return net_.Forward(nn::ConcatColumns({&states, &z, &actions}), tape);
}

nn::Matrix Critic::Backward(const nn::Tape& tape, const nn::Matrix& d_q,
                            nn::Gradients* grads) const {
  return net_.Backward(tape, d_q, grads).rightCols(net_.input_dim() - state_dim_ -
                                                   latent_dim_);
}

double KlDiagGaussian(const nn::Vector& p_mean, const nn::Vector& p_std,
                      const nn::Vector& q_mean, const nn::Vector& q_std) {
  const Eigen::Index k = p_mean.size();
  if (p_std.size() != k || q_mean.size() != k || q_std.size() != k) {
    throw std::invalid_argument("KlDiagGaussian: dimension mismatch");
  }
  double kl = 0.0;
  for (Eigen::Index d = 0; d < k; ++d) {
    if (!(p_std(d) > 0.0) || !(q_std(d) > 0.0)) {
      throw std::invalid_argument("KlDiagGaussian: standard deviations must be positive");
    }
    const double ratio = p_std(d) / q_std(d);
    const double shift = (p_mean(d) - q_mean(d)) / q_std(d);
    kl += -std::log(ratio) + 0.5 * (ratio * ratio + shift * shift) - 0.5;
  }
  return kl;
}

double CriticLoss(const Critic& critic, const Critic& target, const Actor& actor,
                  const AgentBatch& batch, const AgentConfig& config,
                  const nn::Matrix& next_noise, nn::Gradients* grads) {
  const Eigen::Index n = batch.size();
  const GaussianHeads next_heads = actor.Heads(batch.next_states, batch.z);
  const nn::Matrix next_actions = actor.Sample(next_heads, next_noise);
  const nn::Matrix next_q = target.Q(batch.next_states, batch.z, next_actions);
  const nn::Matrix y =
      batch.rewards.array() +
      config.gamma * (1.0 - batch.dones.array()) * next_q.array();

  nn::Tape tape;
  const nn::Matrix q = critic.Q(batch.states, batch.z, batch.actions,
                                grads != nullptr ? &tape : nullptr);
  const nn::Matrix residual = q - y;
  const double loss = residual.squaredNorm() / static_cast<double>(n);
  if (grads != nullptr) {
    critic.Backward(tape, (2.0 / static_cast<double>(n)) * residual, grads);
  }
  return loss;
}

double ActorLoss(const Actor& actor, const Critic& critic, const BehaviorModel& behavior,
                 const nn::Matrix& states, const nn::Matrix& z,
                 const AgentConfig& config, const nn::Matrix& noise,
                 nn::Gradients* grads, ActorLossTerms* terms) {
  const Eigen::Index n = states.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  nn::Tape actor_tape;
  const GaussianHeads heads = actor.Heads(states, z, &actor_tape);
  const nn::Matrix sigma = heads.std();
  const nn::Matrix actions = actor.Sample(heads, noise);

  nn::Tape critic_tape;
  const nn::Matrix q = critic.Q(states, z, actions, &critic_tape);
  const double q_term = -q.mean();

  const GaussianHeads b = behavior.Heads(states, z);
  const nn::Matrix b_sigma = b.std();
  double kl_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    kl_sum += KlDiagGaussian(heads.mean.row(i).transpose(), sigma.row(i).transpose(),
                             b.mean.row(i).transpose(), b_sigma.row(i).transpose());
  }
  const double kl = kl_sum * inv_n;

  if (terms != nullptr) *terms = {q_term, kl};
  const double loss = q_term + config.alpha * kl;
  if (grads == nullptr) return loss;

  // Q path: d(-mean Q)/dQ = -1/n, through the critic to the sampled action,
  // then through tanh and the reparameterization.
  const nn::Matrix d_q = nn::Matrix::Constant(n, 1, -inv_n);
  const nn::Matrix d_actions = critic.Backward(critic_tape, d_q, nullptr);
  const nn::Matrix d_pre =
      (d_actions.array() * (1.0 - actions.array().square())).matrix();
  nn::Matrix d_mean = d_pre;
  nn::Matrix d_log_std = (d_pre.array() * sigma.array() * noise.array()).matrix();

  // KL path, behavior treated as constant.
  const auto q_var = b_sigma.array().square();
  d_mean.array() += config.alpha * inv_n * (heads.mean.array() - b.mean.array()) / q_var;
  d_log_std.array() +=
      config.alpha * inv_n * (sigma.array().square() / q_var - 1.0);

  actor.Backward(actor_tape, heads, d_mean, d_log_std, grads);
  return loss;
}

double BehaviorLoss(const BehaviorModel& behavior, const nn::Matrix& states,
                    const nn::Matrix& z, const nn::Matrix& actions,
                    nn::Gradients* grads) {
  const Eigen::Index n = states.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  nn::Tape tape;
  const GaussianHeads h = behavior.Heads(states, z, grads != nullptr ? &tape : nullptr);
  const nn::Matrix target = actions.cwiseMax(-kBehaviorActionLimit)
                                .cwiseMin(kBehaviorActionLimit)
                                .array()
                                .atanh()
                                .matrix();
  const nn::Matrix inv_var = (-2.0 * h.log_std.array()).exp().matrix();
  const nn::Matrix diff = target - h.mean;
  const double loss =
      (h.log_std.array() + 0.5 * diff.array().square() * inv_var.array()).sum() * inv_n;
  if (grads != nullptr) {
    const nn::Matrix d_mean = (-diff.array() * inv_var.array() * inv_n).matrix();
    const nn::Matrix d_log_std =
        ((1.0 - diff.array().square() * inv_var.array()) * inv_n).matrix();
    behavior.Backward(tape, h, d_mean, d_log_std, grads);
  }
  return loss;
}

void EmaUpdate(const nn::Mlp& online, double tau, nn::Mlp* target) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("EmaUpdate: tau must lie in [0, 1]");
  }
  nn::SoftUpdate(online, tau, target);
}

Agent::Agent(int state_dim, int latent_dim, int action_dim, const AgentOptions& options,
             const AgentConfig& config, Rng& rng)
    : config_(config),
      actor_(state_dim, latent_dim, action_dim, options.actor_hidden, rng),
      critic_(state_dim, latent_dim, action_dim, options.critic_hidden, rng),
      target_critic_(critic_),
      behavior_(state_dim, latent_dim, action_dim, options.behavior_hidden, rng),
      actor_opt_(actor_.network(), {.learning_rate = options.actor_lr}),
      critic_opt_(critic_.network(), {.learning_rate = options.critic_lr}),
      behavior_opt_(behavior_.network(), {.learning_rate = options.behavior_lr}) {}

AgentUpdateStats Agent::Update(const AgentBatch& batch, Rng& rng) {
  AgentUpdateStats stats;
  const Eigen::Index n = batch.size();
  const int k = actor_.action_dim();
  {
    nn::Gradients g = critic_.network().ZeroGradients();
    stats.critic_loss = CriticLoss(critic_, target_critic_, actor_, batch, config_,
                                   StandardNormal(n, k, rng), &g);
    critic_opt_.Step(&critic_.network(), g);
  }
  {
    nn::Gradients g = behavior_.network().ZeroGradients();
    stats.behavior_loss = BehaviorLoss(behavior_, batch.states, batch.z, batch.actions, &g);
    behavior_opt_.Step(&behavior_.network(), g);
  }
  {
    nn::Gradients g = actor_.network().ZeroGradients();
    ActorLossTerms terms;
    stats.actor_loss = ActorLoss(actor_, critic_, behavior_, batch.states, batch.z,
                                 config_, StandardNormal(n, k, rng), &g, &terms);
    stats.kl = terms.kl;
    actor_opt_.Step(&actor_.network(), g);
  }
  EmaUpdate(critic_.network(), config_.tau, &target_critic_.network());
  return stats;
}

Action Agent::Act(const State& observation, const nn::RowVector& z, bool deterministic,
                  Rng& rng) const {
  nn::Matrix s(1, kStateDim);
  for (int i = 0; i < kStateDim; ++i) s(0, i) = observation[i];
  const nn::Matrix a = actor_.Act(s, z, deterministic, rng);
  Action out{};
  for (int i = 0; i < kActionDim; ++i) {
    out[i] = std::clamp(static_cast<float>(a(0, i)), -kActionLimit, kActionLimit);
  }
  return out;
}

}  // namespace ertrl
