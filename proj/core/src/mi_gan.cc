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

#include "ertrl/mi_gan.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void CheckRows(const nn::Matrix& a, const nn::Matrix& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw std::invalid_argument(std::string(what) + ": row count mismatch");
  }
}

double LogDetWithJitter(const nn::Matrix& sigma, double jitter,
                        Eigen::LLT<nn::Matrix>* llt_out) {
  const nn::Matrix a =
      sigma + jitter * nn::Matrix::Identity(sigma.rows(), sigma.cols());
  Eigen::LLT<nn::Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw ComputationError("covariance is not positive definite after jitter");
  }
  const nn::Vector diag = llt.matrixLLT().diagonal();
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) logdet += 2.0 * std::log(diag(i));
  if (!std::isfinite(logdet)) {
    throw ComputationError("non-finite log-determinant of covariance");
  }
  if (llt_out != nullptr) *llt_out = std::move(llt);
  return logdet;
}

}  // namespace

Generator::Generator(int state_dim, int latent_dim, int action_dim, int noise_dim,
                     const std::vector<int>& hidden, Rng& rng)
    : net_(state_dim + latent_dim + noise_dim, hidden, action_dim,
           nn::Activation::kTanh, rng),
      state_dim_(state_dim),
      latent_dim_(latent_dim),
      noise_dim_(noise_dim) {}

nn::Matrix Generator::Generate(const nn::Matrix& states, const nn::Matrix& z,
                               const nn::Matrix& noise, nn::Tape* tape) const {
  CheckRows(states, z, "Generator");
  CheckRows(states, noise, "Generator");
  if (states.cols() != state_dim_ || z.cols() != latent_dim_ ||
      noise.cols() != noise_dim_) {
    throw std::invalid_argument("Generator: input dimension mismatch");
  }
  return net_.Forward(nn::ConcatColumns({&states, &z, &noise}), tape);
}

nn::Matrix Generator::Backward(const nn::Tape& tape, const nn::Matrix& d_actions,
                               nn::Gradients* grads) const {
  const nn::Matrix d_in = net_.Backward(tape, d_actions, grads);
  return d_in.middleCols(state_dim_, latent_dim_);
}

Discriminator::Discriminator(int action_dim, int state_dim, int latent_dim,
                             const std::vector<int>& hidden, Rng& rng)
    : net_(action_dim + state_dim + latent_dim, hidden, 1, nn::Activation::kIdentity,
           rng),
      action_dim_(action_dim) {}

nn::Matrix Discriminator::Logits(const nn::Matrix& actions, const nn::Matrix& states,
                                 const nn::Matrix& z, nn::Tape* tape) const {
  CheckRows(actions, states, "Discriminator");
  CheckRows(actions, z, "Discriminator");
  if (actions.cols() != action_dim_) {
    throw std::invalid_argument("Discriminator: action dimension mismatch");
  }
  return net_.Forward(nn::ConcatColumns({&actions, &states, &z}), tape);
}

nn::Vector Discriminator::Probability(const nn::Matrix& actions,
                                      const nn::Matrix& states,
                                      const nn::Matrix& z) const {
  const nn::Matrix logits = Logits(actions, states, z);
  nn::Vector p(logits.rows());
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = ClampProbability(Sigmoid(logits(i, 0)));
  return p;
}

nn::Matrix Discriminator::Backward(const nn::Tape& tape, const nn::Matrix& d_logits,
                                   nn::Gradients* grads) const {
  return net_.Backward(tape, d_logits, grads).leftCols(action_dim_);
}

double ClampProbability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

double DiscriminatorLossFromProbabilities(const nn::Vector& p_real,
                                          const nn::Vector& p_fake) {
  if (p_real.size() != p_fake.size() || p_real.size() == 0) {
    throw std::invalid_argument("DiscriminatorLoss: mismatched or empty batches");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p_real.size(); ++i) {
    total += -std::log(ClampProbability(p_real(i))) -
             std::log(1.0 - ClampProbability(p_fake(i)));
  }
  return total / static_cast<double>(p_real.size());
}

double GeneratorLossFromProbabilities(const nn::Vector& p_fake) {
  if (p_fake.size() == 0) throw std::invalid_argument("GeneratorLoss: empty batch");
  double total = 0.0;
  for (Eigen::Index i = 0; i < p_fake.size(); ++i) {
    total += -std::log(ClampProbability(p_fake(i)));
  }
  return total / static_cast<double>(p_fake.size());
}

double DiscriminatorLoss(const Discriminator& d, const nn::Matrix& real_actions,
                         const nn::Matrix& fake_actions, const nn::Matrix& states,
                         const nn::Matrix& z) {
  CheckRows(real_actions, fake_actions, "DiscriminatorLoss");
  return DiscriminatorLossFromProbabilities(d.Probability(real_actions, states, z),
                                            d.Probability(fake_actions, states, z));
}

double GeneratorLoss(const Discriminator& d, const nn::Matrix& fake_actions,
                     const nn::Matrix& states, const nn::Matrix& z) {
  return GeneratorLossFromProbabilities(d.Probability(fake_actions, states, z));
}

CovarianceEstimate SampleCovariance(const nn::Matrix& actions) {
  if (actions.rows() < 2) {
    throw std::invalid_argument("SampleCovariance: need at least two rows");
  }
  const nn::RowVector mean = actions.colwise().mean();
  const nn::Matrix centered = actions.rowwise() - mean;
  CovarianceEstimate cov;
  cov.sigma = (centered.transpose() * centered) / static_cast<double>(actions.rows());
  cov.sigma = 0.5 * (cov.sigma + cov.sigma.transpose()).eval();
  cov.sample_count = actions.rows();
  return cov;
}

double EntropyEstimate(const CovarianceEstimate& cov) {
  const double k = static_cast<double>(cov.sigma.rows());
  // Exact log-determinant when sigma is positive definite; the jitter only
  // rescues degenerate batches.
  double logdet = 0.0;
  Eigen::LLT<nn::Matrix> llt(cov.sigma);
  bool exact = llt.info() == Eigen::Success;
  if (exact) {
    const nn::Vector diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) logdet += 2.0 * std::log(diag(i));
    exact = std::isfinite(logdet);
  }
  if (!exact) logdet = LogDetWithJitter(cov.sigma, cov.jitter, nullptr);
  return 0.5 * logdet + 0.5 * k * std::log(2.0 * std::numbers::pi * std::numbers::e);
}

double MiLoss(const nn::Matrix& actions, nn::Matrix* grad) {
  const CovarianceEstimate cov = SampleCovariance(actions);
  Eigen::LLT<nn::Matrix> llt;
  const double logdet = LogDetWithJitter(cov.sigma, cov.jitter, &llt);
  if (grad != nullptr) {
    const nn::Matrix centered = actions.rowwise() - actions.colwise().mean();
    const nn::Matrix inv =
        llt.solve(nn::Matrix::Identity(cov.sigma.rows(), cov.sigma.cols()));
    *grad = -(centered * inv) / static_cast<double>(actions.rows());
  }
  return -0.5 * logdet;
}

int DiscreteTaskWorld::latent_count() const {
  int n = 0;
  for (int z : encoder) n = std::max(n, z + 1);
  return n;
}

void DiscreteTaskWorld::Validate() const {
  const std::size_t tasks = task_prob.size();
  if (tasks == 0 || behavior.size() != tasks || encoder.size() != tasks) {
    throw std::invalid_argument("DiscreteTaskWorld: inconsistent task counts");
  }
  for (std::size_t t = 0; t < tasks; ++t) {
    if (encoder[t] < 0) throw std::invalid_argument("DiscreteTaskWorld: negative z index");
    if (behavior[t].size() != state_prob.size()) {
      throw std::invalid_argument("DiscreteTaskWorld: behavior/state count mismatch");
    }
    for (const auto& row : behavior[t]) {
      if (row.size() != behavior[0][0].size()) {
        throw std::invalid_argument("DiscreteTaskWorld: ragged action tables");
      }
    }
  }
}

std::vector<std::vector<std::vector<double>>> MetaBehaviorPolicy(
    const DiscreteTaskWorld& world) {
  world.Validate();
  const std::size_t states = world.state_prob.size();
  const std::size_t actions = world.behavior[0][0].size();
  const auto nz = static_cast<std::size_t>(world.latent_count());
  std::vector<std::vector<std::vector<double>>> pi(
      nz, std::vector<std::vector<double>>(states, std::vector<double>(actions, 0.0)));
  std::vector<double> pz(nz, 0.0);
  for (std::size_t t = 0; t < world.task_prob.size(); ++t) {
    const auto z = static_cast<std::size_t>(world.encoder[t]);
    pz[z] += world.task_prob[t];
    for (std::size_t s = 0; s < states; ++s) {
      for (std::size_t a = 0; a < actions; ++a) {
        pi[z][s][a] += world.task_prob[t] * world.behavior[t][s][a];
      }
    }
  }
  for (std::size_t z = 0; z < nz; ++z) {
    if (pz[z] == 0.0) continue;
    for (auto& row : pi[z]) {
      for (double& p : row) p /= pz[z];
    }
  }
  return pi;
}

double ExpectedMetaBehaviorEntropy(const DiscreteTaskWorld& world) {
  const auto pi = MetaBehaviorPolicy(world);
  std::vector<double> pz(pi.size(), 0.0);
  for (std::size_t t = 0; t < world.task_prob.size(); ++t) {
    pz[static_cast<std::size_t>(world.encoder[t])] += world.task_prob[t];
  }
  double h = 0.0;
  for (std::size_t z = 0; z < pi.size(); ++z) {
    for (std::size_t s = 0; s < world.state_prob.size(); ++s) {
      double hs = 0.0;
      for (double p : pi[z][s]) {
        if (p > 0.0) hs -= p * std::log(p);
      }
      h += pz[z] * world.state_prob[s] * hs;
    }
  }
  return h;
}

ConditionalGan::ConditionalGan(int state_dim, int latent_dim, int action_dim,
                               const GanOptions& options, Rng& rng)
    : generator_(state_dim, latent_dim, action_dim, options.noise_dim,
                 options.generator_hidden, rng),
      discriminator_(action_dim, state_dim, latent_dim, options.discriminator_hidden,
                     rng),
      g_opt_(generator_.network(), {.learning_rate = options.learning_rate}),
      d_opt_(discriminator_.network(), {.learning_rate = options.learning_rate}) {}

GanUpdateStats ConditionalGan::Update(const nn::Matrix& states, const nn::Matrix& z,
                                      const nn::Matrix& real_actions, Rng& rng) {
  const Eigen::Index n = states.rows();
  CheckRows(states, real_actions, "ConditionalGan::Update");
  GanUpdateStats stats;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Discriminator step.
  {
    const nn::Matrix noise = StandardNormal(n, generator_.noise_dim(), rng);
    const nn::Matrix fake = generator_.Generate(states, z, noise);
    nn::Tape real_tape, fake_tape;
    const nn::Matrix real_logits = discriminator_.Logits(real_actions, states, z, &real_tape);
    const nn::Matrix fake_logits = discriminator_.Logits(fake, states, z, &fake_tape);
    nn::Matrix d_real(n, 1), d_fake(n, 1);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sr = Sigmoid(real_logits(i, 0));
      const double sf = Sigmoid(fake_logits(i, 0));
      const double pr = ClampProbability(sr);
      const double pf = ClampProbability(sf);
      loss += -std::log(pr) - std::log(1.0 - pf);
      d_real(i, 0) = pr == sr ? -(1.0 - sr) * inv_n : 0.0;
      d_fake(i, 0) = pf == sf ? sf * inv_n : 0.0;
    }
    nn::Gradients grads = discriminator_.network().ZeroGradients();
    discriminator_.network().Backward(real_tape, d_real, &grads);
    discriminator_.network().Backward(fake_tape, d_fake, &grads);
    d_opt_.Step(&discriminator_.network(), grads);
    stats.discriminator_loss = loss * inv_n;
  }

  // Generator step.
  {
    const nn::Matrix noise = StandardNormal(n, generator_.noise_dim(), rng);
    nn::Tape g_tape, d_tape;
    const nn::Matrix fake = generator_.Generate(states, z, noise, &g_tape);
    const nn::Matrix logits = discriminator_.Logits(fake, states, z, &d_tape);
    nn::Matrix d_logits(n, 1);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = Sigmoid(logits(i, 0));
      const double p = ClampProbability(s);
      loss += -std::log(p);
      d_logits(i, 0) = p == s ? -(1.0 - s) * inv_n : 0.0;
    }
    const nn::Matrix d_actions = discriminator_.Backward(d_tape, d_logits, nullptr);
    nn::Gradients grads = generator_.network().ZeroGradients();
    generator_.network().Backward(g_tape, d_actions, &grads);
    g_opt_.Step(&generator_.network(), grads);
    stats.generator_loss = loss * inv_n;
  }
  return stats;
}

}  // namespace ertrl
