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

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <gtest/gtest.h>

#include "ertrl/errors.h"
#include "test_util.h"

namespace ertrl {
namespace {

using testing::NumericGradient;
using testing::RelativeError;

nn::Vector Constant(Eigen::Index n, double v) { return nn::Vector::Constant(n, v); }

CovarianceEstimate CovOf(const nn::Matrix& sigma) {
  CovarianceEstimate c;
  c.sigma = sigma;
  c.sample_count = 100;
  return c;
}

// Rows whose population covariance is exactly diag(d0, d1).
nn::Matrix BatchWithCovariance(double d0, double d1) {
  nn::Matrix a(4, 2);
  const double s0 = std::sqrt(d0), s1 = std::sqrt(d1);
  a << s0, 0, -s0, 0, 0, s1 * std::sqrt(2.0), 0, -s1 * std::sqrt(2.0);
  a.col(0) *= std::sqrt(2.0);
  return a;
}

TEST(GanLossTest, DiscriminatorAnalyticValues) {
  EXPECT_NEAR(DiscriminatorLossFromProbabilities(Constant(8, 0.5), Constant(8, 0.5)),
              2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(DiscriminatorLossFromProbabilities(Constant(3, 0.9), Constant(3, 0.1)),
              0.21072103131565256, 1e-12);
  EXPECT_NEAR(DiscriminatorLossFromProbabilities(Constant(2, 1.0), Constant(2, 0.0)), 2e-7,
              1e-12);
}

TEST(GanLossTest, GeneratorAnalyticValuesAndClamp) {
  EXPECT_NEAR(GeneratorLossFromProbabilities(Constant(4, 0.5)), std::log(2.0), 1e-12);
  EXPECT_NEAR(GeneratorLossFromProbabilities(Constant(4, 0.25)), std::log(4.0), 1e-12);
  EXPECT_NEAR(GeneratorLossFromProbabilities(Constant(4, 1.0)), 1e-7, 1e-12);
  EXPECT_TRUE(std::isfinite(GeneratorLossFromProbabilities(Constant(4, 0.0))));
  EXPECT_EQ(ClampProbability(0.0), 1e-7);
  EXPECT_EQ(ClampProbability(1.0), 1.0 - 1e-7);
  EXPECT_EQ(ClampProbability(0.3), 0.3);
}

TEST(GanNetworkTest, ShapesRangesAndDeterminism) {
  Rng rng = MakeRng(1);
  Generator g(4, 20, 2, 20, {200, 200, 200}, rng);
  Discriminator d(2, 4, 20, {256, 256}, rng);
  const nn::Matrix s = StandardNormal(16, 4, rng);
  const nn::Matrix z = StandardNormal(16, 20, rng);
  const nn::Matrix eps = StandardNormal(16, 20, rng);
  const nn::Matrix a = g.Generate(s, z, eps);
  EXPECT_EQ(a.rows(), 16);
  EXPECT_EQ(a.cols(), 2);
  EXPECT_LT(a.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_EQ(a, g.Generate(s, z, eps));
  const nn::Vector p = d.Probability(a, s, z);
  EXPECT_GT(p.minCoeff(), 0.0);
  EXPECT_LT(p.maxCoeff(), 1.0);
  EXPECT_THROW(g.Generate(s, z.leftCols(3), eps), std::invalid_argument);

  // Extreme parameters still give finite losses thanks to the clamp.
  nn::Vector big = d.network().Flatten();
  big *= 1e4;
  d.network().Unflatten(big);
  EXPECT_TRUE(std::isfinite(DiscriminatorLoss(d, a, -a, s, z)));
  EXPECT_TRUE(std::isfinite(GeneratorLoss(d, a, s, z)));
}

TEST(CovarianceTest, EdgeCasesAndBruteForce) {
  const nn::Matrix same = nn::Matrix::Constant(5, 2, 0.4);
  EXPECT_EQ(SampleCovariance(same).sigma, nn::Matrix::Zero(2, 2));
  nn::Matrix pm(2, 2);
  pm << -0.3, 0.2, 0.3, -0.2;
  nn::Matrix outer(2, 2);
  outer << 0.09, -0.06, -0.06, 0.04;
  EXPECT_LT((SampleCovariance(pm).sigma - outer).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(SampleCovariance(nn::Matrix::Zero(1, 2)), std::invalid_argument);

  Rng rng = MakeRng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const nn::Matrix a = StandardNormal(64, 2, rng);
    const CovarianceEstimate c = SampleCovariance(a);
    EXPECT_EQ(c.sample_count, 64);
    EXPECT_EQ(c.jitter, 1e-5);
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        double mj = 0, mk = 0, s = 0;
        for (int i = 0; i < 64; ++i) mj += a(i, j) / 64, mk += a(i, k) / 64;
        for (int i = 0; i < 64; ++i) s += (a(i, j) - mj) * (a(i, k) - mk);
        EXPECT_NEAR(c.sigma(j, k), s / 64, 1e-6 * std::max(1.0, std::abs(s / 64)));
      }
    }
  }
}

TEST(EntropyTest, AnalyticValues) {
  const double log2pie = std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(EntropyEstimate(CovOf(nn::Matrix::Identity(2, 2))), log2pie, 1e-9);
  EXPECT_NEAR(EntropyEstimate(CovOf(nn::Matrix::Zero(1, 1))), -4.337524199280441, 1e-9);
  EXPECT_NEAR(EntropyEstimate(CovOf(nn::Matrix::Constant(1, 1, 4.0))),
              0.5 * std::log(4.0) + 0.5 * log2pie, 1e-9);
}

TEST(MiLossTest, AnalyticValues) {
  EXPECT_NEAR(MiLoss(BatchWithCovariance(1.0, 1.0)), -1e-5, 1e-9);
  EXPECT_NEAR(MiLoss(BatchWithCovariance(4.0, 1.0)), -0.693153430533383, 1e-9);
  EXPECT_NEAR(MiLoss(BatchWithCovariance(4.0, 1.0)), -0.5 * std::log(4.0), 1e-5);
  EXPECT_NEAR(MiLoss(nn::Matrix::Constant(10, 2, 0.1)), 11.512925464970229, 1e-9);
}

TEST(MiLossTest, GradientMatchesFiniteDifferences) {
  Rng rng = MakeRng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const nn::Matrix a = 0.3 * StandardNormal(32, 2, rng);
    nn::Matrix grad;
    MiLoss(a, &grad);
    auto f = [](const nn::Vector& v) { return MiLoss(testing::UnflattenMatrix(v, 32, 2)); };
    EXPECT_LT(RelativeError(testing::FlattenMatrix(grad),
                            NumericGradient(f, testing::FlattenMatrix(a))),
              1e-4);
  }
}

TEST(MiLossTest, PermutationAndScaling) {
  Rng rng = MakeRng(4);
  const nn::Matrix a = StandardNormal(50, 2, rng);
  const nn::Matrix flipped = a.colwise().reverse();
  EXPECT_NEAR(MiLoss(a), MiLoss(flipped), 1e-12);
  // Scaling by c scales the covariance by c^2 but not the jitter.
  const nn::Matrix sigma = SampleCovariance(a).sigma;
  for (double c : {1.5, 2.0, 4.0}) {
    const nn::Matrix scaled = c * c * sigma + kCovarianceJitter * nn::Matrix::Identity(2, 2);
    EXPECT_NEAR(MiLoss(c * a), -0.5 * std::log(scaled.determinant()), 1e-12);
    EXPECT_NEAR(MiLoss(c * a), MiLoss(a) - 2.0 * std::log(c), 2e-5);
  }
}

TEST(DiscreteWorldTest, DeterministicEncoderEntropyIdentity) {
  DiscreteTaskWorld w;
  w.task_prob = {0.2, 0.5, 0.3};
  w.state_prob = {0.6, 0.4};
  w.behavior = {{{0.1, 0.2, 0.3, 0.4}, {0.25, 0.25, 0.25, 0.25}},
                {{0.7, 0.1, 0.1, 0.1}, {0.05, 0.15, 0.3, 0.5}},
                {{0.0, 0.5, 0.5, 0.0}, {0.9, 0.05, 0.05, 0.0}}};
  for (const std::vector<int>& enc : {std::vector<int>{0, 1, 2}, std::vector<int>{0, 0, 1},
                                      std::vector<int>{1, 1, 1}}) {
    w.encoder = enc;
    // H(a | s, z) by enumerating the joint p(s, z, a).
    const int nz = w.latent_count();
    double joint = 0.0, marginal = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
      for (int z = 0; z < nz; ++z) {
        double pz = 0.0;
        for (std::size_t t = 0; t < 3; ++t) {
          if (enc[t] == z) pz += w.task_prob[t];
        }
        if (pz > 0) marginal -= w.state_prob[s] * pz * std::log(w.state_prob[s] * pz);
        for (std::size_t a = 0; a < 4; ++a) {
          double p = 0.0;
          for (std::size_t t = 0; t < 3; ++t) {
            if (enc[t] == z) p += w.task_prob[t] * w.behavior[t][s][a];
          }
          p *= w.state_prob[s];
          if (p > 0) joint -= p * std::log(p);
        }
      }
    }
    EXPECT_NEAR(joint - marginal, ExpectedMetaBehaviorEntropy(w), 1e-14);
  }
}

TEST(ConditionalGanTest, UpdateAdvancesBothOptimizersOnce) {
  Rng rng = MakeRng(5);
  GanOptions opt;
  opt.generator_hidden = {16};
  opt.discriminator_hidden = {16};
  ConditionalGan gan(4, 3, 2, opt, rng);
  const nn::Matrix s = StandardNormal(8, 4, rng);
  const nn::Matrix z = StandardNormal(8, 3, rng);
  const nn::Matrix a = 0.1 * StandardNormal(8, 2, rng);
  const GanUpdateStats st = gan.Update(s, z, a, rng);
  EXPECT_TRUE(std::isfinite(st.discriminator_loss));
  EXPECT_TRUE(std::isfinite(st.generator_loss));
  EXPECT_EQ(gan.generator_optimizer().step_count(), 1);
  EXPECT_EQ(gan.discriminator_optimizer().step_count(), 1);
}

TEST(ConditionalGanTest, FitsAFixedGaussianPolicy) {
  Rng rng = MakeRng(6);
  GanOptions opt;
  opt.generator_hidden = {64, 64};
  opt.discriminator_hidden = {64, 64};
  opt.noise_dim = 4;
  ConditionalGan gan(4, 2, 2, opt, rng);
  const int n = 128;
  for (int step = 0; step < 1500; ++step) {
    const nn::Matrix s = StandardNormal(n, 4, rng);
    const nn::Matrix z = nn::Matrix::Zero(n, 2);
    const nn::Matrix real = (0.05 * StandardNormal(n, 2, rng)).array() + 0.3;
    gan.Update(s, z, real, rng);
  }
  const nn::Matrix s = StandardNormal(2000, 4, rng);
  const nn::Matrix fake = gan.generator().Generate(s, nn::Matrix::Zero(2000, 2),
                                                   StandardNormal(2000, 4, rng));
  EXPECT_NEAR(fake.col(0).mean(), 0.3, 0.1);
  EXPECT_NEAR(fake.col(1).mean(), 0.3, 0.1);
}

}  // namespace
}  // namespace ertrl
