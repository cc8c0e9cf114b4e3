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

#include <gtest/gtest.h>

#include "ertrl/rng.h"
#include "test_util.h"

namespace ertrl::nn {
namespace {

using testing::NumericGradient;
using testing::RelativeError;

double WeightedSum(const Matrix& out, const Matrix& w) { return (out.array() * w.array()).sum(); }

class MlpGradientTest : public ::testing::TestWithParam<Activation> {};

TEST_P(MlpGradientTest, ParameterAndInputGradientsMatchFiniteDifferences) {
  Rng rng = MakeRng(7);
  Mlp net(3, {5, 4}, 2, GetParam(), rng);
  const Matrix x = StandardNormal(4, 3, rng);
  const Matrix w = StandardNormal(4, 2, rng);

  Tape tape;
  const Matrix out = net.Forward(x, &tape);
  Gradients grads = net.ZeroGradients();
  const Matrix d_x = net.Backward(tape, w, &grads);

  const Vector theta = net.Flatten();
  auto loss_of_params = [&](const Vector& p) {
    Mlp copy = net;
    copy.Unflatten(p);
    return WeightedSum(copy.Forward(x), w);
  };
  EXPECT_LT(RelativeError(grads.Flatten(), NumericGradient(loss_of_params, theta)), 1e-6);

  auto loss_of_input = [&](const Vector& v) {
    return WeightedSum(net.Forward(testing::UnflattenMatrix(v, 4, 3)), w);
  };
  EXPECT_LT(RelativeError(testing::FlattenMatrix(d_x),
                          NumericGradient(loss_of_input, testing::FlattenMatrix(x))),
            1e-6);
}

INSTANTIATE_TEST_SUITE_P(Activations, MlpGradientTest,
                         ::testing::Values(Activation::kIdentity, Activation::kTanh,
                                           Activation::kSigmoid, Activation::kRelu));

TEST(MlpTest, ShapesAndInitRange) {
  Rng rng = MakeRng(1);
  Mlp net(11, {200, 200, 200}, 20, Activation::kTanh, rng);
  EXPECT_EQ(net.input_dim(), 11);
  EXPECT_EQ(net.output_dim(), 20);
  EXPECT_EQ(net.parameter_count(), 11 * 200 + 200 + 2 * (200 * 200 + 200) + 200 * 20 + 20);
  for (const auto& layer : net.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.weight.rows()));
    EXPECT_LE(layer.weight.cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(layer.bias.cwiseAbs().maxCoeff(), bound);
  }
  const Matrix out = net.Forward(StandardNormal(8, 11, rng));
  EXPECT_EQ(out.rows(), 8);
  EXPECT_LT(out.cwiseAbs().maxCoeff(), 1.0);
}

TEST(MlpTest, FlattenRoundTripIsExact) {
  Rng rng = MakeRng(2);
  Mlp a(4, {6}, 3, Activation::kIdentity, rng);
  Mlp b(4, {6}, 3, Activation::kIdentity, rng);
  b.Unflatten(a.Flatten());
  EXPECT_EQ(a.Flatten(), b.Flatten());
  EXPECT_THROW(b.Unflatten(Vector::Zero(3)), std::invalid_argument);
}

TEST(MlpTest, RejectsWrongInputWidth) {
  Rng rng = MakeRng(3);
  Mlp net(4, {6}, 3, Activation::kIdentity, rng);
  EXPECT_THROW(net.Forward(Matrix::Zero(2, 5)), std::invalid_argument);
}

TEST(AdamTest, FirstStepMovesByLearningRateTimesSign) {
  Rng rng = MakeRng(4);
  Mlp net(2, {3}, 1, Activation::kIdentity, rng);
  Adam opt(net, {.learning_rate = 0.01});
  Gradients g = net.ZeroGradients();
  for (auto& layer : g.layers) {
    layer.weight.setConstant(0.5);
    layer.bias.setConstant(-2.0);
  }
  const Vector before = net.Flatten();
  opt.Step(&net, g);
  const Vector flat_g = g.Flatten();
  const Vector after = net.Flatten();
  // With bias correction the first update is lr * g / (|g| + eps).
  for (Eigen::Index i = 0; i < before.size(); ++i) {
    const double expected = before(i) - 0.01 * flat_g(i) / (std::abs(flat_g(i)) + 1e-8);
    EXPECT_NEAR(after(i), expected, 1e-15);
  }
  EXPECT_EQ(opt.step_count(), 1);
}

TEST(AdamTest, RestoreReproducesTrajectory) {
  Rng rng = MakeRng(5);
  Mlp net(2, {3}, 1, Activation::kIdentity, rng);
  Adam opt(net, {});
  Gradients g = net.ZeroGradients();
  for (auto& layer : g.layers) layer.weight.setConstant(0.3);
  opt.Step(&net, g);

  Mlp copy = net;
  Adam restored(copy, {});
  restored.Restore(opt.first_moment(), opt.second_moment(), opt.step_count());
  opt.Step(&net, g);
  restored.Step(&copy, g);
  EXPECT_EQ(net.Flatten(), copy.Flatten());
}

TEST(SoftUpdateTest, TauOneCopiesAndHalfAverages) {
  Rng rng = MakeRng(6);
  Mlp online(2, {3}, 1, Activation::kIdentity, rng);
  Mlp target(2, {3}, 1, Activation::kIdentity, rng);
  const Vector t0 = target.Flatten();
  Mlp half = target;
  SoftUpdate(online, 0.5, &half);
  EXPECT_LT((half.Flatten() - 0.5 * (online.Flatten() + t0)).cwiseAbs().maxCoeff(), 1e-15);
  SoftUpdate(online, 1.0, &target);
  EXPECT_EQ(target.Flatten(), online.Flatten());
}

TEST(ConcatColumnsTest, StacksBlocks) {
  const Matrix a = Matrix::Constant(2, 1, 1.0);
  const Matrix b = Matrix::Constant(2, 2, 2.0);
  const Matrix c = ConcatColumns({&a, &b});
  EXPECT_EQ(c.cols(), 3);
  EXPECT_EQ(c(1, 0), 1.0);
  EXPECT_EQ(c(1, 2), 2.0);
}

}  // namespace
}  // namespace ertrl::nn
