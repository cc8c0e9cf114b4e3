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

#include <benchmark/benchmark.h>

#include "ertrl/mi_gan.h"
#include "ertrl/nn.h"
#include "ertrl/representation.h"
#include "ertrl/train_config.h"
#include "ertrl/trainer.h"

namespace ertrl {
namespace {

void BM_MlpForwardBackward(benchmark::State& state) {
  const int width = static_cast<int>(state.range(0));
  const int rows = static_cast<int>(state.range(1));
  Rng rng = MakeRng(1);
  nn::Mlp net(30, {width, width, width}, 2, nn::Activation::kTanh, rng);
  const nn::Matrix x = StandardNormal(rows, 30, rng);
  const nn::Matrix d = nn::Matrix::Ones(rows, 2);
  for (auto _ : state) {
    nn::Tape tape;
    net.Forward(x, &tape);
    nn::Gradients g = net.ZeroGradients();
    benchmark::DoNotOptimize(net.Backward(tape, d, &g));
  }
  state.SetItemsProcessed(state.iterations() * rows);
}
BENCHMARK(BM_MlpForwardBackward)->Args({64, 256})->Args({256, 256})->Args({256, 4096});

void BM_EncodeContext(benchmark::State& state) {
  const int h = static_cast<int>(state.range(0));
  Rng rng = MakeRng(2);
  const ContextEncoder encoder(20, {200, 200, 200}, rng);
  TransitionTable rows(h, kRowFloats);
  rows = StandardNormal(h, kRowFloats, rng).cast<float>();
  for (auto _ : state) benchmark::DoNotOptimize(encoder.EncodeContext(rows));
  state.SetItemsProcessed(state.iterations() * h);
}
BENCHMARK(BM_EncodeContext)->Arg(64)->Arg(256);

void BM_MiLossWithGradient(benchmark::State& state) {
  Rng rng = MakeRng(3);
  const nn::Matrix a = 0.3 * StandardNormal(state.range(0), kActionDim, rng);
  nn::Matrix grad;
  for (auto _ : state) benchmark::DoNotOptimize(MiLoss(a, &grad));
}
BENCHMARK(BM_MiLossWithGradient)->Arg(256)->Arg(4096);

void BM_GanUpdate(benchmark::State& state) {
  const int rows = static_cast<int>(state.range(0));
  Rng rng = MakeRng(4);
  ConditionalGan gan(kStateDim, 20, kActionDim, GanOptions{}, rng);
  const nn::Matrix s = StandardNormal(rows, kStateDim, rng);
  const nn::Matrix z = nn::Matrix::Zero(rows, 20);
  const nn::Matrix a = 0.1 * StandardNormal(rows, kActionDim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(gan.Update(s, z, a, rng));
}
BENCHMARK(BM_GanUpdate)->Arg(256)->Unit(benchmark::kMillisecond);

// One full meta-training step at desk width.
void BM_TrainStep(benchmark::State& state) {
  TrainConfig c;
  c.tasks_train = 8;
  c.tasks_id = 1;
  c.tasks_ood = 1;
  c.meta_batch = 8;
  c.batch_size = static_cast<int>(state.range(0));
  c.context_size = static_cast<int>(state.range(0));
  c.encoder_hidden = c.generator_hidden = c.discriminator_hidden = {64, 64};
  c.actor_hidden = c.critic_hidden = c.behavior_hidden = {64, 64};
  DatasetCollection data;
  for (const TaskSpec& t : SampleTaskSuite(Family::kPointDir, 8, 1, 1, 5)) {
    data.tasks.push_back(GenerateTaskDataset(t, 2000, DefaultNoiseMix(), 5));
  }
  data.manifest.family = Family::kPointDir;
  const TaskSplits splits = SelectTasks(data, c);
  TrainState ts = InitTrainState(c);
  for (auto _ : state) benchmark::DoNotOptimize(TrainStep(ts, splits.train));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace ertrl

BENCHMARK_MAIN();
