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

#ifndef ERTRL_TRAINER_H_
#define ERTRL_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

#include "ertrl/agent.h"
#include "ertrl/datasets.h"
#include "ertrl/mi_gan.h"
#include "ertrl/representation.h"
#include "ertrl/train_config.h"

namespace ertrl {

struct TrainState {
  TrainConfig config;
  ContextEncoder encoder;
  nn::Adam encoder_optimizer;
  ConditionalGan gan;
  Agent agent;
  std::int64_t step = 0;
  Rng rng;
};

// Fresh parameters drawn from config.seed.
TrainState InitTrainState(const TrainConfig& config);

struct StepMetrics {
  std::int64_t step = 0;  // step index after the update (1-based)
  double l_mi = 0.0;
  double l_dml = 0.0;
  double l_d = 0.0;  // mean over the inner GAN updates
  double l_g = 0.0;
  double l_q = 0.0;
  double l_pi = 0.0;
  double entropy = 0.0;  // mean per-task entropy estimate of generated actions
};

// One meta-training step over `meta_batch` tasks drawn from `train_tasks`.
// Throws ComputationError naming the first non-finite loss.
StepMetrics TrainStep(TrainState& state, const std::vector<const TaskDataset*>& train_tasks);

struct TaskSplits {
  std::vector<const TaskDataset*> train;
  std::vector<const TaskDataset*> id_test;
  std::vector<const TaskDataset*> ood_test;
};

// First tasks_train / tasks_id / tasks_ood tasks of each split. Throws
// ConfigError when the collection is too small or of another family.
TaskSplits SelectTasks(const DatasetCollection& data, const TrainConfig& config);

struct TrainOptions {
  bool resume = false;
  std::function<void(const StepMetrics&)> on_step;
};

struct TrainResult {
  TrainState state;
  std::vector<StepMetrics> metrics;
};

inline constexpr const char* kTrainMetricsFile = "train_metrics.csv";
inline constexpr const char* kEvalMetricsFile = "eval_metrics.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.bin";

// Runs total_steps train steps, evaluating every eval_every steps and
// checkpointing every checkpoint_every steps into `out_dir`. An empty
// out_dir keeps everything in memory.
TrainResult Train(const TrainConfig& config, const DatasetCollection& data,
                  const std::filesystem::path& out_dir, const TrainOptions& options = {});
// Loads the datasets from config.data_dir first.
TrainResult Train(const TrainConfig& config, const std::filesystem::path& out_dir,
                  const TrainOptions& options = {});

void WriteMetricsHeader(std::ostream& out);
void WriteMetricsRow(std::ostream& out, const StepMetrics& m);

}  // namespace ertrl

#endif  // ERTRL_TRAINER_H_
