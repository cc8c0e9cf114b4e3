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

#ifndef ERTRL_DATASETS_H_
#define ERTRL_DATASETS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ertrl/envtasks.h"
#include "ertrl/rng.h"

namespace ertrl {

// One stored row: state(4) | action(2) | reward(1) | next_state(4) | done(1),
// little-endian float32, 48 bytes.
inline constexpr int kRowFloats = 12;
inline constexpr int kRowStride = kRowFloats * 4;
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kDefaultTransitionsPerTask = 20000;
inline constexpr int kFullScaleTransitionsPerTask = 180000;
inline constexpr int kAnchorEpisodes = 20;
inline constexpr double kAnchorExpertNoise = 0.1;

namespace row {
inline constexpr int kState = 0;
inline constexpr int kAction = 4;
inline constexpr int kReward = 6;
inline constexpr int kNextState = 7;
inline constexpr int kDone = 11;
}  // namespace row

using TransitionTable =
    Eigen::Matrix<float, Eigen::Dynamic, kRowFloats, Eigen::RowMajor>;

TransitionTable ToTable(const std::vector<Transition>& transitions);
Transition RowToTransition(const TransitionTable& table, Eigen::Index i);

// Rows [row_begin, row_end) were collected with expert noise `noise_scale`.
struct BehaviorSegment {
  double noise_scale = 0.0;
  std::int64_t row_begin = 0;
  std::int64_t row_end = 0;
};

struct TaskDataset {
  TaskSpec task;
  TransitionTable transitions;
  std::vector<BehaviorSegment> behavior_heads;
  double random_return = 0.0;
  double expert_return = 0.0;

  Eigen::Index size() const { return transitions.rows(); }
};

struct ContextBatch {
  TransitionTable transitions;
  int task_id = 0;

  Eigen::Index size() const { return transitions.rows(); }
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  Family family = Family::kPointVel;
  std::string dtype = "float32-le";
  std::uint64_t seed = 0;
  int episode_length = kDefaultEpisodeLength;
  std::vector<double> noise_mix;
  struct Entry {
    TaskSpec task;
    std::string file;
    std::int64_t rows = 0;
    std::uint32_t crc32 = 0;
    double random_return = 0.0;
    double expert_return = 0.0;
    std::vector<BehaviorSegment> behavior_heads;
  };
  std::vector<Entry> tasks;
};

struct DatasetCollection {
  DatasetManifest manifest;
  std::vector<TaskDataset> tasks;

  std::vector<const TaskDataset*> Split(ertrl::Split split) const;
  const TaskDataset& ByTaskId(int task_id) const;
};

// Default "different training stages" emulation: equal thirds.
std::vector<double> DefaultNoiseMix();

// Rolls out the scripted expert for one task and estimates the random/expert
// return anchors. Throws ComputationError if random_return >= expert_return.
TaskDataset GenerateTaskDataset(const TaskSpec& task, int transitions_per_task,
                                const std::vector<double>& noise_mix,
                                std::uint64_t seed,
                                int episode_length = kDefaultEpisodeLength);

// Generates every task and writes manifest.json plus one binary file per
// task into `out_dir`.
DatasetCollection GenerateDataset(const std::vector<TaskSpec>& tasks,
                                  int transitions_per_task,
                                  const std::vector<double>& noise_mix,
                                  std::uint64_t seed,
                                  const std::filesystem::path& out_dir,
                                  int episode_length = kDefaultEpisodeLength);

// The manifest is (re)built from `collection.tasks`; returns it.
DatasetManifest SaveDataset(const DatasetCollection& collection,
                            const std::filesystem::path& dir);
DatasetCollection LoadDataset(const std::filesystem::path& dir);

// Manifest JSON text <-> struct.
std::string ManifestToJson(const DatasetManifest& manifest);
DatasetManifest ManifestFromJson(const std::string& text);

// Uniform draws with replacement.
ContextBatch SampleContext(const TaskDataset& dataset, int context_size, Rng& rng);
TransitionTable SampleTrainingBatch(const TaskDataset& dataset, int batch_size,
                                    Rng& rng);

}  // namespace ertrl

#endif  // ERTRL_DATASETS_H_
