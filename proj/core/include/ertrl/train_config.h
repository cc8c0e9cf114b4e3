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

#ifndef ERTRL_TRAIN_CONFIG_H_
#define ERTRL_TRAIN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ertrl/envtasks.h"

namespace ertrl {

inline constexpr std::int64_t kFullScaleTotalSteps = 100000;
inline constexpr double kHeavyFamilyLambda = 0.25;

struct TrainConfig {
  std::string data_dir;
  Family family = Family::kPointDir;
  int tasks_train = 20;
  int tasks_id = 10;
  int tasks_ood = 10;

  int meta_batch = 16;
  int batch_size = 256;
  int context_size = 256;
  int latent_dim = 0;  // 0 picks the family default
  int gan_updates_per_step = 5;
  int noise_dim = 20;

  double lambda_dml = 0.5;
  double dml_beta = 1.0;
  double dml_epsilon0 = 1e-3;
  bool mi_enabled = true;

  double lr_encoder = 3e-4;
  double lr_actor = 3e-4;
  double lr_critic = 3e-4;
  double lr_gan = 3e-4;
  double lr_behavior = 3e-4;
  double alpha = 50.0;
  double gamma = 0.99;
  double tau = 0.005;

  std::vector<int> encoder_hidden = {200, 200, 200};
  std::vector<int> generator_hidden = {200, 200, 200};
  std::vector<int> discriminator_hidden = {256, 256};
  std::vector<int> actor_hidden = {256, 256, 256};
  std::vector<int> critic_hidden = {256, 256, 256};
  std::vector<int> behavior_hidden = {256, 256, 256};

  std::int64_t total_steps = 5000;
  std::int64_t eval_every = 1000;  // 0 disables periodic evaluation
  std::int64_t checkpoint_every = 1000;  // 0 writes only the final checkpoint
  int eval_episodes = 10;
  std::vector<std::int64_t> eval_seeds = {1};
  std::string eval_strategies = "offline,online";
  std::uint64_t seed = 0;

  // 20 for most families, 40 for the mass and friction families.
  int ResolvedLatentDim() const;
  void Validate() const;  // throws ConfigError
};

int DefaultLatentDim(Family family);

// Parses `key = value` lines; `#` starts a comment. Unknown keys, malformed
// values and repeated keys are ConfigErrors.
TrainConfig ParseTrainConfig(std::string_view text);
TrainConfig LoadTrainConfig(const std::filesystem::path& path);
// Canonical text form; ParseTrainConfig(FormatTrainConfig(c)) == c.
std::string FormatTrainConfig(const TrainConfig& config);
// Applies one key/value pair with the parser's rules.
void SetTrainConfigValue(TrainConfig* config, std::string_view key, std::string_view value);

bool operator==(const TrainConfig& a, const TrainConfig& b);

}  // namespace ertrl

#endif  // ERTRL_TRAIN_CONFIG_H_
