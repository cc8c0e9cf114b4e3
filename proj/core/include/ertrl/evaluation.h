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

#ifndef ERTRL_EVALUATION_H_
#define ERTRL_EVALUATION_H_

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ertrl/agent.h"
#include "ertrl/datasets.h"
#include "ertrl/representation.h"

namespace ertrl {

enum class ContextKind { kOffline, kOnline, kNonprior };

std::string_view ContextKindName(ContextKind kind);
ContextKind ParseContextKind(std::string_view name);

struct ContextStrategy {
  ContextKind kind = ContextKind::kOffline;
  int context_size = 256;
  // Nonprior only; defaults to context_size / 4 when negative.
  int warmup_random_steps = -1;
  // Online only; empty means the zero vector.
  nn::RowVector z0;

  int warmup() const { return warmup_random_steps < 0 ? context_size / 4 : warmup_random_steps; }
  void Validate() const;
};

// Same draw as SampleContext; never touches an environment.
ContextBatch CollectContextOffline(const TaskDataset& dataset, int context_size, Rng& rng);

// Starts from z0 (zero when empty), acts with the stochastic actor and
// re-encodes z from everything collected after each finished episode.
// Stops after exactly `context_size` transitions.
ContextBatch CollectContextOnline(PointEnv& env, const Agent& agent,
                                  const ContextEncoder& encoder, int context_size,
                                  Rng& rng, const nn::RowVector& z0 = {});

// The first `warmup` transitions use uniform-random actions; z is then
// encoded from them and the online loop continues. warmup == 0 is the
// online protocol with z0 = 0.
ContextBatch CollectContextNonprior(PointEnv& env, const Agent& agent,
                                    const ContextEncoder& encoder, int context_size,
                                    int warmup, Rng& rng);

ContextBatch CollectContext(const ContextStrategy& strategy, PointEnv& env,
                            const TaskDataset& dataset, const Agent& agent,
                            const ContextEncoder& encoder, Rng& rng);

// Deterministic (squashed-mean) actor conditioned on a fixed z.
Policy MakeActorPolicy(const Agent& agent, const nn::RowVector& z,
                       bool deterministic = true);

// Mean undiscounted return over `episodes` episodes; reset seeds come from rng.
double RolloutReturn(PointEnv& env, const Policy& policy, int episodes, Rng& rng);

// 100 * (raw - random) / (expert - random). Throws ComputationError when
// the anchors coincide.
double NormalizedReturn(double raw, double random_anchor, double expert_anchor);

struct EvalRow {
  ContextKind strategy = ContextKind::kOffline;
  Split split = Split::kIdTest;
  int task_id = 0;
  std::int64_t seed = 0;
  double raw_return = 0.0;
  double normalized_return = 0.0;
};

struct EvalResult {
  std::vector<EvalRow> rows;
  EvalRow aggregate;  // task_id = -1, seed = -1
  double mean_normalized = 0.0;
  // Standard deviation of the per-seed mean normalized return.
  double std_normalized = 0.0;
  double mean_raw = 0.0;
  double std_raw = 0.0;
};

inline constexpr int kDefaultEvalEpisodes = 10;

// For each task and seed: collect a context, encode z, roll out the
// deterministic actor and normalize by the dataset anchors. Rows are ordered
// by (task_id, seed).
EvalResult EvaluateSuite(const Agent& agent, const ContextEncoder& encoder,
                         const std::vector<const TaskDataset*>& tasks,
                         const ContextStrategy& strategy, Split split, int episodes,
                         const std::vector<std::int64_t>& seeds,
                         int episode_length = kDefaultEpisodeLength);

// Columns: strategy,split,task_id,seed,raw_return,normalized_return.
void WriteEvalCsvHeader(std::ostream& out);
void WriteEvalCsvRows(std::ostream& out, const EvalResult& result);
std::string FormatDouble(double value);

}  // namespace ertrl

#endif  // ERTRL_EVALUATION_H_
