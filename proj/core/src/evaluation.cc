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

#include "ertrl/evaluation.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

ContextBatch CollectWithPolicy(PointEnv& env, const Agent& agent,
                               const ContextEncoder& encoder, int context_size,
                               int warmup, Rng& rng, const nn::RowVector& z0) {
  if (context_size < 1) {
    throw std::invalid_argument("context collection: context_size must be >= 1");
  }
  if (warmup < 0 || (warmup > 0 && warmup >= context_size)) {
    throw std::invalid_argument("context collection: warmup must lie in [0, H)");
  }
  const int latent = encoder.latent_dim();
  nn::RowVector z = z0.size() == 0 ? nn::RowVector::Zero(latent) : z0;
  if (z.size() != latent) {
    throw std::invalid_argument("context collection: z0 has the wrong dimension");
  }
  const Policy random = MakeRandomPolicy();
  std::vector<Transition> collected;
  collected.reserve(static_cast<std::size_t>(context_size));
  bool started = false;
  while (static_cast<int>(collected.size()) < context_size) {
    if (!started || env.episode_done()) {
      env.Reset(NextSeed(rng));
      started = true;
    }
    const bool exploring = static_cast<int>(collected.size()) < warmup;
    const State obs = env.state().observation();
    const Action a = exploring ? random(obs, rng) : agent.Act(obs, z, false, rng);
    collected.push_back(env.Step(a));
    const int n = static_cast<int>(collected.size());
    const bool warmup_finished = warmup > 0 && n == warmup;
    const bool policy_episode_end = !exploring && env.episode_done();
    if ((warmup_finished || policy_episode_end) && n < context_size) {
      z = encoder.EncodeContext(ToTable(collected));
    }
  }
  ContextBatch batch;
  batch.transitions = ToTable(collected);
  batch.task_id = env.task().task_id;
  return batch;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double SampleStd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::string_view ContextKindName(ContextKind kind) {
  switch (kind) {
    case ContextKind::kOffline: return "offline";
    case ContextKind::kOnline: return "online";
    case ContextKind::kNonprior: return "nonprior";
  }
  return "unknown";
}

ContextKind ParseContextKind(std::string_view name) {
  if (name == "offline") return ContextKind::kOffline;
  if (name == "online") return ContextKind::kOnline;
  if (name == "nonprior") return ContextKind::kNonprior;
  throw ConfigError("unknown context strategy '" + std::string(name) + "'");
}

void ContextStrategy::Validate() const {
  if (context_size < 1) throw std::invalid_argument("context strategy: H must be >= 1");
  if (kind == ContextKind::kNonprior && warmup() >= context_size) {
    throw std::invalid_argument("context strategy: warmup must be < H");
  }
}

ContextBatch CollectContextOffline(const TaskDataset& dataset, int context_size,
                                   Rng& rng) {
  return SampleContext(dataset, context_size, rng);
}

ContextBatch CollectContextOnline(PointEnv& env, const Agent& agent,
                                  const ContextEncoder& encoder, int context_size,
                                  Rng& rng, const nn::RowVector& z0) {
  return CollectWithPolicy(env, agent, encoder, context_size, 0, rng, z0);
}

ContextBatch CollectContextNonprior(PointEnv& env, const Agent& agent,
                                    const ContextEncoder& encoder, int context_size,
                                    int warmup, Rng& rng) {
  return CollectWithPolicy(env, agent, encoder, context_size, warmup, rng, {});
}

ContextBatch CollectContext(const ContextStrategy& strategy, PointEnv& env,
                            const TaskDataset& dataset, const Agent& agent,
                            const ContextEncoder& encoder, Rng& rng) {
  strategy.Validate();
  switch (strategy.kind) {
    case ContextKind::kOffline:
      return CollectContextOffline(dataset, strategy.context_size, rng);
    case ContextKind::kOnline:
      return CollectContextOnline(env, agent, encoder, strategy.context_size, rng,
                                  strategy.z0);
    case ContextKind::kNonprior:
      return CollectContextNonprior(env, agent, encoder, strategy.context_size,
                                    strategy.warmup(), rng);
  }
  throw std::invalid_argument("unknown context strategy");
}

Policy MakeActorPolicy(const Agent& agent, const nn::RowVector& z, bool deterministic) {
  return [&agent, z, deterministic](const State& obs, Rng& rng) {
    return agent.Act(obs, z, deterministic, rng);
  };
}

double RolloutReturn(PointEnv& env, const Policy& policy, int episodes, Rng& rng) {
  if (episodes < 1) throw std::invalid_argument("RolloutReturn: episodes must be >= 1");
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) total += RunEpisode(env, policy, NextSeed(rng), rng);
  return total / episodes;
}

double NormalizedReturn(double raw, double random_anchor, double expert_anchor) {
  if (expert_anchor == random_anchor) {
    throw ComputationError("normalized return: expert and random anchors coincide");
  }
  return 100.0 * (raw - random_anchor) / (expert_anchor - random_anchor);
}

EvalResult EvaluateSuite(const Agent& agent, const ContextEncoder& encoder,
                         const std::vector<const TaskDataset*>& tasks,
                         const ContextStrategy& strategy, Split split, int episodes,
                         const std::vector<std::int64_t>& seeds, int episode_length) {
  if (tasks.empty()) throw std::invalid_argument("EvaluateSuite: no tasks");
  if (seeds.empty()) throw std::invalid_argument("EvaluateSuite: no seeds");
  strategy.Validate();
  EvalResult result;
  std::map<std::int64_t, std::vector<double>> per_seed_norm, per_seed_raw;
  for (const TaskDataset* ds : tasks) {
    if (ds->task.split != split) {
      throw std::invalid_argument("EvaluateSuite: task " +
                                  std::to_string(ds->task.task_id) + " is not in split " +
                                  std::string(SplitName(split)));
    }
    for (std::int64_t seed : seeds) {
      Rng rng = MakeRng(static_cast<std::uint64_t>(seed),
                        {static_cast<std::uint64_t>(ds->task.task_id), 0x6576616cULL});
      PointEnv env(ds->task, episode_length);
      const ContextBatch context = CollectContext(strategy, env, *ds, agent, encoder, rng);
      const nn::RowVector z = encoder.EncodeContext(context);
      EvalRow row;
      row.strategy = strategy.kind;
      row.split = split;
      row.task_id = ds->task.task_id;
      row.seed = seed;
      row.raw_return = RolloutReturn(env, MakeActorPolicy(agent, z), episodes, rng);
      row.normalized_return =
          NormalizedReturn(row.raw_return, ds->random_return, ds->expert_return);
      per_seed_norm[seed].push_back(row.normalized_return);
      per_seed_raw[seed].push_back(row.raw_return);
      result.rows.push_back(row);
    }
  }
  std::vector<double> all_norm, all_raw, seed_norm, seed_raw;
  for (const auto& r : result.rows) {
    all_norm.push_back(r.normalized_return);
    all_raw.push_back(r.raw_return);
  }
  for (const auto& [seed, v] : per_seed_norm) seed_norm.push_back(Mean(v));
  for (const auto& [seed, v] : per_seed_raw) seed_raw.push_back(Mean(v));
  result.mean_normalized = Mean(all_norm);
  result.mean_raw = Mean(all_raw);
  result.std_normalized = SampleStd(seed_norm);
  result.std_raw = SampleStd(seed_raw);
  result.aggregate = {strategy.kind, split, -1, -1, result.mean_raw,
                      result.mean_normalized};
  return result;
}

std::string FormatDouble(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

void WriteEvalCsvHeader(std::ostream& out) {
  out << "strategy,split,task_id,seed,raw_return,normalized_return\n";
}

void WriteEvalCsvRows(std::ostream& out, const EvalResult& result) {
  auto write = [&out](const EvalRow& r) {
    out << ContextKindName(r.strategy) << ',' << SplitName(r.split) << ',' << r.task_id
        << ',' << r.seed << ',' << FormatDouble(r.raw_return) << ','
        << FormatDouble(r.normalized_return) << '\n';
  };
  for (const auto& r : result.rows) write(r);
  write(result.aggregate);
}

}  // namespace ertrl
