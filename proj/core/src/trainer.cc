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

#include "ertrl/trainer.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "ertrl/checkpoint.h"
#include "ertrl/errors.h"
#include "ertrl/evaluation.h"

namespace ertrl {
namespace {

void CheckFinite(double value, const char* name, std::int64_t step) {
  if (!std::isfinite(value)) {
    throw ComputationError(std::string("non-finite ") + name + " at step " +
                           std::to_string(step));
  }
}

std::vector<int> ChooseTasks(int available, int count, Rng& rng) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count <= available) {
    std::vector<int> pool(static_cast<std::size_t>(available));
    for (int i = 0; i < available; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < count; ++i) {
      std::uniform_int_distribution<int> pick(i, available - 1);
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(pick(rng))]);
      out.push_back(pool[static_cast<std::size_t>(i)]);
    }
  } else {
    std::uniform_int_distribution<int> pick(0, available - 1);
    for (int i = 0; i < count; ++i) out.push_back(pick(rng));
  }
  return out;
}

std::vector<ContextKind> ParseStrategies(const std::string& list) {
  std::vector<ContextKind> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(ParseContextKind(item));
  }
  return out;
}

// Drops rows whose leading step column exceeds `step`, so a resumed run
// continues the log without duplicates.
void TruncateLog(const std::filesystem::path& path, std::int64_t step) {
  std::ifstream in(path);
  if (!in) return;
  std::vector<std::string> kept;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header || std::stoll(line.substr(0, line.find(','))) <= step) kept.push_back(line);
    header = false;
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : kept) out << l << '\n';
}

std::ofstream OpenLog(const std::filesystem::path& path, bool append,
                      const std::function<void(std::ostream&)>& header) {
  const bool fresh = !append || !std::filesystem::exists(path);
  std::ofstream out(path, fresh ? std::ios::trunc : std::ios::app);
  if (!out) throw IoError("cannot open " + path.string());
  if (fresh) header(out);
  return out;
}

}  // namespace

TrainState InitTrainState(const TrainConfig& config) {
  config.Validate();
  TrainState s;
  s.config = config;
  const int latent = config.ResolvedLatentDim();
  Rng init = MakeRng(config.seed, {0x696e6974ULL});
  s.encoder = ContextEncoder(latent, config.encoder_hidden, init);
  s.encoder_optimizer = nn::Adam(s.encoder.network(), {.learning_rate = config.lr_encoder});
  GanOptions gan;
  gan.generator_hidden = config.generator_hidden;
  gan.discriminator_hidden = config.discriminator_hidden;
  gan.noise_dim = config.noise_dim;
  gan.learning_rate = config.lr_gan;
  s.gan = ConditionalGan(kStateDim, latent, kActionDim, gan, init);
  AgentOptions agent;
  agent.actor_hidden = config.actor_hidden;
  agent.critic_hidden = config.critic_hidden;
  agent.behavior_hidden = config.behavior_hidden;
  agent.actor_lr = config.lr_actor;
  agent.critic_lr = config.lr_critic;
  agent.behavior_lr = config.lr_behavior;
  AgentConfig agent_config{config.alpha, config.gamma, config.tau};
  s.agent = Agent(kStateDim, latent, kActionDim, agent, agent_config, init);
  s.rng = MakeRng(config.seed, {0x747261696eULL});
  return s;
}

StepMetrics TrainStep(TrainState& s, const std::vector<const TaskDataset*>& train_tasks) {
  if (train_tasks.empty()) throw std::invalid_argument("TrainStep: no training tasks");
  const TrainConfig& c = s.config;
  const int m = c.meta_batch;
  const int b = c.batch_size;
  const int latent = s.encoder.latent_dim();
  const std::int64_t step = s.step + 1;
  Rng& rng = s.rng;

  // Two contexts per task give the DML loss same-task pairs.
  const std::vector<int> picks = ChooseTasks(static_cast<int>(train_tasks.size()), m, rng);
  std::vector<ContextEncoder::Pass> pass_a(m), pass_b(m);
  nn::Matrix z_pair(2 * m, latent);
  std::vector<int> ids(2 * static_cast<std::size_t>(m));
  std::vector<TransitionTable> rows(m);
  for (int i = 0; i < m; ++i) {
    const TaskDataset& ds = *train_tasks[static_cast<std::size_t>(picks[i])];
    const ContextBatch ctx_a = SampleContext(ds, c.context_size, rng);
    const ContextBatch ctx_b = SampleContext(ds, c.context_size, rng);
    rows[i] = SampleTrainingBatch(ds, b, rng);
    z_pair.row(i) = s.encoder.EncodeContext(ctx_a.transitions, &pass_a[i]);
    z_pair.row(m + i) = s.encoder.EncodeContext(ctx_b.transitions, &pass_b[i]);
    ids[static_cast<std::size_t>(i)] = ds.task.task_id;
    ids[static_cast<std::size_t>(m + i)] = ds.task.task_id;
  }

  std::vector<AgentBatch> parts;
  parts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) parts.push_back(MakeAgentBatch(rows[i], z_pair.row(i)));
  const AgentBatch batch = StackBatches(parts);

  StepMetrics out;
  out.step = step;

  // Meta-behavior policy fit, z held fixed.
  for (int k = 0; k < c.gan_updates_per_step; ++k) {
    const GanUpdateStats g = s.gan.Update(batch.states, batch.z, batch.actions, rng);
    out.l_d += g.discriminator_loss / c.gan_updates_per_step;
    out.l_g += g.generator_loss / c.gan_updates_per_step;
  }

  // MI term: per-task covariance of freshly generated actions, with the
  // gradient carried through the generator back to z.
  const Generator& gen = s.gan.generator();
  nn::Tape g_tape;
  const nn::Matrix noise = StandardNormal(batch.size(), gen.noise_dim(), rng);
  const nn::Matrix fake = gen.Generate(batch.states, batch.z, noise, &g_tape);
  nn::Matrix d_fake(fake.rows(), fake.cols());
  for (int i = 0; i < m; ++i) {
    nn::Matrix g_block;
    const nn::Matrix block = fake.middleRows(static_cast<Eigen::Index>(i) * b, b);
    out.l_mi += MiLoss(block, &g_block) / m;
    out.entropy += EntropyEstimate(SampleCovariance(block)) / m;
    d_fake.middleRows(static_cast<Eigen::Index>(i) * b, b) = g_block / m;
  }
  const nn::Matrix d_z_rows = gen.Backward(g_tape, d_fake, nullptr);

  EncoderLossConfig loss_config;
  loss_config.lambda_dml = c.lambda_dml;
  loss_config.beta = c.dml_beta;
  loss_config.epsilon0 = c.dml_epsilon0;
  loss_config.mi_enabled = c.mi_enabled;
  nn::Matrix d_dml;
  out.l_dml = DmlLoss(z_pair, ids, loss_config, &d_dml);
  CheckFinite(out.l_d, "discriminator loss", step);
  CheckFinite(out.l_g, "generator loss", step);
  CheckFinite(out.l_mi, "MI loss", step);
  CheckFinite(out.l_dml, "DML loss", step);

  nn::Gradients enc_grads = s.encoder.network().ZeroGradients();
  for (int i = 0; i < m; ++i) {
    nn::RowVector d_a = c.lambda_dml * d_dml.row(i);
    if (c.mi_enabled) {
      d_a += d_z_rows.middleRows(static_cast<Eigen::Index>(i) * b, b).colwise().sum();
    }
    s.encoder.BackwardContext(pass_a[i], d_a, &enc_grads);
    s.encoder.BackwardContext(pass_b[i], c.lambda_dml * d_dml.row(m + i), &enc_grads);
  }
  s.encoder_optimizer.Step(&s.encoder.network(), enc_grads);

  // Agent sees z as a constant, so its losses never reach the encoder.
  const AgentUpdateStats a = s.agent.Update(batch, rng);
  out.l_q = a.critic_loss;
  out.l_pi = a.actor_loss;
  CheckFinite(out.l_q, "critic loss", step);
  CheckFinite(out.l_pi, "actor loss", step);
  CheckFinite(a.behavior_loss, "behavior loss", step);
  s.step = step;
  return out;
}

TaskSplits SelectTasks(const DatasetCollection& data, const TrainConfig& config) {
  if (data.manifest.family != config.family) {
    throw ConfigError("dataset family " + std::string(FamilyName(data.manifest.family)) +
                      " does not match config family " +
                      std::string(FamilyName(config.family)));
  }
  auto take = [&data](Split split, int count) {
    auto all = data.Split(split);
    if (static_cast<int>(all.size()) < count) {
      throw ConfigError("dataset has " + std::to_string(all.size()) + " " +
                        std::string(SplitName(split)) + " tasks, config needs " +
                        std::to_string(count));
    }
    all.resize(static_cast<std::size_t>(count));
    return all;
  };
  return {take(Split::kTrain, config.tasks_train), take(Split::kIdTest, config.tasks_id),
          take(Split::kOodTest, config.tasks_ood)};
}

void WriteMetricsHeader(std::ostream& out) {
  out << "step,l_mi,l_dml,l_d,l_g,l_q,l_pi,entropy\n";
}

void WriteMetricsRow(std::ostream& out, const StepMetrics& m) {
  out << m.step << ',' << FormatDouble(m.l_mi) << ',' << FormatDouble(m.l_dml) << ','
      << FormatDouble(m.l_d) << ',' << FormatDouble(m.l_g) << ',' << FormatDouble(m.l_q)
      << ',' << FormatDouble(m.l_pi) << ',' << FormatDouble(m.entropy) << '\n';
}

TrainResult Train(const TrainConfig& config, const DatasetCollection& data,
                  const std::filesystem::path& out_dir, const TrainOptions& options) {
  config.Validate();
  const TaskSplits splits = SelectTasks(data, config);
  const std::vector<ContextKind> strategies = ParseStrategies(config.eval_strategies);
  const bool persist = !out_dir.empty();
  const auto ckpt_path = out_dir / kCheckpointFile;

  TrainResult result;
  if (options.resume) {
    if (!persist || !std::filesystem::exists(ckpt_path)) {
      throw IoError("no checkpoint to resume from in " + out_dir.string());
    }
    result.state = LoadCheckpoint(ckpt_path);
    // Only the run length may change across a resume.
    TrainConfig expected = result.state.config;
    expected.total_steps = config.total_steps;
    if (!(expected == config)) {
      throw ConfigError("resume: config differs from the checkpointed run");
    }
    result.state.config.total_steps = config.total_steps;
    spdlog::info("resuming from step {}", result.state.step);
  } else {
    result.state = InitTrainState(config);
  }
  TrainState& state = result.state;

  std::ofstream train_log, eval_log;
  if (persist) {
    std::filesystem::create_directories(out_dir);
    if (options.resume) {
      TruncateLog(out_dir / kTrainMetricsFile, state.step);
      TruncateLog(out_dir / kEvalMetricsFile, state.step);
    }
    train_log = OpenLog(out_dir / kTrainMetricsFile, options.resume, WriteMetricsHeader);
    eval_log = OpenLog(out_dir / kEvalMetricsFile, options.resume, [](std::ostream& o) {
      o << "step,";
      WriteEvalCsvHeader(o);
    });
  }

  while (state.step < config.total_steps) {
    const StepMetrics m = TrainStep(state, splits.train);
    result.metrics.push_back(m);
    if (persist) {
      WriteMetricsRow(train_log, m);
      train_log.flush();
    }
    if (options.on_step) options.on_step(m);

    if (config.eval_every > 0 && state.step % config.eval_every == 0) {
      for (ContextKind kind : strategies) {
        ContextStrategy strategy;
        strategy.kind = kind;
        strategy.context_size = config.context_size;
        for (const auto& [split, tasks] :
             {std::pair{Split::kIdTest, &splits.id_test},
              std::pair{Split::kOodTest, &splits.ood_test}}) {
          const EvalResult r =
              EvaluateSuite(state.agent, state.encoder, *tasks, strategy, split,
                            config.eval_episodes, config.eval_seeds,
                            data.manifest.episode_length);
          spdlog::info("step {} {} {}: normalized {:.2f} +- {:.2f}", state.step,
                       ContextKindName(kind), SplitName(split), r.mean_normalized,
                       r.std_normalized);
          if (persist) {
            std::ostringstream rows;
            WriteEvalCsvRows(rows, r);
            std::istringstream lines(rows.str());
            for (std::string line; std::getline(lines, line);) {
              eval_log << state.step << ',' << line << '\n';
            }
            eval_log.flush();
          }
        }
      }
    }
    if (persist && config.checkpoint_every > 0 && state.step % config.checkpoint_every == 0) {
      SaveCheckpoint(state, ckpt_path);
    }
  }
  if (persist) SaveCheckpoint(state, ckpt_path);
  return result;
}

TrainResult Train(const TrainConfig& config, const std::filesystem::path& out_dir,
                  const TrainOptions& options) {
  if (config.data_dir.empty()) throw ConfigError("config: data_dir is not set");
  const DatasetCollection data = LoadDataset(config.data_dir);
  return Train(config, data, out_dir, options);
}

}  // namespace ertrl
