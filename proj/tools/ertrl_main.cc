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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ertrl/analysis.h"
#include "ertrl/checkpoint.h"
#include "ertrl/datasets.h"
#include "ertrl/envtasks.h"
#include "ertrl/errors.h"
#include "ertrl/evaluation.h"
#include "ertrl/trainer.h"

namespace {

using namespace ertrl;

std::vector<std::int64_t> ParseSeeds(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoll(item));
  }
  if (out.empty()) throw ConfigError("--seeds: no seeds given");
  return out;
}

struct GenDataArgs {
  std::string family = "point-dir";
  int tasks_train = 20;
  int tasks_id = 10;
  int tasks_ood = 10;
  int transitions = kDefaultTransitionsPerTask;
  bool full_scale = false;
  int episode_length = kDefaultEpisodeLength;
  std::uint64_t seed = 0;
  std::string out;
};

int RunGenData(const GenDataArgs& a) {
  const Family family = ParseFamily(a.family);
  const int n = a.full_scale ? kFullScaleTransitionsPerTask : a.transitions;
  const auto tasks = SampleTaskSuite(family, a.tasks_train, a.tasks_id, a.tasks_ood, a.seed);
  const DatasetCollection c =
      GenerateDataset(tasks, n, DefaultNoiseMix(), a.seed, a.out, a.episode_length);
  for (const auto& d : c.tasks) {
    std::cout << "task " << d.task.task_id << " " << SplitName(d.task.split)
              << " random=" << FormatDouble(d.random_return)
              << " expert=" << FormatDouble(d.expert_return) << '\n';
  }
  std::cout << "wrote " << c.tasks.size() << " tasks to " << a.out << '\n';
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string data;
  bool no_mi = false;
  double lambda = -1.0;
  std::int64_t steps = -1;
  bool full_scale = false;
  bool resume = false;
};

int RunTrain(const TrainArgs& a) {
  TrainConfig config = LoadTrainConfig(a.config);
  if (!a.data.empty()) config.data_dir = a.data;
  if (a.no_mi) config.mi_enabled = false;
  if (a.lambda >= 0.0) config.lambda_dml = a.lambda;
  if (a.full_scale) config.total_steps = kFullScaleTotalSteps;
  if (a.steps >= 0) config.total_steps = a.steps;
  config.Validate();
  TrainOptions options;
  options.resume = a.resume;
  options.on_step = [](const StepMetrics& m) {
    if (m.step % 100 == 0) {
      spdlog::info("step {} l_mi={:.4f} l_dml={:.4f} l_d={:.4f} l_g={:.4f} l_q={:.4f} l_pi={:.4f}",
                   m.step, m.l_mi, m.l_dml, m.l_d, m.l_g, m.l_q, m.l_pi);
    }
  };
  const TrainResult r = Train(config, a.out, options);
  std::cout << "trained to step " << r.state.step << "; outputs in " << a.out << '\n';
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string strategy = "offline";
  std::string split = "id";
  int episodes = kDefaultEvalEpisodes;
  std::string seeds = "1,2,3";
  int context_size = 0;
  int warmup = -1;
  std::string csv;
};

DatasetCollection LoadDataFor(const TrainState& state, const std::string& override_dir) {
  const std::string dir = override_dir.empty() ? state.config.data_dir : override_dir;
  if (dir.empty()) throw ConfigError("no dataset directory; pass --data");
  return LoadDataset(dir);
}

int RunEval(const EvalArgs& a) {
  const TrainState state = LoadCheckpoint(a.checkpoint);
  const DatasetCollection data = LoadDataFor(state, a.data);
  const TaskSplits splits = SelectTasks(data, state.config);
  const Split split = ParseSplit(a.split);
  const std::vector<const TaskDataset*>* tasks = nullptr;
  if (split == Split::kIdTest) tasks = &splits.id_test;
  else if (split == Split::kOodTest) tasks = &splits.ood_test;
  else tasks = &splits.train;

  ContextStrategy strategy;
  strategy.kind = ParseContextKind(a.strategy);
  strategy.context_size = a.context_size > 0 ? a.context_size : state.config.context_size;
  strategy.warmup_random_steps = a.warmup;
  const EvalResult r = EvaluateSuite(state.agent, state.encoder, *tasks, strategy, split,
                                     a.episodes, ParseSeeds(a.seeds),
                                     data.manifest.episode_length);
  if (a.csv.empty()) {
    WriteEvalCsvHeader(std::cout);
    WriteEvalCsvRows(std::cout, r);
  } else {
    std::ofstream out(a.csv, std::ios::trunc);
    if (!out) throw IoError("cannot write " + a.csv);
    WriteEvalCsvHeader(out);
    WriteEvalCsvRows(out, r);
  }
  std::cerr << ContextKindName(strategy.kind) << " " << SplitName(split)
            << ": normalized return " << FormatDouble(r.mean_normalized) << " +- "
            << FormatDouble(r.std_normalized) << '\n';
  return 0;
}

struct AnalyzeArgs {
  std::string checkpoint;
  std::string data;
  bool probe = false;
  bool wasserstein = false;
  std::string export_latents;
  int samples = kDefaultProbeSamples;
  int latent_samples = kDefaultLatentExportSamples;
  std::uint64_t seed = 0;
};

int RunAnalyze(const AnalyzeArgs& a) {
  const TrainState state = LoadCheckpoint(a.checkpoint);
  const DatasetCollection data = LoadDataFor(state, a.data);
  const TaskSplits splits = SelectTasks(data, state.config);
  if (!a.probe && !a.wasserstein && a.export_latents.empty()) {
    throw ConfigError("analyze: pick at least one of --probe, --wasserstein, --export-latents");
  }
  if (a.probe) {
    for (const auto* tasks : {&splits.train, &splits.id_test, &splits.ood_test}) {
      std::cout << ProbeResultToJson(RegressionProbe(state.encoder, *tasks, a.samples, a.seed))
                << '\n';
    }
  }
  if (a.wasserstein) {
    std::vector<const TaskDataset*> all = splits.train;
    all.insert(all.end(), splits.id_test.begin(), splits.id_test.end());
    all.insert(all.end(), splits.ood_test.begin(), splits.ood_test.end());
    std::cout << PolicyDistanceReportToJson(
                     ExpertDistanceReport(all, kDefaultProbeStates, a.seed))
              << '\n';
  }
  if (!a.export_latents.empty()) {
    std::vector<const TaskDataset*> all = splits.train;
    all.insert(all.end(), splits.ood_test.begin(), splits.ood_test.end());
    ExportLatents(state.encoder, all, a.latent_samples, a.seed,
                  std::filesystem::path(a.export_latents));
    std::cerr << "wrote latents to " << a.export_latents << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline meta-RL task representation toolkit"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate offline datasets");
  gen_cmd->add_option("--family", gen.family, "Task family")->capture_default_str();
  gen_cmd->add_option("--tasks-train", gen.tasks_train)->capture_default_str();
  gen_cmd->add_option("--tasks-id", gen.tasks_id)->capture_default_str();
  gen_cmd->add_option("--tasks-ood", gen.tasks_ood)->capture_default_str();
  gen_cmd->add_option("--transitions", gen.transitions, "Transitions per task")
      ->capture_default_str();
  gen_cmd->add_flag("--full-scale", gen.full_scale, "180000 transitions per task");
  gen_cmd->add_option("--episode-length", gen.episode_length)->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Meta-train from a config file");
  train_cmd->add_option("--config", train.config)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out, "Run directory")->required();
  train_cmd->add_option("--data", train.data, "Override data_dir");
  train_cmd->add_flag("--no-mi", train.no_mi, "Disable the MI term");
  train_cmd->add_option("--lambda", train.lambda, "DML weight");
  train_cmd->add_option("--steps", train.steps, "Total training steps");
  train_cmd->add_flag("--full-scale", train.full_scale, "100000 training steps");
  train_cmd->add_flag("--resume", train.resume, "Continue from <out>/checkpoint.bin");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--checkpoint", eval.checkpoint)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", eval.data, "Override the dataset directory");
  eval_cmd->add_option("--strategy", eval.strategy)
      ->check(CLI::IsMember({"offline", "online", "nonprior"}))
      ->capture_default_str();
  eval_cmd->add_option("--split", eval.split)
      ->check(CLI::IsMember({"id", "ood", "train"}))
      ->capture_default_str();
  eval_cmd->add_option("--episodes", eval.episodes)->capture_default_str();
  eval_cmd->add_option("--seeds", eval.seeds)->capture_default_str();
  eval_cmd->add_option("--context-size", eval.context_size, "Defaults to the trained H");
  eval_cmd->add_option("--warmup", eval.warmup, "Nonprior random steps; default H/4");
  eval_cmd->add_option("--csv", eval.csv, "Write rows here instead of stdout");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Representation analysis");
  analyze_cmd->add_option("--checkpoint", analyze.checkpoint)
      ->required()
      ->check(CLI::ExistingFile);
  analyze_cmd->add_option("--data", analyze.data, "Override the dataset directory");
  analyze_cmd->add_flag("--probe", analyze.probe, "Regression probe RMSE per split");
  analyze_cmd->add_flag("--wasserstein", analyze.wasserstein, "Expert policy distances");
  analyze_cmd->add_option("--export-latents", analyze.export_latents, "Latent CSV path");
  analyze_cmd->add_option("--samples", analyze.samples, "Probe samples per task")
      ->capture_default_str();
  analyze_cmd->add_option("--latent-samples", analyze.latent_samples)->capture_default_str();
  analyze_cmd->add_option("--seed", analyze.seed)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*gen_cmd) return RunGenData(gen);
    if (*train_cmd) return RunTrain(train);
    if (*eval_cmd) return RunEval(eval);
    if (*analyze_cmd) return RunAnalyze(analyze);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
