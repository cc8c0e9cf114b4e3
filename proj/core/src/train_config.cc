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

#include "ertrl/train_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Bad(std::string_view key, std::string_view value, std::string_view what) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                    std::string(value) + "' as " + std::string(what));
}

template <typename T>
T ParseInteger(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) Bad(key, value, "an integer");
  return out;
}

double ParseReal(std::string_view key, std::string_view value) {
  const std::string copy(value);
  char* end = nullptr;
  const double out = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) Bad(key, value, "a number");
  return out;
}

bool ParseBool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  Bad(key, value, "a boolean");
}

template <typename T>
std::vector<T> ParseList(std::string_view key, std::string_view value) {
  std::vector<T> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    out.push_back(ParseInteger<T>(key, Trim(value.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  return out;
}

std::string Real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string List(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

int DefaultLatentDim(Family family) {
  return family == Family::kPointMass || family == Family::kPointFriction ? 40 : 20;
}

int TrainConfig::ResolvedLatentDim() const {
  return latent_dim > 0 ? latent_dim : DefaultLatentDim(family);
}

void TrainConfig::Validate() const {
  auto positive = [](std::int64_t v, const char* name) {
    if (v < 1) throw ConfigError(std::string("config: ") + name + " must be positive");
  };
  positive(tasks_train, "tasks_train");
  positive(tasks_id, "tasks_id");
  positive(tasks_ood, "tasks_ood");
  positive(meta_batch, "meta_batch");
  positive(batch_size, "batch_size");
  positive(context_size, "context_size");
  positive(gan_updates_per_step, "gan_updates_per_step");
  positive(noise_dim, "noise_dim");
  positive(eval_episodes, "eval_episodes");
  if (latent_dim < 0) throw ConfigError("config: latent_dim must be >= 0");
  if (total_steps < 0 || eval_every < 0 || checkpoint_every < 0) {
    throw ConfigError("config: step counts must be >= 0");
  }
  if (!(lambda_dml >= 0.0)) throw ConfigError("config: lambda_dml must be >= 0");
  if (!(dml_beta > 0.0) || !(dml_epsilon0 > 0.0)) {
    throw ConfigError("config: dml_beta and dml_epsilon0 must be positive");
  }
  for (double lr : {lr_encoder, lr_actor, lr_critic, lr_gan, lr_behavior}) {
    if (!(lr >= 0.0)) throw ConfigError("config: learning rates must be >= 0");
  }
  if (!(alpha >= 0.0)) throw ConfigError("config: alpha must be >= 0");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("config: gamma must lie in [0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("config: tau must lie in (0, 1]");
  for (const auto* widths : {&encoder_hidden, &generator_hidden, &discriminator_hidden,
                             &actor_hidden, &critic_hidden, &behavior_hidden}) {
    if (widths->empty()) throw ConfigError("config: hidden width lists must be non-empty");
    for (int w : *widths) positive(w, "hidden width");
  }
  if (eval_seeds.empty()) throw ConfigError("config: eval_seeds must be non-empty");
}

void SetTrainConfigValue(TrainConfig* c, std::string_view key, std::string_view value) {
  value = Trim(value);
  if (key == "data_dir") c->data_dir = std::string(value);
  else if (key == "family") c->family = ParseFamily(value);
  else if (key == "tasks_train") c->tasks_train = ParseInteger<int>(key, value);
  else if (key == "tasks_id") c->tasks_id = ParseInteger<int>(key, value);
  else if (key == "tasks_ood") c->tasks_ood = ParseInteger<int>(key, value);
  else if (key == "meta_batch") c->meta_batch = ParseInteger<int>(key, value);
  else if (key == "batch_size") c->batch_size = ParseInteger<int>(key, value);
  else if (key == "context_size") c->context_size = ParseInteger<int>(key, value);
  else if (key == "latent_dim") c->latent_dim = ParseInteger<int>(key, value);
  else if (key == "gan_updates_per_step") c->gan_updates_per_step = ParseInteger<int>(key, value);
  else if (key == "noise_dim") c->noise_dim = ParseInteger<int>(key, value);
  else if (key == "lambda_dml") c->lambda_dml = ParseReal(key, value);
  else if (key == "dml_beta") c->dml_beta = ParseReal(key, value);
  else if (key == "dml_epsilon0") c->dml_epsilon0 = ParseReal(key, value);
  else if (key == "mi_enabled") c->mi_enabled = ParseBool(key, value);
  else if (key == "lr_encoder") c->lr_encoder = ParseReal(key, value);
  else if (key == "lr_actor") c->lr_actor = ParseReal(key, value);
  else if (key == "lr_critic") c->lr_critic = ParseReal(key, value);
  else if (key == "lr_gan") c->lr_gan = ParseReal(key, value);
  else if (key == "lr_behavior") c->lr_behavior = ParseReal(key, value);
  else if (key == "alpha") c->alpha = ParseReal(key, value);
  else if (key == "gamma") c->gamma = ParseReal(key, value);
  else if (key == "tau") c->tau = ParseReal(key, value);
  else if (key == "encoder_hidden") c->encoder_hidden = ParseList<int>(key, value);
  else if (key == "generator_hidden") c->generator_hidden = ParseList<int>(key, value);
  else if (key == "discriminator_hidden") c->discriminator_hidden = ParseList<int>(key, value);
  else if (key == "actor_hidden") c->actor_hidden = ParseList<int>(key, value);
  else if (key == "critic_hidden") c->critic_hidden = ParseList<int>(key, value);
  else if (key == "behavior_hidden") c->behavior_hidden = ParseList<int>(key, value);
  else if (key == "total_steps") c->total_steps = ParseInteger<std::int64_t>(key, value);
  else if (key == "eval_every") c->eval_every = ParseInteger<std::int64_t>(key, value);
  else if (key == "checkpoint_every") c->checkpoint_every = ParseInteger<std::int64_t>(key, value);
  else if (key == "eval_episodes") c->eval_episodes = ParseInteger<int>(key, value);
  else if (key == "eval_seeds") c->eval_seeds = ParseList<std::int64_t>(key, value);
  else if (key == "eval_strategies") c->eval_strategies = std::string(value);
  else if (key == "seed") c->seed = ParseInteger<std::uint64_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

TrainConfig ParseTrainConfig(std::string_view text) {
  TrainConfig config;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("config key '" + std::string(key) + "' given twice");
    }
    SetTrainConfigValue(&config, key, line.substr(eq + 1));
  }
  config.Validate();
  return config;
}

TrainConfig LoadTrainConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseTrainConfig(ss.str());
}

std::string FormatTrainConfig(const TrainConfig& c) {
  std::ostringstream out;
  out << "data_dir = " << c.data_dir << '\n'
      << "family = " << FamilyName(c.family) << '\n'
      << "tasks_train = " << c.tasks_train << '\n'
      << "tasks_id = " << c.tasks_id << '\n'
      << "tasks_ood = " << c.tasks_ood << '\n'
      << "meta_batch = " << c.meta_batch << '\n'
      << "batch_size = " << c.batch_size << '\n'
      << "context_size = " << c.context_size << '\n'
      << "latent_dim = " << c.latent_dim << '\n'
      << "gan_updates_per_step = " << c.gan_updates_per_step << '\n'
      << "noise_dim = " << c.noise_dim << '\n'
      << "lambda_dml = " << Real(c.lambda_dml) << '\n'
      << "dml_beta = " << Real(c.dml_beta) << '\n'
      << "dml_epsilon0 = " << Real(c.dml_epsilon0) << '\n'
      << "mi_enabled = " << (c.mi_enabled ? "true" : "false") << '\n'
      << "lr_encoder = " << Real(c.lr_encoder) << '\n'
      << "lr_actor = " << Real(c.lr_actor) << '\n'
      << "lr_critic = " << Real(c.lr_critic) << '\n'
      << "lr_gan = " << Real(c.lr_gan) << '\n'
      << "lr_behavior = " << Real(c.lr_behavior) << '\n'
      << "alpha = " << Real(c.alpha) << '\n'
      << "gamma = " << Real(c.gamma) << '\n'
      << "tau = " << Real(c.tau) << '\n'
      << "encoder_hidden = " << List(c.encoder_hidden) << '\n'
      << "generator_hidden = " << List(c.generator_hidden) << '\n'
      << "discriminator_hidden = " << List(c.discriminator_hidden) << '\n'
      << "actor_hidden = " << List(c.actor_hidden) << '\n'
      << "critic_hidden = " << List(c.critic_hidden) << '\n'
      << "behavior_hidden = " << List(c.behavior_hidden) << '\n'
      << "total_steps = " << c.total_steps << '\n'
      << "eval_every = " << c.eval_every << '\n'
      << "checkpoint_every = " << c.checkpoint_every << '\n'
      << "eval_episodes = " << c.eval_episodes << '\n'
      << "eval_seeds = " << List(c.eval_seeds) << '\n'
      << "eval_strategies = " << c.eval_strategies << '\n'
      << "seed = " << c.seed << '\n';
  return out.str();
}

bool operator==(const TrainConfig& a, const TrainConfig& b) {
  return FormatTrainConfig(a) == FormatTrainConfig(b);
}

}  // namespace ertrl
