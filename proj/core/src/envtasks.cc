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

#include "ertrl/envtasks.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kExpertGain = 2.0;
constexpr double kDirCruiseSpeed = 1.5;
constexpr double kGoalCruiseSpeed = 1.0;
constexpr double kInitialSpread = 0.1;

// A parameter interval; open ends mark the boundary an OOD range shares with
// the closed ID range.
struct Interval {
  double lo;
  double hi;
  bool lo_open = false;
  bool hi_open = false;

  bool Contains(double x) const {
    const bool above = lo_open ? x > lo : x >= lo;
    const bool below = hi_open ? x < hi : x <= hi;
    return above && below;
  }
};

std::vector<Interval> ScalarRange(Family family, Split split) {
  const bool ood = split == Split::kOodTest;
  switch (family) {
    case Family::kPointVel:
      if (!ood) return {{1.0, 2.0}};
      return {{0.5, 1.0, false, true}, {2.0, 2.5, true, false}};
    case Family::kPointDir:
      if (!ood) return {{-kPi / 2, kPi / 2}};
      return {{-3 * kPi / 4, -kPi / 2, false, true},
              {kPi / 2, 3 * kPi / 4, true, false}};
    case Family::kPointMass:
    case Family::kPointFriction:
      if (!ood) return {{-1.0, 1.0}};
      return {{-1.5, -1.0, false, true}, {1.0, 1.5, true, false}};
    case Family::kPointGoal:
      break;
  }
  throw ConfigError("no scalar range for point-goal");
}

std::vector<double> GoalRadii(Split split) {
  if (split == Split::kOodTest) return {1.6};
  return {0.8, 1.2};
}

double SampleFromUnion(const std::vector<Interval>& parts, Rng& rng) {
  double total = 0.0;
  for (const auto& p : parts) total += p.hi - p.lo;
  double pick = Uniform(rng, 0.0, total);
  const Interval* chosen = &parts.back();
  for (const auto& p : parts) {
    if (pick < p.hi - p.lo) {
      chosen = &p;
      break;
    }
    pick -= p.hi - p.lo;
  }
  const double u = Uniform(rng, 0.0, 1.0);  // [0, 1)
  const double width = chosen->hi - chosen->lo;
  // Draw away from the open end.
  if (chosen->lo_open) return chosen->hi - u * width;
  return chosen->lo + u * width;
}

float Clip(double x, double bound) {
  return static_cast<float>(std::clamp(x, -bound, bound));
}

}  // namespace

std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kPointVel: return "point-vel";
    case Family::kPointDir: return "point-dir";
    case Family::kPointGoal: return "point-goal";
    case Family::kPointMass: return "point-mass";
    case Family::kPointFriction: return "point-friction";
  }
  return "unknown";
}

Family ParseFamily(std::string_view name) {
  for (Family f : {Family::kPointVel, Family::kPointDir, Family::kPointGoal,
                   Family::kPointMass, Family::kPointFriction}) {
    if (FamilyName(f) == name) return f;
  }
  throw ConfigError("unknown environment family '" + std::string(name) + "'");
}

std::string_view SplitName(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kIdTest: return "id-test";
    case Split::kOodTest: return "ood-test";
  }
  return "unknown";
}

Split ParseSplit(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "id-test" || name == "id") return Split::kIdTest;
  if (name == "ood-test" || name == "ood") return Split::kOodTest;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

bool GoalParamsInSplit(const TaskSpec& task, Split split) {
  if (task.family == Family::kPointGoal) {
    if (task.goal_params.size() != 2) return false;
    const double radius = std::hypot(task.goal_params[0], task.goal_params[1]);
    const double angle = std::atan2(task.goal_params[1], task.goal_params[0]);
    constexpr double kSlack = 1e-9;
    if (angle < -kPi / 2 - kSlack || angle > kPi / 2 + kSlack) return false;
    for (double r : GoalRadii(split)) {
      if (std::abs(radius - r) < kSlack) return true;
    }
    return false;
  }
  if (task.goal_params.size() != 1) return false;
  for (const auto& part : ScalarRange(task.family, split)) {
    if (part.Contains(task.goal_params[0])) return true;
  }
  return false;
}

void ValidateTask(const TaskSpec& task) {
  if (!(task.mass_scale > 0.0) || !(task.friction_scale > 0.0)) {
    throw ConfigError("task " + std::to_string(task.task_id) +
                      ": mass and friction scales must be positive");
  }
  if (task.discount < 0.0 || task.discount > 1.0) {
    throw ConfigError("task " + std::to_string(task.task_id) +
                      ": discount must lie in [0, 1]");
  }
  if (!GoalParamsInSplit(task, task.split)) {
    throw ConfigError("task " + std::to_string(task.task_id) + ": goal parameters "
                      "outside the " + std::string(SplitName(task.split)) +
                      " range of " + std::string(FamilyName(task.family)));
  }
}

std::vector<TaskSpec> SampleTaskSet(Family family, Split split, int count,
                                    std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("SampleTaskSet: count must be >= 1");
  Rng rng = MakeRng(seed, {static_cast<std::uint64_t>(family),
                           static_cast<std::uint64_t>(split)});
  std::vector<TaskSpec> tasks;
  tasks.reserve(count);
  for (int i = 0; i < count; ++i) {
    TaskSpec task;
    task.family = family;
    task.split = split;
    task.task_id = i;
    if (family == Family::kPointGoal) {
      const auto radii = GoalRadii(split);
      const auto k = std::uniform_int_distribution<std::size_t>(0, radii.size() - 1)(rng);
      const double angle = Uniform(rng, -kPi / 2, kPi / 2);
      task.goal_params = {radii[k] * std::cos(angle), radii[k] * std::sin(angle)};
    } else {
      const double value = SampleFromUnion(ScalarRange(family, split), rng);
      task.goal_params = {value};
      if (family == Family::kPointMass) task.mass_scale = std::pow(kScaleBase, value);
      if (family == Family::kPointFriction) {
        task.friction_scale = std::pow(kScaleBase, value);
      }
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

std::vector<TaskSpec> SampleTaskSuite(Family family, int train, int id_test, int ood_test,
                                      std::uint64_t seed) {
  std::vector<TaskSpec> out;
  for (const auto& [split, count] : {std::pair{Split::kTrain, train},
                                     std::pair{Split::kIdTest, id_test},
                                     std::pair{Split::kOodTest, ood_test}}) {
    if (count == 0) continue;
    for (TaskSpec& t : SampleTaskSet(family, split, count, seed)) {
      t.task_id = static_cast<int>(out.size());
      out.push_back(std::move(t));
    }
  }
  return out;
}

EnvState Reset(const TaskSpec& /*task*/, std::uint64_t seed) {
  Rng rng = MakeRng(seed, {0x7265736574ULL});
  EnvState s;
  s.position[0] = static_cast<float>(Uniform(rng, -kInitialSpread, kInitialSpread));
  s.position[1] = static_cast<float>(Uniform(rng, -kInitialSpread, kInitialSpread));
  return s;
}

StepResult Step(const EnvState& state, const Action& action, const TaskSpec& task) {
  std::array<double, 2> a{};
  for (int k = 0; k < 2; ++k) {
    a[k] = std::clamp(static_cast<double>(action[k]), -1.0, 1.0);
    if (a[k] != static_cast<double>(action[k])) {
      spdlog::debug("task {}: clipped action component {} = {}", task.task_id, k,
                    action[k]);
    }
  }
  const double drag = 1.0 - kBaseFriction * task.friction_scale * kTimeStep;
  const double gain = kTimeStep / task.mass_scale;

  StepResult out;
  out.state.step_index = state.step_index + 1;
  for (int k = 0; k < 2; ++k) {
    out.state.velocity[k] = Clip(drag * state.velocity[k] + gain * a[k], kMaxSpeed);
    out.state.position[k] = static_cast<float>(
        static_cast<double>(state.position[k]) +
        kTimeStep * static_cast<double>(out.state.velocity[k]));
  }

  const double vx = out.state.velocity[0];
  const double vy = out.state.velocity[1];
  const double penalty = kActionPenalty * (a[0] * a[0] + a[1] * a[1]);
  double reward = 0.0;
  switch (task.family) {
    case Family::kPointVel:
      reward = -std::abs(vx - task.goal_params.at(0)) - penalty;
      break;
    case Family::kPointDir: {
      const double theta = task.goal_params.at(0);
      reward = vx * std::cos(theta) + vy * std::sin(theta) - penalty;
      break;
    }
    case Family::kPointGoal:
      reward = -std::hypot(out.state.position[0] - task.goal_params.at(0),
                           out.state.position[1] - task.goal_params.at(1));
      break;
    case Family::kPointMass:
    case Family::kPointFriction:
      reward = vx - penalty;
      break;
  }
  out.reward = static_cast<float>(reward);
  return out;
}

GaussianPolicyHead ExpertPolicy(const State& obs, const TaskSpec& task,
                                double noise_scale) {
  if (noise_scale < 0.0) {
    throw std::invalid_argument("ExpertPolicy: noise_scale must be >= 0");
  }
  const double px = obs[0], py = obs[1], vx = obs[2], vy = obs[3];
  double ex = 0.0, ey = 0.0;
  switch (task.family) {
    case Family::kPointVel:
      ex = task.goal_params.at(0) - vx;
      ey = -vy;
      break;
    case Family::kPointMass:
    case Family::kPointFriction:
      ex = kMaxSpeed - vx;
      ey = -vy;
      break;
    case Family::kPointDir: {
      const double theta = task.goal_params.at(0);
      ex = kDirCruiseSpeed * std::cos(theta) - vx;
      ey = kDirCruiseSpeed * std::sin(theta) - vy;
      break;
    }
    case Family::kPointGoal: {
      double dx = task.goal_params.at(0) - px;
      double dy = task.goal_params.at(1) - py;
      const double dist = std::hypot(dx, dy);
      if (dist > kGoalCruiseSpeed) {
        dx *= kGoalCruiseSpeed / dist;
        dy *= kGoalCruiseSpeed / dist;
      }
      ex = dx - vx;
      ey = dy - vy;
      break;
    }
  }
  GaussianPolicyHead head;
  head.mean.resize(kActionDim);
  head.mean << std::clamp(kExpertGain * ex, -1.0, 1.0),
      std::clamp(kExpertGain * ey, -1.0, 1.0);
  head.covariance = Eigen::MatrixXd::Identity(kActionDim, kActionDim) *
                    (noise_scale * noise_scale);
  return head;
}

Action SampleAction(const GaussianPolicyHead& head, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Action a{};
  for (int k = 0; k < kActionDim; ++k) {
    const double sd = std::sqrt(std::max(0.0, head.covariance(k, k)));
    const double x = sd > 0.0 ? head.mean(k) + sd * normal(rng) : head.mean(k);
    a[k] = static_cast<float>(std::clamp(x, -1.0, 1.0));
  }
  return a;
}

std::vector<double> GoalLabel(const TaskSpec& task) {
  switch (task.family) {
    case Family::kPointVel:
    case Family::kPointDir:
      return {task.goal_params.at(0)};
    case Family::kPointGoal:
      return {task.goal_params.at(0), task.goal_params.at(1)};
    case Family::kPointMass:
      return {std::log(task.mass_scale) / std::log(kScaleBase)};
    case Family::kPointFriction:
      return {std::log(task.friction_scale) / std::log(kScaleBase)};
  }
  return {};
}

Policy MakeExpertPolicy(const TaskSpec& task, double noise_scale) {
  return [task, noise_scale](const State& obs, Rng& rng) {
    return SampleAction(ExpertPolicy(obs, task, noise_scale), rng);
  };
}

Policy MakeRandomPolicy() {
  return [](const State&, Rng& rng) {
    return Action{static_cast<float>(Uniform(rng, -1.0, 1.0)),
                  static_cast<float>(Uniform(rng, -1.0, 1.0))};
  };
}

PointEnv::PointEnv(TaskSpec task, int episode_length)
    : task_(std::move(task)), episode_length_(episode_length) {
  if (episode_length_ < 1) {
    throw std::invalid_argument("PointEnv: episode_length must be >= 1");
  }
}

const EnvState& PointEnv::Reset(std::uint64_t seed) {
  state_ = ertrl::Reset(task_, seed);
  return state_;
}

Transition PointEnv::Step(const Action& action) {
  Transition t;
  t.state = state_.observation();
  for (int k = 0; k < kActionDim; ++k) {
    t.action[k] = std::clamp(action[k], -1.0f, 1.0f);
  }
  const StepResult r = ertrl::Step(state_, t.action, task_);
  state_ = r.state;
  ++steps_taken_;
  t.reward = r.reward;
  t.next_state = state_.observation();
  t.done = state_.step_index >= episode_length_;
  return t;
}

double RunEpisode(PointEnv& env, const Policy& policy, std::uint64_t reset_seed,
                  Rng& rng, std::vector<Transition>* out) {
  env.Reset(reset_seed);
  double total = 0.0;
  while (!env.episode_done()) {
    const Transition t = env.Step(policy(env.state().observation(), rng));
    total += t.reward;
    if (out != nullptr) out->push_back(t);
  }
  return total;
}

double MeanEpisodeReturn(const TaskSpec& task, const Policy& policy, int episodes,
                         std::uint64_t seed, int episode_length) {
  if (episodes < 1) {
    throw std::invalid_argument("MeanEpisodeReturn: episodes must be >= 1");
  }
  PointEnv env(task, episode_length);
  Rng rng = MakeRng(seed, {static_cast<std::uint64_t>(task.task_id), 0x6d6572ULL});
  double total = 0.0;
  for (int e = 0; e < episodes; ++e) total += RunEpisode(env, policy, NextSeed(rng), rng);
  return total / episodes;
}

}  // namespace ertrl
