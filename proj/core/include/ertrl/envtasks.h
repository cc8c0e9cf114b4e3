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

#ifndef ERTRL_ENVTASKS_H_
#define ERTRL_ENVTASKS_H_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ertrl/rng.h"

namespace ertrl {

// Synthetic 2-D point-robot task families. The first three vary the reward
// function across tasks; point-mass and point-friction vary the dynamics.
enum class Family { kPointVel, kPointDir, kPointGoal, kPointMass, kPointFriction };

enum class Split { kTrain, kIdTest, kOodTest };

std::string_view FamilyName(Family family);
Family ParseFamily(std::string_view name);  // throws ConfigError
std::string_view SplitName(Split split);
Split ParseSplit(std::string_view name);  // accepts "id"/"ood" shorthands

inline constexpr int kStateDim = 4;
inline constexpr int kActionDim = 2;
// Encoder input: state | action | reward | next_state.
inline constexpr int kTransitionFeatureDim = 2 * kStateDim + kActionDim + 1;
inline constexpr int kDefaultEpisodeLength = 64;
inline constexpr double kTimeStep = 0.1;
inline constexpr double kMaxSpeed = 2.0;
inline constexpr double kBaseFriction = 0.5;
inline constexpr double kScaleBase = 1.5;
inline constexpr double kActionPenalty = 0.01;

struct TaskSpec {
  Family family = Family::kPointVel;
  // point-vel: {target velocity}; point-dir: {angle}; point-goal: {gx, gy};
  // point-mass / point-friction: {base-1.5 scale exponent}.
  std::vector<double> goal_params;
  double mass_scale = 1.0;
  double friction_scale = 1.0;
  double discount = 0.99;
  Split split = Split::kTrain;
  int task_id = 0;
};

using State = std::array<float, kStateDim>;
using Action = std::array<float, kActionDim>;

// Held at float32 precision so that recorded transitions replay exactly.
struct EnvState {
  std::array<float, 2> position{};
  std::array<float, 2> velocity{};
  int step_index = 0;

  State observation() const {
    return {position[0], position[1], velocity[0], velocity[1]};
  }
};

struct Transition {
  State state{};
  Action action{};
  float reward = 0.0f;
  State next_state{};
  bool done = false;
};

struct GaussianPolicyHead {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

struct StepResult {
  EnvState state;
  float reward = 0.0f;
};

// Throws ConfigError when the task violates its family/split ranges.
void ValidateTask(const TaskSpec& task);

// True when goal_params lie in the declared range of `split` for the family.
bool GoalParamsInSplit(const TaskSpec& task, Split split);

std::vector<TaskSpec> SampleTaskSet(Family family, Split split, int count,
                                    std::uint64_t seed);

// Train, ID and OOD task sets with task ids numbered consecutively across
// the three splits (train first).
std::vector<TaskSpec> SampleTaskSuite(Family family, int train, int id_test, int ood_test,
                                      std::uint64_t seed);

EnvState Reset(const TaskSpec& task, std::uint64_t seed);

// Deterministic dynamics. Out-of-range actions are clipped to [-1, 1].
StepResult Step(const EnvState& state, const Action& action, const TaskSpec& task);

// Scripted proportional controller with isotropic Gaussian noise.
GaussianPolicyHead ExpertPolicy(const State& observation, const TaskSpec& task,
                                double noise_scale);

// Draws from a policy head and clips into the action box.
Action SampleAction(const GaussianPolicyHead& head, Rng& rng);

std::vector<double> GoalLabel(const TaskSpec& task);

// Policies see the observation only; stochastic ones draw from `rng`.
using Policy = std::function<Action(const State& observation, Rng& rng)>;

Policy MakeExpertPolicy(const TaskSpec& task, double noise_scale);
Policy MakeRandomPolicy();

// Stateful wrapper over Reset/Step that tracks an episode and counts every
// environment step it performs.
class PointEnv {
 public:
  explicit PointEnv(TaskSpec task, int episode_length = kDefaultEpisodeLength);

  const EnvState& Reset(std::uint64_t seed);
  Transition Step(const Action& action);

  const TaskSpec& task() const { return task_; }
  const EnvState& state() const { return state_; }
  int episode_length() const { return episode_length_; }
  bool episode_done() const { return state_.step_index >= episode_length_; }
  std::int64_t steps_taken() const { return steps_taken_; }

 private:
  TaskSpec task_;
  int episode_length_;
  EnvState state_;
  std::int64_t steps_taken_ = 0;
};

// Runs one full episode; appends transitions to `out` when non-null and
// returns the undiscounted return.
double RunEpisode(PointEnv& env, const Policy& policy, std::uint64_t reset_seed,
                  Rng& rng, std::vector<Transition>* out = nullptr);

// Mean undiscounted return of `policy` over `episodes` episodes.
double MeanEpisodeReturn(const TaskSpec& task, const Policy& policy, int episodes,
                         std::uint64_t seed,
                         int episode_length = kDefaultEpisodeLength);

}  // namespace ertrl

#endif  // ERTRL_ENVTASKS_H_
