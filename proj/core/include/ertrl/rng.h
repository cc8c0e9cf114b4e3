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

#ifndef ERTRL_RNG_H_
#define ERTRL_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>

#include <Eigen/Core>

namespace ertrl {

using Rng = std::mt19937_64;

// Derives an independent stream from a root seed and a list of stream tags,
// e.g. MakeRng(seed, {task_id, kEpisodeStream}).
Rng MakeRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

// Draws a fresh 64-bit seed from `rng`.
std::uint64_t NextSeed(Rng& rng);

// Fills a rows x cols matrix with N(0, 1) draws.
Eigen::MatrixXd StandardNormal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

double Uniform(Rng& rng, double lo, double hi);

// Textual engine state, used by checkpoints.
std::string SerializeRng(const Rng& rng);
Rng DeserializeRng(const std::string& text);

}  // namespace ertrl

#endif  // ERTRL_RNG_H_
