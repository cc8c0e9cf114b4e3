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

#ifndef ERTRL_CHECKPOINT_H_
#define ERTRL_CHECKPOINT_H_

#include <filesystem>

#include "ertrl/trainer.h"

namespace ertrl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout: 8-byte magic, u32 version, u64 metadata length, JSON
// metadata, then the float64 tensors listed in the metadata, in order.
// Written to a temporary file and renamed into place.
void SaveCheckpoint(const TrainState& state, const std::filesystem::path& path);
// Throws CheckpointError on bad magic, version mismatch or missing tensors.
TrainState LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ertrl

#endif  // ERTRL_CHECKPOINT_H_
