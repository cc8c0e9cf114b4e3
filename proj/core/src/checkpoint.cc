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

#include "ertrl/checkpoint.h"

#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

constexpr char kMagic[8] = {'E', 'R', 'T', 'R', 'L', 'C', 'K', 'P'};

struct NetSlot {
  std::string name;
  nn::Mlp* net;
  nn::Adam* opt;  // may be null
};

std::vector<NetSlot> Slots(TrainState& s) {
  return {
      {"encoder", &s.encoder.network(), &s.encoder_optimizer},
      {"generator", &s.gan.generator().network(), &s.gan.generator_optimizer()},
      {"discriminator", &s.gan.discriminator().network(),
       &s.gan.discriminator_optimizer()},
      {"actor", &s.agent.actor().network(), &s.agent.actor_optimizer()},
      {"critic", &s.agent.critic().network(), &s.agent.critic_optimizer()},
      {"target_critic", &s.agent.target_critic().network(), nullptr},
      {"behavior", &s.agent.behavior().network(), &s.agent.behavior_optimizer()},
  };
}

template <typename T>
void WritePod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in, const std::string& what) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw CheckpointError("checkpoint truncated while reading " + what);
  }
  return value;
}

}  // namespace

void SaveCheckpoint(const TrainState& state, const std::filesystem::path& path) {
  // Slots() needs mutable access only to hand out pointers; nothing is written.
  TrainState& s = const_cast<TrainState&>(state);
  std::vector<std::pair<std::string, nn::Vector>> tensors;
  nlohmann::json meta;
  meta["version"] = kCheckpointVersion;
  meta["step"] = state.step;
  meta["config"] = FormatTrainConfig(state.config);
  meta["rng"] = SerializeRng(state.rng);
  for (const NetSlot& slot : Slots(s)) {
    tensors.emplace_back(slot.name, slot.net->Flatten());
    if (slot.opt != nullptr) {
      tensors.emplace_back(slot.name + ".adam.m", slot.opt->first_moment());
      tensors.emplace_back(slot.name + ".adam.v", slot.opt->second_moment());
      meta["adam_steps"][slot.name] = slot.opt->step_count();
    }
  }
  for (const auto& [name, t] : tensors) {
    meta["tensors"].push_back({{"name", name}, {"size", t.size()}});
  }
  const std::string text = meta.dump();

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    WritePod<std::uint32_t>(out, kCheckpointVersion);
    WritePod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : tensors) {
      out.write(reinterpret_cast<const char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

TrainState LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  const auto version = ReadPod<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint version " + std::to_string(version) +
                          " is not supported (expected " +
                          std::to_string(kCheckpointVersion) + ")");
  }
  const auto meta_size = ReadPod<std::uint64_t>(in, "metadata length");
  std::string text(meta_size, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(meta_size))) {
    throw CheckpointError("checkpoint truncated while reading metadata");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata: ") + e.what());
  }

  std::map<std::string, nn::Vector> tensors;
  try {
    for (const auto& entry : meta.at("tensors")) {
      const auto name = entry.at("name").get<std::string>();
      const auto size = entry.at("size").get<Eigen::Index>();
      nn::Vector t(size);
      if (!in.read(reinterpret_cast<char*>(t.data()),
                   static_cast<std::streamsize>(size * sizeof(double)))) {
        throw CheckpointError("checkpoint truncated in tensor " + name);
      }
      tensors[name] = std::move(t);
    }

    TrainState s = InitTrainState(ParseTrainConfig(meta.at("config").get<std::string>()));
    s.step = meta.at("step").get<std::int64_t>();
    s.rng = DeserializeRng(meta.at("rng").get<std::string>());
    auto fetch = [&tensors](const std::string& name, Eigen::Index size) -> const nn::Vector& {
      const auto it = tensors.find(name);
      if (it == tensors.end()) throw CheckpointError("checkpoint is missing tensor " + name);
      if (it->second.size() != size) {
        throw CheckpointError("checkpoint tensor " + name + " has the wrong size");
      }
      return it->second;
    };
    for (const NetSlot& slot : Slots(s)) {
      const Eigen::Index n = slot.net->parameter_count();
      slot.net->Unflatten(fetch(slot.name, n));
      if (slot.opt != nullptr) {
        slot.opt->Restore(fetch(slot.name + ".adam.m", n), fetch(slot.name + ".adam.v", n),
                          meta.at("adam_steps").at(slot.name).get<std::int64_t>());
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint config: ") + e.what());
  }
}

}  // namespace ertrl
