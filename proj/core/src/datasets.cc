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

#include "ertrl/datasets.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>
#include <zlib.h>

#include "ertrl/errors.h"

namespace ertrl {
namespace {

using json = nlohmann::json;

constexpr std::uint64_t kExpertStream = 0x657870ULL;
constexpr std::uint64_t kAnchorStream = 0x616e63ULL;

std::uint32_t Crc32(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string EncodeRows(const TransitionTable& table) {
  std::string bytes(static_cast<std::size_t>(table.rows()) * kRowStride, '\0');
  std::memcpy(bytes.data(), table.data(), bytes.size());
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::reverse(bytes.begin() + i, bytes.begin() + i + 4);
    }
  }
  return bytes;
}

TransitionTable DecodeRows(std::string bytes) {
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < bytes.size(); i += 4) {
      std::reverse(bytes.begin() + i, bytes.begin() + i + 4);
    }
  }
  TransitionTable table(static_cast<Eigen::Index>(bytes.size() / kRowStride),
                        kRowFloats);
  std::memcpy(table.data(), bytes.data(), bytes.size());
  return table;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void WriteFile(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string TaskFileName(int task_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "task_%03d.bin", task_id);
  return buf;
}

json TaskToJson(const TaskSpec& t) {
  return json{{"task_id", t.task_id},
              {"split", SplitName(t.split)},
              {"goal_params", t.goal_params},
              {"mass_scale", t.mass_scale},
              {"friction_scale", t.friction_scale},
              {"discount", t.discount}};
}

TaskSpec TaskFromJson(const json& j, Family family) {
  TaskSpec t;
  t.family = family;
  t.task_id = j.at("task_id").get<int>();
  t.split = ParseSplit(j.at("split").get<std::string>());
  t.goal_params = j.at("goal_params").get<std::vector<double>>();
  t.mass_scale = j.at("mass_scale").get<double>();
  t.friction_scale = j.at("friction_scale").get<double>();
  t.discount = j.at("discount").get<double>();
  return t;
}

}  // namespace

TransitionTable ToTable(const std::vector<Transition>& transitions) {
  TransitionTable table(static_cast<Eigen::Index>(transitions.size()), kRowFloats);
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const Transition& t = transitions[i];
    auto r = table.row(static_cast<Eigen::Index>(i));
    for (int k = 0; k < kStateDim; ++k) r(row::kState + k) = t.state[k];
    for (int k = 0; k < kActionDim; ++k) r(row::kAction + k) = t.action[k];
    r(row::kReward) = t.reward;
    for (int k = 0; k < kStateDim; ++k) r(row::kNextState + k) = t.next_state[k];
    r(row::kDone) = t.done ? 1.0f : 0.0f;
  }
  return table;
}

Transition RowToTransition(const TransitionTable& table, Eigen::Index i) {
  Transition t;
  auto r = table.row(i);
  for (int k = 0; k < kStateDim; ++k) t.state[k] = r(row::kState + k);
  for (int k = 0; k < kActionDim; ++k) t.action[k] = r(row::kAction + k);
  t.reward = r(row::kReward);
  for (int k = 0; k < kStateDim; ++k) t.next_state[k] = r(row::kNextState + k);
  t.done = r(row::kDone) != 0.0f;
  return t;
}

std::vector<const TaskDataset*> DatasetCollection::Split(ertrl::Split split) const {
  std::vector<const TaskDataset*> out;
  for (const auto& d : tasks) {
    if (d.task.split == split) out.push_back(&d);
  }
  return out;
}

const TaskDataset& DatasetCollection::ByTaskId(int task_id) const {
  for (const auto& d : tasks) {
    if (d.task.task_id == task_id) return d;
  }
  throw std::invalid_argument("no dataset for task " + std::to_string(task_id));
}

std::vector<double> DefaultNoiseMix() { return {0.1, 0.3, 0.5}; }

TaskDataset GenerateTaskDataset(const TaskSpec& task, int transitions_per_task,
                                const std::vector<double>& noise_mix,
                                std::uint64_t seed, int episode_length) {
  if (transitions_per_task < episode_length) {
    throw std::invalid_argument("GenerateTaskDataset: transitions_per_task must be "
                                ">= episode_length");
  }
  if (noise_mix.empty()) {
    throw std::invalid_argument("GenerateTaskDataset: empty noise mix");
  }
  ValidateTask(task);

  TaskDataset ds;
  ds.task = task;
  std::vector<Transition> rows;
  rows.reserve(transitions_per_task);

  PointEnv env(task, episode_length);
  Rng rng = MakeRng(seed, {static_cast<std::uint64_t>(task.task_id), kExpertStream});
  const int k = static_cast<int>(noise_mix.size());
  std::vector<Transition> episode;
  for (int s = 0; s < k; ++s) {
    const int share = transitions_per_task / k + (s < transitions_per_task % k ? 1 : 0);
    BehaviorSegment seg;
    seg.noise_scale = noise_mix[s];
    seg.row_begin = static_cast<std::int64_t>(rows.size());
    const Policy expert = MakeExpertPolicy(task, noise_mix[s]);
    int collected = 0;
    while (collected < share) {
      episode.clear();
      RunEpisode(env, expert, NextSeed(rng), rng, &episode);
      const int take = std::min<int>(share - collected, static_cast<int>(episode.size()));
      rows.insert(rows.end(), episode.begin(), episode.begin() + take);
      collected += take;
    }
    seg.row_end = static_cast<std::int64_t>(rows.size());
    ds.behavior_heads.push_back(seg);
  }
  ds.transitions = ToTable(rows);

  const std::uint64_t anchor_seed =
      MakeRng(seed, {static_cast<std::uint64_t>(task.task_id), kAnchorStream})();
  ds.random_return = MeanEpisodeReturn(task, MakeRandomPolicy(), kAnchorEpisodes,
                                       anchor_seed, episode_length);
  ds.expert_return =
      MeanEpisodeReturn(task, MakeExpertPolicy(task, kAnchorExpertNoise),
                        kAnchorEpisodes, anchor_seed + 1, episode_length);
  if (!(ds.random_return < ds.expert_return)) {
    throw ComputationError("task " + std::to_string(task.task_id) +
                           ": random return " + std::to_string(ds.random_return) +
                           " is not below expert return " +
                           std::to_string(ds.expert_return));
  }
  return ds;
}

DatasetCollection GenerateDataset(const std::vector<TaskSpec>& tasks,
                                  int transitions_per_task,
                                  const std::vector<double>& noise_mix,
                                  std::uint64_t seed,
                                  const std::filesystem::path& out_dir,
                                  int episode_length) {
  if (tasks.empty()) throw std::invalid_argument("GenerateDataset: no tasks");
  DatasetCollection c;
  c.manifest.family = tasks.front().family;
  c.manifest.seed = seed;
  c.manifest.episode_length = episode_length;
  c.manifest.noise_mix = noise_mix;
  for (const auto& task : tasks) {
    if (task.family != c.manifest.family) {
      throw std::invalid_argument("GenerateDataset: mixed task families");
    }
    spdlog::info("generating task {} ({}, {} rows)", task.task_id,
                 SplitName(task.split), transitions_per_task);
    c.tasks.push_back(GenerateTaskDataset(task, transitions_per_task, noise_mix,
                                          seed, episode_length));
  }
  c.manifest = SaveDataset(c, out_dir);
  return c;
}

DatasetManifest SaveDataset(const DatasetCollection& collection,
                            const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  DatasetManifest m = collection.manifest;
  m.format_version = kDatasetFormatVersion;
  m.dtype = "float32-le";
  if (!collection.tasks.empty()) m.family = collection.tasks.front().task.family;
  m.tasks.clear();
  for (const auto& d : collection.tasks) {
    DatasetManifest::Entry e;
    e.task = d.task;
    e.file = TaskFileName(d.task.task_id);
    e.rows = d.size();
    const std::string bytes = EncodeRows(d.transitions);
    e.crc32 = Crc32(bytes);
    e.random_return = d.random_return;
    e.expert_return = d.expert_return;
    e.behavior_heads = d.behavior_heads;
    WriteFile(dir / e.file, bytes);
    m.tasks.push_back(std::move(e));
  }
  WriteFile(dir / "manifest.json", ManifestToJson(m));
  return m;
}

std::string ManifestToJson(const DatasetManifest& m) {
  json j;
  j["format_version"] = m.format_version;
  j["family"] = FamilyName(m.family);
  j["dtype"] = m.dtype;
  j["row_stride"] = kRowStride;
  j["row_layout"] = {"state[4]", "action[2]", "reward", "next_state[4]", "done"};
  j["seed"] = m.seed;
  j["episode_length"] = m.episode_length;
  j["noise_mix"] = m.noise_mix;
  j["tasks"] = json::array();
  for (const auto& e : m.tasks) {
    json t = TaskToJson(e.task);
    t["file"] = e.file;
    t["rows"] = e.rows;
    t["crc32"] = e.crc32;
    t["random_return"] = e.random_return;
    t["expert_return"] = e.expert_return;
    t["behavior_heads"] = json::array();
    for (const auto& b : e.behavior_heads) {
      t["behavior_heads"].push_back({{"noise_scale", b.noise_scale},
                                     {"row_begin", b.row_begin},
                                     {"row_end", b.row_end}});
    }
    j["tasks"].push_back(std::move(t));
  }
  return j.dump(2) + "\n";
}

DatasetManifest ManifestFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DatasetError(DatasetError::Kind::kMalformed,
                       std::string("manifest.json is not valid JSON: ") + e.what());
  }
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kDatasetFormatVersion) {
      throw DatasetError(DatasetError::Kind::kVersionMismatch,
                         "unsupported dataset format version " +
                             std::to_string(m.format_version) + " (expected " +
                             std::to_string(kDatasetFormatVersion) + ")");
    }
    m.dtype = j.at("dtype").get<std::string>();
    if (m.dtype != "float32-le" || j.at("row_stride").get<int>() != kRowStride) {
      throw DatasetError(DatasetError::Kind::kMalformed,
                         "unsupported dtype/row stride in manifest");
    }
    m.family = ParseFamily(j.at("family").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.episode_length = j.at("episode_length").get<int>();
    m.noise_mix = j.at("noise_mix").get<std::vector<double>>();
    for (const auto& t : j.at("tasks")) {
      DatasetManifest::Entry e;
      e.task = TaskFromJson(t, m.family);
      e.file = t.at("file").get<std::string>();
      e.rows = t.at("rows").get<std::int64_t>();
      e.crc32 = t.at("crc32").get<std::uint32_t>();
      e.random_return = t.at("random_return").get<double>();
      e.expert_return = t.at("expert_return").get<double>();
      for (const auto& b : t.at("behavior_heads")) {
        e.behavior_heads.push_back({b.at("noise_scale").get<double>(),
                                    b.at("row_begin").get<std::int64_t>(),
                                    b.at("row_end").get<std::int64_t>()});
      }
      m.tasks.push_back(std::move(e));
    }
    return m;
  } catch (const json::exception& e) {
    throw DatasetError(DatasetError::Kind::kMalformed,
                       std::string("malformed manifest.json: ") + e.what());
  }
}

DatasetCollection LoadDataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw IoError("missing dataset manifest " + manifest_path.string());
  }
  DatasetCollection c;
  c.manifest = ManifestFromJson(ReadFile(manifest_path));
  for (const auto& e : c.manifest.tasks) {
    const auto path = dir / e.file;
    std::string bytes = ReadFile(path);
    const std::int64_t expected_bytes = e.rows * kRowStride;
    const bool size_ok = static_cast<std::int64_t>(bytes.size()) == expected_bytes;
    const bool crc_ok = Crc32(bytes) == e.crc32;
    if (bytes.size() % kRowStride != 0 || (!crc_ok && !size_ok)) {
      throw DatasetError(DatasetError::Kind::kTruncated,
                         "task file " + path.string() + " is truncated: expected " +
                             std::to_string(expected_bytes) + " bytes, found " +
                             std::to_string(bytes.size()));
    }
    if (!size_ok) {
      throw DatasetError(DatasetError::Kind::kRowCountMismatch,
                         "row count mismatch for task file " + path.string() +
                             ": manifest says " + std::to_string(e.rows) +
                             " rows, file holds " +
                             std::to_string(bytes.size() / kRowStride));
    }
    if (!crc_ok) {
      throw DatasetError(DatasetError::Kind::kChecksumMismatch,
                         "checksum mismatch for task file " + path.string());
    }
    TaskDataset d;
    d.task = e.task;
    d.transitions = DecodeRows(std::move(bytes));
    d.behavior_heads = e.behavior_heads;
    d.random_return = e.random_return;
    d.expert_return = e.expert_return;
    c.tasks.push_back(std::move(d));
  }
  return c;
}

namespace {

TransitionTable SampleRows(const TaskDataset& dataset, int count, Rng& rng,
                           const char* what) {
  if (count < 1) {
    throw std::invalid_argument(std::string(what) + ": size must be >= 1");
  }
  if (dataset.size() == 0) {
    throw std::invalid_argument(std::string(what) + ": empty dataset");
  }
  std::uniform_int_distribution<Eigen::Index> pick(0, dataset.size() - 1);
  TransitionTable out(count, kRowFloats);
  for (int i = 0; i < count; ++i) out.row(i) = dataset.transitions.row(pick(rng));
  return out;
}

}  // namespace

ContextBatch SampleContext(const TaskDataset& dataset, int context_size, Rng& rng) {
  ContextBatch batch;
  batch.transitions = SampleRows(dataset, context_size, rng, "SampleContext");
  batch.task_id = dataset.task.task_id;
  return batch;
}

TransitionTable SampleTrainingBatch(const TaskDataset& dataset, int batch_size,
                                    Rng& rng) {
  return SampleRows(dataset, batch_size, rng, "SampleTrainingBatch");
}

}  // namespace ertrl
