// Copyright 2026 The eqtp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Demonstration datasets (EQPD) and model checkpoints (EQCK).

#ifndef EQTP_DATASET_HPP_
#define EQTP_DATASET_HPP_

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqtp/bench.hpp"
#include "eqtp/optim.hpp"
#include "eqtp/tensor_io.hpp"
#include "eqtp/transporter.hpp"

namespace eqtp {

struct Demonstration {
  std::string task;
  uint64_t seed = 0;
  int step = 0;
  FeatureField observation;
  std::optional<FeatureField> goal;
  PickPlaceAction action;

  // Model input: o_t, or o_t stacked with o_g.
  FeatureField Input() const { return goal ? StackChannels(observation, *goal) : observation; }
};

inline constexpr uint32_t kDatasetVersion = 1;
inline constexpr uint32_t kCheckpointVersion = 1;

inline std::vector<uint8_t> EncodeDataset(const std::vector<Demonstration>& demos) {
  ByteWriter w;
  w.Magic("EQPD");
  w.U32(kDatasetVersion);
  w.U64(demos.size());
  for (const auto& d : demos) {
    w.String(d.task);
    w.U64(d.seed);
    WriteRawTensor(w, ToRawTensor(d.observation));
    w.U32(d.goal ? 1 : 0);
    if (d.goal) WriteRawTensor(w, ToRawTensor(*d.goal));
    const auto& a = d.action;
    for (double v : {double(a.pick_u), double(a.pick_v), a.pick_theta, double(a.place_u),
                     double(a.place_v), a.place_theta}) {
      w.F64(v);
    }
  }
  return w.buffer();
}

inline std::vector<Demonstration> DecodeDataset(std::vector<uint8_t> bytes) {
  ByteReader r(std::move(bytes));
  r.ExpectMagic("EQPD");
  const uint64_t version_at = r.offset();
  if (const uint32_t v = r.U32(); v != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(v), version_at);
  }
  const uint64_t count_at = r.offset();
  const uint64_t count = r.U64();
  // Each record needs at least a name length, seed, two tensor headers and
  // the action.
  if (count > r.remaining() / 64) throw FormatError("record count out of range", count_at);
  std::vector<Demonstration> demos(count);
  for (auto& d : demos) {
    d.task = r.String(256);
    d.seed = r.U64();
    const uint64_t obs_at = r.offset();
    const RawTensor obs = ReadRawTensor(r);
    if (obs.dims.size() != 3) throw FormatError("observation must have rank 3", obs_at);
    d.observation = FromRawTensor(obs);
    const uint64_t flag_at = r.offset();
    const uint32_t flag = r.U32();
    if (flag > 1) throw FormatError("bad goal flag", flag_at);
    if (flag) {
      const uint64_t goal_at = r.offset();
      const RawTensor goal = ReadRawTensor(r);
      if (goal.dims != obs.dims) throw FormatError("goal shape differs from observation", goal_at);
      d.goal = FromRawTensor(goal);
    }
    const uint64_t action_at = r.offset();
    double v[6];
    for (double& x : v) x = r.F64();
    for (int i : {0, 1, 3, 4}) {
      if (v[i] != std::floor(v[i]) || v[i] < 0 || v[i] >= 1 << 20) {
        throw FormatError("action pixel coordinate is not a valid index", action_at);
      }
    }
    d.action = {int(v[0]), int(v[1]), v[2], int(v[3]), int(v[4]), v[5]};
  }
  if (!r.AtEnd()) throw FormatError("trailing bytes after last record", r.offset());
  return demos;
}

inline void WriteDataset(const std::string& path, const std::vector<Demonstration>& demos) {
  const auto bytes = EncodeDataset(demos);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::vector<Demonstration> ReadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  std::vector<uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeDataset(std::move(buf));
}

// Oracle demonstrations from seeds seed .. seed + count - 1. Throws naming the
// seed if the expert fails to solve an episode.
inline std::vector<Demonstration> GenerateDemos(const TaskSpec& task, int count, uint64_t seed) {
  if (count < 0) throw std::invalid_argument("demo count must be non-negative");
  std::vector<Demonstration> demos;
  for (int i = 0; i < count; ++i) {
    const uint64_t s = seed + i;
    Scene scene = Reset(task, s);
    Demonstration d;
    d.task = task.name;
    d.seed = s;
    d.observation = RenderDepth(scene);
    if (task.goal_conditioned()) d.goal = RenderGoal(scene);
    try {
      d.action = Oracle(scene);
    } catch (const std::exception& e) {
      throw std::runtime_error("oracle failed on seed " + std::to_string(s) + ": " + e.what());
    }
    if (Step(scene, d.action) <= 0.0) {
      throw std::runtime_error("oracle did not solve seed " + std::to_string(s));
    }
    demos.push_back(std::move(d));
  }
  return demos;
}

// Checkpoint: "EQCK", u32 version, u32 tensor count, manifest entries
// (name, u64 offset into the tensor block, u32 rank, u32 dims...), the
// config text, then the EQTF tensors back to back.
template <typename T>
void SaveCheckpoint(const std::string& path, const ParamStore<T>& params,
                    const std::string& config_text) {
  ByteWriter tensors;
  std::vector<uint64_t> offsets;
  for (const auto& [name, t] : params.items()) {
    offsets.push_back(tensors.size());
    RawTensor raw;
    for (int d : t.shape()) raw.dims.push_back(static_cast<uint32_t>(d));
    raw.data.assign(t.data().begin(), t.data().end());
    WriteRawTensor(tensors, raw);
  }
  ByteWriter w;
  w.Magic("EQCK");
  w.U32(kCheckpointVersion);
  w.U32(static_cast<uint32_t>(params.items().size()));
  size_t i = 0;
  for (const auto& [name, t] : params.items()) {
    w.String(name);
    w.U64(offsets[i++]);
    w.U32(static_cast<uint32_t>(t.shape().size()));
    for (int d : t.shape()) w.U32(static_cast<uint32_t>(d));
  }
  w.String(config_text);
  w.Bytes(tensors.buffer().data(), tensors.size());
  w.WriteFile(path);
}

struct CheckpointEntry {
  std::string name;
  uint64_t offset = 0;
  std::vector<uint32_t> dims;
  RawTensor tensor;
};

struct Checkpoint {
  std::string config_text;
  std::vector<CheckpointEntry> entries;
};

inline Checkpoint ReadCheckpoint(const std::string& path) {
  ByteReader r = ByteReader::FromFile(path);
  r.ExpectMagic("EQCK");
  const uint64_t version_at = r.offset();
  if (const uint32_t v = r.U32(); v != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(v), version_at);
  }
  const uint64_t count_at = r.offset();
  const uint32_t count = r.U32();
  if (count > r.remaining() / 16) throw FormatError("tensor count out of range", count_at);
  Checkpoint ck;
  ck.entries.resize(count);
  for (auto& e : ck.entries) {
    e.name = r.String(1024);
    e.offset = r.U64();
    const uint64_t rank_at = r.offset();
    const uint32_t rank = r.U32();
    if (rank > 8) throw FormatError("rank out of range", rank_at);
    for (uint32_t k = 0; k < rank; ++k) e.dims.push_back(r.U32());
  }
  ck.config_text = r.String();
  const uint64_t base = r.offset();
  for (auto& e : ck.entries) {
    if (r.offset() - base != e.offset) {
      throw FormatError("manifest offset mismatch for " + e.name, r.offset());
    }
    const uint64_t at = r.offset();
    e.tensor = ReadRawTensor(r);
    if (e.tensor.dims != e.dims) throw FormatError("shape differs from manifest for " + e.name, at);
  }
  if (!r.AtEnd()) throw FormatError("trailing bytes after last tensor", r.offset());
  return ck;
}

// Copies checkpoint tensors into `params` by name; every parameter must be
// present with the same shape.
template <typename T>
void LoadParameters(const Checkpoint& ck, ParamStore<T>& params) {
  if (ck.entries.size() != params.items().size()) {
    throw std::runtime_error("checkpoint has " + std::to_string(ck.entries.size()) +
                             " tensors, model expects " + std::to_string(params.items().size()));
  }
  for (const auto& e : ck.entries) {
    ad::Tensor<T> t = params.Find(e.name);
    std::vector<uint32_t> dims(t.shape().begin(), t.shape().end());
    if (dims != e.dims) throw std::runtime_error("shape mismatch for " + e.name);
    std::copy(e.tensor.data.begin(), e.tensor.data.end(), t.data().begin());
  }
}

}  // namespace eqtp

#endif  // EQTP_DATASET_HPP_
