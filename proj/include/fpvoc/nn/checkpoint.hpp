// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpvoc/nn/adam.hpp"
#include "fpvoc/nn/parameters.hpp"
#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

inline constexpr char kCheckpointMagic[8] = {'F', 'P', 'V', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointEntry {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

/// Named float32 arrays in insertion order.
//
// Layout (little-endian): magic[8], u32 version, u32 count, then per entry
// u32 name_len, name bytes, u32 rank, u64 dims[rank], f32 data[numel].
class Checkpoint {
 public:
  void put(const std::string& name, const Shape& shape, const std::vector<double>& values);
  void put_scalar(const std::string& name, double value);
  bool contains(const std::string& name) const;
  const CheckpointEntry& get(const std::string& name) const;
  double scalar(const std::string& name) const;
  const std::vector<CheckpointEntry>& entries() const { return entries_; }

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::vector<CheckpointEntry> entries_;
};

void store_parameters(Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params);
/// Copies matching entries into params; every parameter must be present.
void restore_parameters(const Checkpoint& ckpt, const std::string& prefix, ParameterSet& params);
void store_optimizer(Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params, const Adam& opt);
void restore_optimizer(const Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params, Adam& opt);

}  // namespace fpvoc::nn
