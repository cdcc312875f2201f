// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

#include "fpvoc/error.hpp"

namespace fpvoc::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw IoError("truncated checkpoint " + path);
  return v;
}

}  // namespace

void Checkpoint::put(const std::string& name, const Shape& shape, const std::vector<double>& values) {
  if (numel(shape) != values.size()) throw ShapeError("checkpoint entry '" + name + "' does not match its shape");
  CheckpointEntry e{name, shape, std::vector<float>(values.begin(), values.end())};
  for (auto& existing : entries_) {
    if (existing.name == name) {
      existing = std::move(e);
      return;
    }
  }
  entries_.push_back(std::move(e));
}

void Checkpoint::put_scalar(const std::string& name, double value) { put(name, {1}, {value}); }

bool Checkpoint::contains(const std::string& name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.name == name; });
}

const CheckpointEntry& Checkpoint::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  throw IoError("checkpoint has no entry '" + name + "'");
}

double Checkpoint::scalar(const std::string& name) const {
  const auto& e = get(name);
  if (e.data.size() != 1) throw ShapeError("checkpoint entry '" + name + "' is not a scalar");
  return e.data[0];
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_pod(os, kCheckpointVersion);
  write_pod(os, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& e : entries_) {
    write_pod(os, static_cast<std::uint32_t>(e.name.size()));
    os.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    write_pod(os, static_cast<std::uint32_t>(e.shape.size()));
    for (std::size_t d : e.shape) write_pod(os, static_cast<std::uint64_t>(d));
    os.write(reinterpret_cast<const char*>(e.data.data()), static_cast<std::streamsize>(e.data.size() * sizeof(float)));
  }
  if (!os) throw IoError("write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint " + path);
  char magic[sizeof(kCheckpointMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw IoError(path + " is not a checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  const auto count = read_pod<std::uint32_t>(is, path);
  Checkpoint ckpt;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const auto name_len = read_pod<std::uint32_t>(is, path);
    if (name_len > 4096) throw IoError("corrupt checkpoint " + path);
    e.name.resize(name_len);
    if (!is.read(e.name.data(), name_len)) throw IoError("truncated checkpoint " + path);
    const auto rank = read_pod<std::uint32_t>(is, path);
    if (rank > 8) throw IoError("corrupt checkpoint " + path);
    for (std::uint32_t r = 0; r < rank; ++r) e.shape.push_back(static_cast<std::size_t>(read_pod<std::uint64_t>(is, path)));
    const std::size_t n = numel(e.shape);
    if (n > (std::size_t{1} << 32)) throw IoError("corrupt checkpoint " + path);
    e.data.resize(n);
    if (!is.read(reinterpret_cast<char*>(e.data.data()), static_cast<std::streamsize>(n * sizeof(float)))) {
      throw IoError("truncated checkpoint " + path);
    }
    ckpt.entries_.push_back(std::move(e));
  }
  return ckpt;
}

void store_parameters(Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params) {
  for (const auto& [name, t] : params.items()) {
    const auto v = t.values();
    ckpt.put(prefix + name, t.shape(), std::vector<double>(v.begin(), v.end()));
  }
}

void restore_parameters(const Checkpoint& ckpt, const std::string& prefix, ParameterSet& params) {
  for (auto& [name, t] : params.items()) {
    const auto& e = ckpt.get(prefix + name);
    if (e.shape != t.shape()) {
      throw ShapeError("checkpoint shape " + to_string(e.shape) + " for '" + name + "' does not match " +
                       to_string(t.shape()));
    }
    auto& dst = t.mutable_values();
    std::copy(e.data.begin(), e.data.end(), dst.begin());
  }
}

void store_optimizer(Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params, const Adam& opt) {
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    ckpt.put(prefix + "m." + items[i].first, items[i].second.shape(), opt.first_moments()[i]);
    ckpt.put(prefix + "v." + items[i].first, items[i].second.shape(), opt.second_moments()[i]);
  }
  ckpt.put_scalar(prefix + "t", static_cast<double>(opt.steps()));
}

void restore_optimizer(const Checkpoint& ckpt, const std::string& prefix, const ParameterSet& params, Adam& opt) {
  const auto& items = params.items();
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& m = ckpt.get(prefix + "m." + items[i].first);
    const auto& v = ckpt.get(prefix + "v." + items[i].first);
    if (m.data.size() != items[i].second.numel() || v.data.size() != items[i].second.numel()) {
      throw ShapeError("optimizer state for '" + items[i].first + "' has the wrong size");
    }
    std::copy(m.data.begin(), m.data.end(), opt.first_moments()[i].begin());
    std::copy(v.data.begin(), v.data.end(), opt.second_moments()[i].begin());
  }
  opt.set_steps(static_cast<std::uint64_t>(ckpt.scalar(prefix + "t")));
}

}  // namespace fpvoc::nn
