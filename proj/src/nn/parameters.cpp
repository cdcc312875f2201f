// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/nn/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/rng.hpp"

namespace fpvoc::nn {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Tensor& ParameterSet::add(const std::string& name, Shape shape, std::vector<double> values) {
  if (contains(name)) throw ConfigError("duplicate parameter name '" + name + "'");
  items_.emplace_back(name, Tensor::parameter(std::move(shape), std::move(values)));
  return items_.back().second;
}

Tensor& ParameterSet::add_uniform(const std::string& name, Shape shape, std::size_t fan_in, std::uint64_t seed) {
  const std::size_t n = numel(shape);
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
  Philox rng(seed, stream_id(0x1417, fnv1a(name)));
  std::vector<double> values(n);
  // Values are kept float-representable so checkpoints are lossless.
  for (double& v : values) v = static_cast<float>(bound * (2.0 * rng.uniform() - 1.0));
  return add(name, std::move(shape), std::move(values));
}

Tensor& ParameterSet::add_zeros(const std::string& name, Shape shape) {
  const std::size_t n = numel(shape);
  return add(name, std::move(shape), std::vector<double>(n, 0.0));
}

const Tensor& ParameterSet::get(const std::string& name) const {
  for (const auto& [n, t] : items_) {
    if (n == name) return t;
  }
  throw ConfigError("unknown parameter '" + name + "'");
}

Tensor& ParameterSet::get(const std::string& name) {
  return const_cast<Tensor&>(static_cast<const ParameterSet&>(*this).get(name));
}

bool ParameterSet::contains(const std::string& name) const {
  return std::any_of(items_.begin(), items_.end(), [&](const auto& item) { return item.first == name; });
}

std::size_t ParameterSet::count() const {
  std::size_t n = 0;
  for (const auto& item : items_) n += item.second.numel();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& item : items_) item.second.zero_grad();
}

void ParameterSet::set_requires_grad(bool on) {
  for (auto& item : items_) item.second.node()->requires_grad = on;
}

}  // namespace fpvoc::nn
