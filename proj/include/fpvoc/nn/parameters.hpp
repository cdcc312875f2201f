// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

/// Named trainable tensors in registration order.
class ParameterSet {
 public:
  Tensor& add(const std::string& name, Shape shape, std::vector<double> values);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization from a seeded stream.
  Tensor& add_uniform(const std::string& name, Shape shape, std::size_t fan_in, std::uint64_t seed);
  Tensor& add_zeros(const std::string& name, Shape shape);

  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  bool contains(const std::string& name) const;

  std::vector<std::pair<std::string, Tensor>>& items() { return items_; }
  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::size_t count() const;  // total scalar parameters
  void zero_grad();
  /// Freezes (false) or unfreezes every parameter for graph construction.
  void set_requires_grad(bool on);

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

}  // namespace fpvoc::nn
