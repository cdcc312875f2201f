// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpvoc/nn/parameters.hpp"

namespace fpvoc::nn {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping
};

/// Adam over a ParameterSet. Parameters and moments are rounded to float32
/// after every update so that float32 checkpoints restore the exact state.
class Adam {
 public:
  Adam(ParameterSet& params, const AdamConfig& cfg);

  /// Applies one update from the gradients currently held by the parameters.
  /// Returns the global gradient norm before clipping.
  double step();

  std::uint64_t steps() const { return t_; }
  void set_steps(std::uint64_t t) { t_ = t; }
  void set_lr(double lr) { cfg_.lr = lr; }
  const AdamConfig& config() const { return cfg_; }

  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  const std::vector<std::vector<double>>& first_moments() const { return m_; }
  const std::vector<std::vector<double>>& second_moments() const { return v_; }

 private:
  ParameterSet& params_;
  AdamConfig cfg_;
  std::uint64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace fpvoc::nn
