// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fpvoc/nn/parameters.hpp"
#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

struct DiscriminatorConfig {
  std::size_t scales = 3;
  // Widths of the six hidden layers; the seventh layer emits one logit channel.
  std::vector<std::size_t> channels{8, 16, 32, 64, 64, 64};
};

struct DiscriminatorOutput {
  Tensor logits;                 // [B, 1, n]
  std::vector<Tensor> features;  // one [B, C_h, n_h] map per hidden layer
};

/// Multi-scale waveform discriminator. Scale r sees the input average-pooled
/// r-1 times by a factor of two.
class DiscriminatorStack {
 public:
  DiscriminatorStack(const DiscriminatorConfig& cfg, std::uint64_t seed);

  static constexpr std::size_t kMinLength = 16;
  std::size_t layers() const { return cfg_.channels.size() + 1; }
  std::size_t scales() const { return cfg_.scales; }

  /// x [B, L] -> one output per scale.
  std::vector<DiscriminatorOutput> forward(const Tensor& x) const;
  /// Single scale applied to an already pooled [B, 1, L] input.
  DiscriminatorOutput forward_scale(std::size_t r, const Tensor& x) const;

  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  struct Layer {
    std::size_t kernel, stride, padding, groups;
  };
  std::vector<Layer> plan_;
  DiscriminatorConfig cfg_;
  ParameterSet params_;
};

}  // namespace fpvoc::nn
