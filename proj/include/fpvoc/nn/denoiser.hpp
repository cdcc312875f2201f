// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpvoc/nn/parameters.hpp"
#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

enum class StepConditioning {
  kStepIndex,   // learned table indexed by the iteration t
  kNoiseLevel,  // sinusoidal code of sqrt(alpha_bar_t)
};

StepConditioning parse_step_conditioning(const std::string& name);  // "index" | "level"
std::string to_string(StepConditioning mode);

struct DenoiserConfig {
  std::size_t mel_bands = 128;
  std::size_t hop = 300;
  std::size_t channels = 32;
  std::size_t out_channels = 16;
  std::size_t embedding = 16;
  std::size_t downsample = 4;
  std::size_t blocks = 4;
  StepConditioning conditioning = StepConditioning::kStepIndex;
  std::size_t steps = 3;  // table size for kStepIndex
};

void validate(const DenoiserConfig& cfg);

/// Small convolutional noise estimator F(y, c, t). The waveform path runs at
/// hop / downsample frames per sample block; c is upsampled to the same rate
/// by transposed convolutions. The last layer starts at zero.
class Denoiser {
 public:
  Denoiser(const DenoiserConfig& cfg, std::uint64_t seed);

  /// y [B, L], c [B, F, K] (log-mel), step[b] is t in 1..steps (kStepIndex)
  /// or the noise level (kNoiseLevel). Returns [B, L].
  Tensor forward(const Tensor& y, const Tensor& c, std::span<const double> step) const;

  const DenoiserConfig& config() const { return cfg_; }
  ParameterSet& parameters() { return params_; }
  const ParameterSet& parameters() const { return params_; }
  const std::vector<std::size_t>& upsample_factors() const { return factors_; }

 private:
  Tensor embed(std::span<const double> step) const;

  DenoiserConfig cfg_;
  std::vector<std::size_t> factors_;
  ParameterSet params_;
};

}  // namespace fpvoc::nn
