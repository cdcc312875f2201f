// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/nn/denoiser.hpp"
#include "fpvoc/nn/discriminator.hpp"

namespace fpvoc::train {

enum class TrainMode { kWaveFit, kDdpm, kInferGrad };

TrainMode parse_train_mode(const std::string& name);  // "wavefit" | "ddpm" | "infergrad"
std::string to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::kWaveFit;
  std::size_t iterations = 3;  // T of the WaveFit loop
  std::string train_schedule = "train50";
  std::string infer_schedule = "infer3";
  LossWeights weights;
  std::size_t clip_frames = 36;
  std::size_t batch = 8;
  double lr = 1e-4;
  double disc_lr = 1e-4;
  double finetune_lr = 5e-5;  // infergrad generator
  double max_grad_norm = 0.0;
  std::size_t total_steps = 2000;
  std::uint64_t seed = 1;

  std::string corpus = "synthetic";  // "synthetic" or a directory of WAV files
  std::size_t corpus_clips = 32;
  double corpus_seconds = 1.2;

  std::string out_dir = "run";
  std::string init_checkpoint;  // pretrained model for infergrad
  std::size_t checkpoint_every = 500;

  dsp::GainMode gain_mode = dsp::GainMode::kLiteral;
  bool shaped_reverse_noise = true;
  std::string conditioning = "auto";  // auto | index | level

  double sample_rate = 24000.0;
  dsp::StftConfig stft;
  int mel_bands = 128;
  double f_low = 20.0;
  double f_high = 12000.0;

  std::size_t channels = 32;
  std::size_t out_channels = 16;
  std::size_t embedding = 16;
  std::size_t blocks = 4;
  std::size_t downsample = 4;

  std::size_t clip_samples() const { return clip_frames * static_cast<std::size_t>(stft.hop); }
};

void validate(const TrainConfig& cfg);

/// Applies one key=value assignment; unknown keys throw ConfigError.
void set_option(TrainConfig& cfg, const std::string& key, const std::string& value);
/// Parses a key=value file ('#' starts a comment) on top of `base`.
TrainConfig parse_config(const std::string& text, TrainConfig base = {});
TrainConfig load_config(const std::string& path, TrainConfig base = {});
/// Canonical key=value listing of every option.
std::string format_config(const TrainConfig& cfg);

nn::DenoiserConfig denoiser_config(const TrainConfig& cfg);
nn::DiscriminatorConfig discriminator_config(const TrainConfig& cfg);
dsp::MelFilterbank mel_filterbank(const TrainConfig& cfg);

}  // namespace fpvoc::train
