// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/waveform.hpp"
#include "fpvoc/nn/denoiser.hpp"
#include "fpvoc/prior.hpp"
#include "fpvoc/schedules.hpp"

namespace fpvoc {

/// y_T, y_{T-1}, ..., y_0 in generation order.
struct InferenceTrace {
  std::vector<dsp::Waveform> states;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  const dsp::Waveform& at(std::size_t t) const { return states.at(steps() - t); }  // y_t
  const dsp::Waveform& output() const { return states.back(); }
};

/// Stream tags for the two noise sources of inference.
inline constexpr std::uint64_t kInitNoiseTag = 0x1001;
inline constexpr std::uint64_t kStepNoiseTag = 0x1002;

/// What the denoiser is told about step t: the index itself, or sqrt(alpha_bar_t)
/// when it was built for noise-level conditioning.
double step_condition(const nn::Denoiser& net, std::size_t t, const NoiseSchedule* sched);

/// [1, F, K] tensor of a mel spectrogram.
nn::Tensor mel_tensor(const dsp::MelSpectrogram& c);

/// In-graph WaveFit loop: returns y_{T-1}, ..., y_0 for a batch y_T [B, L].
std::vector<nn::Tensor> wavefit_unroll(const nn::Denoiser& net, const nn::Tensor& y_T, const nn::Tensor& c,
                                       std::span<const double> target_power, std::size_t T, dsp::GainMode mode);

/// In-graph reverse process. noise[i] is the perturbation for step t = T - i;
/// it is ignored when gamma_t = 0.
std::vector<nn::Tensor> ddpm_unroll(const nn::Denoiser& net, const nn::Tensor& y_T, const nn::Tensor& c,
                                    const NoiseSchedule& sched, const std::vector<nn::Tensor>& noise);

InferenceTrace wavefit_infer(const dsp::MelSpectrogram& c, const nn::Denoiser& net, std::size_t T,
                             const AdaptivePrior& prior, const dsp::MelFilterbank& fb, std::uint64_t seed,
                             dsp::GainMode mode = dsp::GainMode::kLiteral);

InferenceTrace ddpm_infer(const dsp::MelSpectrogram& c, const nn::Denoiser& net, const NoiseSchedule& sched,
                          const AdaptivePrior& prior, std::uint64_t seed, bool shaped_reverse_noise = true);

struct ProbeRow {
  std::size_t t = 0;  // y_t
  double sc = 0.0;    // spectral convergence, averaged over resolutions
  double mag = 0.0;   // log-magnitude error, averaged over resolutions
};

/// Distance of every trace entry to x0; rows run from y_T down to y_0.
std::vector<ProbeRow> contraction_probe(const InferenceTrace& trace, const dsp::Waveform& x0,
                                        const std::vector<dsp::StftConfig>& cfgs);

}  // namespace fpvoc
