// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "fpvoc/dsp/envelope.hpp"
#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/tf_filter.hpp"
#include "fpvoc/dsp/waveform.hpp"
#include "fpvoc/rng.hpp"

namespace fpvoc {

/// Gaussian prior N(0, L L^T) with L = istft . M . stft, where M is the
/// minimum-phase filter of the liftered envelope implied by c.
struct AdaptivePrior {
  dsp::TfFilter filter;
  dsp::StftConfig config;
  double sample_rate = 24000.0;

  std::size_t signal_length() const { return filter.frames * static_cast<std::size_t>(config.hop); }
};

/// Lower bound on the per-frame power a prior frame is scaled to.
inline constexpr double kPriorPowerFloor = 1e-10;

/// Envelope power below the clip maximum minus this many dB is raised to it.
inline constexpr double kPriorDynamicRangeDb = 40.0;

/// Each envelope frame is scaled so that filtered unit-variance white noise
/// has the mean-square amplitude power_from_mel assigns to that frame.
AdaptivePrior build_prior(const dsp::MelSpectrogram& c, const dsp::MelFilterbank& fb, const dsp::StftConfig& cfg,
                          int lifter_order = dsp::kDefaultLifterOrder);

/// Prior with a constant filter value (white noise scaled by `value`).
AdaptivePrior constant_prior(double value, std::size_t frames, const dsp::StftConfig& cfg, double sample_rate);

/// eps = L eps_tilde with eps_tilde ~ N(0, I) drawn from `rng`.
dsp::Waveform sample_prior(const AdaptivePrior& p, std::size_t length, Philox& rng);
dsp::Waveform sample_prior(const AdaptivePrior& p, std::size_t length, std::uint64_t seed);

/// ||L^-1 (eps - eps_hat)||^2.
double prior_weighted_residual(const dsp::Waveform& eps, const dsp::Waveform& eps_hat, const AdaptivePrior& p);

}  // namespace fpvoc
