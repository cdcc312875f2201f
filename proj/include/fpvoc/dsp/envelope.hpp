// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/stft.hpp"

namespace fpvoc::dsp {

inline constexpr int kDefaultLifterOrder = 24;

/// Smooth log-power envelope per T-F bin, frame-major (frames x bins).
struct SpectralEnvelope {
  std::vector<double> log_power;
  std::size_t frames = 0;
  std::size_t num_bins = 0;
  StftConfig config;

  double at(std::size_t frame, std::size_t bin) const { return log_power[frame * num_bins + bin]; }
};

/// Lifter a per-frame log power spectrum (frames x bins) to its first
/// `lifter_order` + 1 cepstral coefficients.
SpectralEnvelope lifter_log_power(const std::vector<double>& log_power, std::size_t frames, const StftConfig& cfg,
                                  int lifter_order);

/// Envelope of the power spectrogram implied by a log-mel spectrogram.
SpectralEnvelope spectral_envelope(const MelSpectrogram& c, const MelFilterbank& fb,
                                   int lifter_order = kDefaultLifterOrder);

/// Diagonal T-F filter, frame-major complex coefficients.
struct TfFilter {
  std::vector<Complex> coeffs;
  std::size_t frames = 0;
  std::size_t num_bins = 0;
  StftConfig config;

  const Complex& at(std::size_t frame, std::size_t bin) const { return coeffs[frame * num_bins + bin]; }
};

/// Constant filter (every coefficient equal to `value`).
TfFilter constant_filter(Complex value, std::size_t frames, const StftConfig& cfg);

/// Minimum-phase filter with |m| = exp(log_power / 2), phase from the folded
/// real cepstrum.
TfFilter minimum_phase_filter(const SpectralEnvelope& envelope);

}  // namespace fpvoc::dsp
