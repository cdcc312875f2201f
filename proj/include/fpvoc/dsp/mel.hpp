// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::dsp {

/// Amplitude floor applied before taking logs of mel or STFT magnitudes.
inline constexpr double kLogAmplitudeFloor = 1e-5;

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank (HTK mel scale, unit peak), row-major
/// bands x linear bins.
struct MelFilterbank {
  std::vector<double> weights;
  std::size_t bands = 0;
  std::size_t num_bins = 0;
  double f_low = 0.0;
  double f_high = 0.0;
  double sample_rate = 0.0;
  StftConfig config;

  double at(std::size_t band, std::size_t bin) const { return weights[band * num_bins + bin]; }
};

MelFilterbank mel_filterbank(int bands, double f_low, double f_high, const StftConfig& cfg, double sample_rate);

/// Default conditioning filterbank: 128 bands over 20 Hz - 12 kHz.
MelFilterbank default_mel_filterbank(const StftConfig& cfg, double sample_rate);

enum class MelKind { kLogAmplitude, kAmplitude, kPower };

/// Row-major bands x frames.
struct MelSpectrogram {
  std::vector<double> values;
  std::size_t bands = 0;
  std::size_t frames = 0;
  MelKind kind = MelKind::kLogAmplitude;

  double& at(std::size_t band, std::size_t frame) { return values[band * frames + frame]; }
  double at(std::size_t band, std::size_t frame) const { return values[band * frames + frame]; }
};

/// Filterbank applied to the STFT magnitude.
MelSpectrogram amplitude_mel(const Waveform& x, const MelFilterbank& fb);

/// log(max(amplitude mel, kLogAmplitudeFloor)).
MelSpectrogram log_mel(const Waveform& x, const MelFilterbank& fb, const StftConfig& cfg);

/// Linear-frequency power recovered from a log-mel spectrogram.
struct PowerEstimate {
  std::vector<double> power;        // frames x bins, |X|^2 estimates
  std::vector<double> frame_power;  // per-frame mean-square amplitude estimate
  double total = 0.0;               // mean-square amplitude estimate of the whole signal (P_c)
  std::size_t frames = 0;
  std::size_t num_bins = 0;
};

/// Empirical gain correcting the energy the mel pseudo-inverse loses on
/// harmonic signals; calibrated so that a clean signal's own log-mel
/// predicts its mean-square amplitude (geometric mean over 64 synthetic
/// speech-like clips; spread about 4%).
inline constexpr double kMelPowerCalibration = 1.375;

/// Inverts exp(c) through the transpose-normalized filterbank (clamped at 0),
/// squares to a power spectrogram, and converts each frame's total power to
/// a mean-square amplitude via Parseval and the window energy.
PowerEstimate power_from_mel(const MelSpectrogram& c, const MelFilterbank& fb);

}  // namespace fpvoc::dsp
