// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fpvoc/dsp/fft.hpp"
#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::dsp {

enum class WindowType { kHann, kRectangular };

struct StftConfig {
  int window_length = 1200;
  int hop = 300;
  int fft_size = 2048;
  WindowType window = WindowType::kHann;

  int bins() const { return fft_size / 2 + 1; }
  bool operator==(const StftConfig&) const = default;
};

/// Throws ConfigError unless 0 < hop <= window_length <= fft_size and
/// fft_size is a power of two.
void validate(const StftConfig& cfg);

/// Millisecond-based configuration, e.g. (24000, 50, 12.5, 2048) -> 1200/300/2048.
StftConfig stft_config_from_ms(double sample_rate, double window_ms, double hop_ms, int fft_size);

/// Analysis taper of length window_length (periodic Hann or all-ones).
std::vector<double> analysis_window(const StftConfig& cfg);

/// Canonical dual of the analysis window: w / sum_m w^2(t - m*hop).
/// Throws ConfigError when the shifted squared windows leave a gap.
std::vector<double> dual_window(const StftConfig& cfg);

/// Number of frames for a signal of `length` samples: ceil(length / hop).
std::size_t frame_count(std::size_t length, const StftConfig& cfg);

/// Complex spectrogram stored frame-major: bins[k * num_bins + n].
struct ComplexSpectrogram {
  std::vector<Complex> bins;
  std::size_t frames = 0;
  std::size_t num_bins = 0;
  std::size_t signal_length = 0;
  double sample_rate = 24000.0;
  StftConfig config;

  Complex& at(std::size_t frame, std::size_t bin) { return bins[frame * num_bins + bin]; }
  const Complex& at(std::size_t frame, std::size_t bin) const { return bins[frame * num_bins + bin]; }
};

// Reflection-padded STFT engine over raw buffers. The signal is mirrored by
// window_length/2 samples on each side (repeatedly, for very short inputs);
// frame k starts at k*hop in the padded signal. `synthesize` is the
// least-squares inverse: overlap-add with the analysis window, divided by
// the actual per-sample window-square sum. The adjoints are exact transposes
// of the real-linear maps, used for backpropagation.
class StftEngine {
 public:
  explicit StftEngine(const StftConfig& cfg);

  const StftConfig& config() const { return cfg_; }
  std::size_t bins() const { return static_cast<std::size_t>(cfg_.bins()); }
  std::size_t frames(std::size_t length) const;
  const std::vector<double>& window() const { return window_; }

  // x (length L) -> frames(L) x bins
  std::vector<Complex> analyze(std::span<const double> x) const;
  // transpose of analyze (real inner product on re/im parts)
  std::vector<double> analyze_adjoint(std::span<const Complex> grad, std::size_t length) const;
  // frames x bins -> signal of `length` samples
  std::vector<double> synthesize(std::span<const Complex> spec, std::size_t length) const;
  // transpose of synthesize
  std::vector<Complex> synthesize_adjoint(std::span<const double> grad, std::size_t length) const;

 private:
  std::vector<double> window_square_sum(std::size_t padded_length, std::size_t num_frames) const;

  StftConfig cfg_;
  FftPlan plan_;
  std::vector<double> window_;
};

ComplexSpectrogram stft(const Waveform& x, const StftConfig& cfg);

/// Inverse STFT; exact on all samples for perfect-reconstruction configs.
Waveform istft(const ComplexSpectrogram& spec);

/// Mirror index into [0, length) used for padding.
std::size_t reflect_index(long long index, std::size_t length);

}  // namespace fpvoc::dsp
