// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "fpvoc/dsp/fft.hpp"
#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

namespace {

// Symmetric full-length extension of a real half spectrum.
void fill_even(const double* half, std::size_t nb, std::vector<Complex>& buf) {
  const std::size_t n = buf.size();
  for (std::size_t j = 0; j < nb; ++j) buf[j] = half[j];
  for (std::size_t j = nb; j < n; ++j) buf[j] = half[n - j];
}

}  // namespace

SpectralEnvelope lifter_log_power(const std::vector<double>& log_power, std::size_t frames, const StftConfig& cfg,
                                  int lifter_order) {
  validate(cfg);
  if (lifter_order < 1) throw ConfigError("lifter order must be at least 1");
  const auto nb = static_cast<std::size_t>(cfg.bins());
  if (log_power.size() != frames * nb) throw ShapeError("log power spectrogram shape mismatch");
  const auto n = static_cast<std::size_t>(cfg.fft_size);
  const auto order = std::min<std::size_t>(static_cast<std::size_t>(lifter_order), n / 2);
  const FftPlan plan(n);

  SpectralEnvelope env;
  env.frames = frames;
  env.num_bins = nb;
  env.config = cfg;
  env.log_power.assign(frames * nb, 0.0);
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k < frames; ++k) {
    fill_even(log_power.data() + k * nb, nb, buf);
    plan.inverse_unscaled(buf);
    // Keep quefrencies 0..order and their mirror images.
    for (std::size_t q = 0; q < n; ++q) {
      const bool keep = q <= order || q >= n - order;
      buf[q] = keep ? Complex(buf[q].real() / static_cast<double>(n), 0.0) : Complex();
    }
    plan.forward(buf);
    for (std::size_t j = 0; j < nb; ++j) env.log_power[k * nb + j] = buf[j].real();
  }
  return env;
}

SpectralEnvelope spectral_envelope(const MelSpectrogram& c, const MelFilterbank& fb, int lifter_order) {
  const PowerEstimate est = power_from_mel(c, fb);
  constexpr double kPowerFloor = kLogAmplitudeFloor * kLogAmplitudeFloor;
  std::vector<double> log_power(est.power.size());
  for (std::size_t i = 0; i < est.power.size(); ++i) log_power[i] = std::log(std::max(est.power[i], kPowerFloor));
  return lifter_log_power(log_power, est.frames, fb.config, lifter_order);
}

TfFilter constant_filter(Complex value, std::size_t frames, const StftConfig& cfg) {
  validate(cfg);
  TfFilter m;
  m.frames = frames;
  m.num_bins = static_cast<std::size_t>(cfg.bins());
  m.config = cfg;
  m.coeffs.assign(m.frames * m.num_bins, value);
  return m;
}

TfFilter minimum_phase_filter(const SpectralEnvelope& envelope) {
  validate(envelope.config);
  const auto n = static_cast<std::size_t>(envelope.config.fft_size);
  const std::size_t nb = envelope.num_bins;
  if (nb != n / 2 + 1 || envelope.log_power.size() != envelope.frames * nb) {
    throw ShapeError("minimum_phase_filter: envelope shape mismatch");
  }
  for (double v : envelope.log_power) {
    if (!std::isfinite(v)) throw ConfigError("minimum_phase_filter: non-finite envelope value");
  }
  const FftPlan plan(n);
  TfFilter m;
  m.frames = envelope.frames;
  m.num_bins = nb;
  m.config = envelope.config;
  m.coeffs.resize(m.frames * nb);
  std::vector<double> log_mag(nb);
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k < m.frames; ++k) {
    for (std::size_t j = 0; j < nb; ++j) log_mag[j] = 0.5 * envelope.at(k, j);
    fill_even(log_mag.data(), nb, buf);
    plan.inverse_unscaled(buf);
    // Fold the anti-causal half of the real cepstrum onto the causal half.
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t q = 0; q < n; ++q) {
      double v = buf[q].real() * inv_n;
      if (q > 0 && q < n / 2) {
        v *= 2.0;
      } else if (q > n / 2) {
        v = 0.0;
      }
      buf[q] = v;
    }
    plan.forward(buf);
    for (std::size_t j = 0; j < nb; ++j) m.coeffs[k * nb + j] = std::exp(buf[j]);
  }
  return m;
}

}  // namespace fpvoc::dsp
