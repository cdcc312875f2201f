// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/prior.hpp"

#include <algorithm>
#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc {

AdaptivePrior build_prior(const dsp::MelSpectrogram& c, const dsp::MelFilterbank& fb, const dsp::StftConfig& cfg,
                          int lifter_order) {
  if (!(fb.config == cfg)) throw ConfigError("build_prior: filterbank STFT config differs from prior config");
  dsp::SpectralEnvelope env = dsp::spectral_envelope(c, fb, lifter_order);
  double window_energy = 0.0;
  for (double w : dsp::analysis_window(cfg)) window_energy += w * w;
  const double parseval = static_cast<double>(cfg.fft_size) * window_energy;
  // Liftering a log spectrum loses level (mean of logs < log of mean), so
  // each frame is rescaled to carry the mel-implied frame power; the shift by
  // log(sum w^2) turns STFT power into per-sample filter gain.
  const dsp::PowerEstimate est = dsp::power_from_mel(c, fb);
  const std::size_t nb = env.num_bins;
  for (std::size_t k = 0; k < env.frames; ++k) {
    double* row = env.log_power.data() + k * nb;
    double full = 0.0;
    for (std::size_t n = 0; n < nb; ++n) full += (n == 0 || n == nb - 1 ? 1.0 : 2.0) * std::exp(row[n]);
    const double target = std::max(est.frame_power[k], kPriorPowerFloor) * parseval;
    const double shift = std::log(target / full) - std::log(window_energy);
    for (std::size_t n = 0; n < nb; ++n) row[n] += shift;
  }
  // Bounded dynamic range keeps L^-1 well conditioned across silences.
  if (!env.log_power.empty()) {
    const double top = *std::max_element(env.log_power.begin(), env.log_power.end());
    const double floor = top - kPriorDynamicRangeDb * std::log(10.0) / 10.0;
    for (double& v : env.log_power) v = std::max(v, floor);
  }
  AdaptivePrior p;
  p.filter = dsp::minimum_phase_filter(env);
  p.config = cfg;
  p.sample_rate = fb.sample_rate;
  return p;
}

AdaptivePrior constant_prior(double value, std::size_t frames, const dsp::StftConfig& cfg, double sample_rate) {
  AdaptivePrior p;
  p.filter = dsp::constant_filter(dsp::Complex(value, 0.0), frames, cfg);
  p.config = cfg;
  p.sample_rate = sample_rate;
  return p;
}

dsp::Waveform sample_prior(const AdaptivePrior& p, std::size_t length, Philox& rng) {
  if (length == 0) throw ConfigError("sample_prior: length must be positive");
  dsp::Waveform white;
  white.sample_rate = p.sample_rate;
  white.samples = rng.gaussian_vector(length);
  return dsp::apply_tf_filter(white, p.filter);
}

dsp::Waveform sample_prior(const AdaptivePrior& p, std::size_t length, std::uint64_t seed) {
  Philox rng(seed, 0);
  return sample_prior(p, length, rng);
}

double prior_weighted_residual(const dsp::Waveform& eps, const dsp::Waveform& eps_hat, const AdaptivePrior& p) {
  if (eps.size() != eps_hat.size()) throw ShapeError("prior_weighted_residual: lengths differ");
  dsp::Waveform r = eps;
  for (std::size_t i = 0; i < r.size(); ++i) r.samples[i] -= eps_hat.samples[i];
  const dsp::Waveform w = dsp::apply_tf_filter_inverse(r, p.filter);
  double acc = 0.0;
  for (double v : w.samples) acc += v * v;
  return acc;
}

}  // namespace fpvoc
