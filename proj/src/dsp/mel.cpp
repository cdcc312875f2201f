// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/mel.hpp"

#include <algorithm>
#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank mel_filterbank(int bands, double f_low, double f_high, const StftConfig& cfg, double sample_rate) {
  validate(cfg);
  if (bands < 1) throw ConfigError("mel filterbank needs at least one band");
  if (!(f_low >= 0.0 && f_low < f_high && f_high <= sample_rate / 2.0)) {
    throw ConfigError("mel band edges must satisfy 0 <= f_low < f_high <= sample_rate/2");
  }
  MelFilterbank fb;
  fb.bands = static_cast<std::size_t>(bands);
  fb.num_bins = static_cast<std::size_t>(cfg.bins());
  fb.f_low = f_low;
  fb.f_high = f_high;
  fb.sample_rate = sample_rate;
  fb.config = cfg;
  fb.weights.assign(fb.bands * fb.num_bins, 0.0);

  const double mel_lo = hz_to_mel(f_low);
  const double mel_hi = hz_to_mel(f_high);
  std::vector<double> edges(fb.bands + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(fb.bands + 1));
  }
  const double bin_hz = sample_rate / static_cast<double>(cfg.fft_size);
  for (std::size_t b = 0; b < fb.bands; ++b) {
    const double lo = edges[b];
    const double mid = edges[b + 1];
    const double hi = edges[b + 2];
    bool any = false;
    for (std::size_t n = 0; n < fb.num_bins; ++n) {
      const double f = static_cast<double>(n) * bin_hz;
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      if (w > 0.0) {
        fb.weights[b * fb.num_bins + n] = w;
        any = true;
      }
    }
    // Bands narrower than one bin collapse onto the bin nearest their peak.
    if (!any) {
      const auto n = std::min(fb.num_bins - 1, static_cast<std::size_t>(std::lround(mid / bin_hz)));
      fb.weights[b * fb.num_bins + n] = 1.0;
    }
  }
  return fb;
}

MelFilterbank default_mel_filterbank(const StftConfig& cfg, double sample_rate) {
  return mel_filterbank(128, 20.0, std::min(12000.0, sample_rate / 2.0), cfg, sample_rate);
}

MelSpectrogram amplitude_mel(const Waveform& x, const MelFilterbank& fb) {
  const ComplexSpectrogram spec = stft(x, fb.config);
  if (spec.num_bins != fb.num_bins) throw ShapeError("filterbank does not match STFT bin count");
  MelSpectrogram mel;
  mel.bands = fb.bands;
  mel.frames = spec.frames;
  mel.kind = MelKind::kAmplitude;
  mel.values.assign(mel.bands * mel.frames, 0.0);
  std::vector<double> mag(spec.num_bins);
  for (std::size_t k = 0; k < spec.frames; ++k) {
    for (std::size_t n = 0; n < spec.num_bins; ++n) mag[n] = std::abs(spec.at(k, n));
    for (std::size_t b = 0; b < fb.bands; ++b) {
      const double* w = fb.weights.data() + b * fb.num_bins;
      double acc = 0.0;
      for (std::size_t n = 0; n < fb.num_bins; ++n) acc += w[n] * mag[n];
      mel.at(b, k) = acc;
    }
  }
  return mel;
}

MelSpectrogram log_mel(const Waveform& x, const MelFilterbank& fb, const StftConfig& cfg) {
  if (!(cfg == fb.config)) throw ConfigError("log_mel: STFT config differs from the filterbank's");
  if (std::abs(x.sample_rate - fb.sample_rate) > 1e-9) throw ConfigError("log_mel: sample rate mismatch");
  MelSpectrogram mel = amplitude_mel(x, fb);
  for (double& v : mel.values) v = std::log(std::max(v, kLogAmplitudeFloor));
  mel.kind = MelKind::kLogAmplitude;
  return mel;
}

PowerEstimate power_from_mel(const MelSpectrogram& c, const MelFilterbank& fb) {
  if (c.bands != fb.bands) throw ShapeError("power_from_mel: band count differs from filterbank");
  if (c.frames == 0) throw ShapeError("power_from_mel: empty mel spectrogram");
  const std::size_t nb = fb.num_bins;
  std::vector<double> row_sum(fb.bands, 0.0);
  for (std::size_t b = 0; b < fb.bands; ++b) {
    for (std::size_t n = 0; n < nb; ++n) row_sum[b] += fb.at(b, n);
  }
  // Normalizer chosen so a spectrum constant across each band inverts exactly.
  std::vector<double> denom(nb, 0.0);
  for (std::size_t b = 0; b < fb.bands; ++b) {
    for (std::size_t n = 0; n < nb; ++n) denom[n] += fb.at(b, n) * row_sum[b];
  }

  const std::vector<double> window = analysis_window(fb.config);
  double window_energy = 0.0;
  for (double w : window) window_energy += w * w;
  const double parseval = static_cast<double>(fb.config.fft_size) * window_energy;

  PowerEstimate est;
  est.frames = c.frames;
  est.num_bins = nb;
  est.power.assign(c.frames * nb, 0.0);
  est.frame_power.assign(c.frames, 0.0);
  std::vector<double> amp(fb.bands);
  for (std::size_t k = 0; k < c.frames; ++k) {
    for (std::size_t b = 0; b < fb.bands; ++b) {
      const double v = c.at(b, k);
      switch (c.kind) {
        case MelKind::kLogAmplitude: amp[b] = std::exp(v); break;
        case MelKind::kAmplitude: amp[b] = std::max(v, 0.0); break;
        case MelKind::kPower: amp[b] = std::sqrt(std::max(v, 0.0)); break;
      }
    }
    double full = 0.0;
    for (std::size_t n = 0; n < nb; ++n) {
      if (denom[n] <= 0.0) continue;
      double a = 0.0;
      for (std::size_t b = 0; b < fb.bands; ++b) a += fb.at(b, n) * amp[b];
      a = std::max(a / denom[n], 0.0);
      const double p = a * a;
      est.power[k * nb + n] = p;
      full += (n == 0 || n == nb - 1) ? p : 2.0 * p;
    }
    est.frame_power[k] = kMelPowerCalibration * full / parseval;
    est.total += est.frame_power[k];
  }
  est.total /= static_cast<double>(c.frames);
  return est;
}

}  // namespace fpvoc::dsp
