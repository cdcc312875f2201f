// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/stft.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

void validate(const Waveform& x) {
  if (x.samples.empty()) throw ConfigError("waveform is empty");
  if (!(x.sample_rate > 0.0)) throw ConfigError("waveform sample rate must be positive");
  for (double v : x.samples) {
    if (!std::isfinite(v)) throw ConfigError("waveform contains non-finite samples");
  }
}

void validate(const StftConfig& cfg) {
  if (cfg.hop <= 0 || cfg.window_length <= 0 || cfg.fft_size <= 0) {
    throw ConfigError("STFT sizes must be positive");
  }
  if (cfg.hop > cfg.window_length) throw ConfigError("STFT hop exceeds window length");
  if (cfg.window_length > cfg.fft_size) throw ConfigError("STFT window length exceeds FFT size");
  if (!is_power_of_two(static_cast<std::size_t>(cfg.fft_size))) {
    throw ConfigError("STFT FFT size must be a power of two, got " + std::to_string(cfg.fft_size));
  }
}

StftConfig stft_config_from_ms(double sample_rate, double window_ms, double hop_ms, int fft_size) {
  StftConfig cfg;
  cfg.window_length = static_cast<int>(std::lround(sample_rate * window_ms / 1000.0));
  cfg.hop = static_cast<int>(std::lround(sample_rate * hop_ms / 1000.0));
  cfg.fft_size = fft_size;
  validate(cfg);
  return cfg;
}

std::vector<double> analysis_window(const StftConfig& cfg) {
  validate(cfg);
  const auto n = static_cast<std::size_t>(cfg.window_length);
  std::vector<double> w(n, 1.0);
  if (cfg.window == WindowType::kHann) {
    for (std::size_t t = 0; t < n; ++t) {
      w[t] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n));
    }
  }
  return w;
}

std::vector<double> dual_window(const StftConfig& cfg) {
  const std::vector<double> w = analysis_window(cfg);
  const auto hop = static_cast<std::size_t>(cfg.hop);
  std::vector<double> phase_sum(hop, 0.0);
  for (std::size_t t = 0; t < w.size(); ++t) phase_sum[t % hop] += w[t] * w[t];
  for (double s : phase_sum) {
    if (s < 1e-12) throw ConfigError("window/hop pair is not invertible (zero window-square sum)");
  }
  std::vector<double> dual(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) dual[t] = w[t] / phase_sum[t % hop];
  return dual;
}

std::size_t frame_count(std::size_t length, const StftConfig& cfg) {
  const auto hop = static_cast<std::size_t>(cfg.hop);
  return (length + hop - 1) / hop;
}

std::size_t reflect_index(long long index, std::size_t length) {
  if (length <= 1) return 0;
  const auto period = static_cast<long long>(2 * (length - 1));
  long long m = index % period;
  if (m < 0) m += period;
  return static_cast<std::size_t>(m < static_cast<long long>(length) ? m : period - m);
}

namespace {

// FFT of two real sequences in one complex transform.
void real_fft_pair(const FftPlan& plan, std::vector<Complex>& buf, std::span<Complex> out_a,
                   std::span<Complex> out_b) {
  plan.forward(buf);
  const std::size_t n = plan.size();
  for (std::size_t k = 0; k < out_a.size(); ++k) {
    const Complex zk = buf[k];
    const Complex zc = std::conj(buf[(n - k) % n]);
    out_a[k] = 0.5 * (zk + zc);
    out_b[k] = Complex(0.0, -0.5) * (zk - zc);
  }
}

// Fill buf with the Hermitian extension of half spectra a (+ i b).
// DC and Nyquist contribute only their real parts.
void hermitian_extend_pair(std::span<const Complex> a, std::span<const Complex> b, std::vector<Complex>& buf) {
  const std::size_t n = buf.size();
  const std::size_t half = n / 2;
  const Complex i(0.0, 1.0);
  buf[0] = Complex(a[0].real(), 0.0) + i * Complex(b.empty() ? 0.0 : b[0].real(), 0.0);
  buf[half] = Complex(a[half].real(), 0.0) + i * Complex(b.empty() ? 0.0 : b[half].real(), 0.0);
  for (std::size_t k = 1; k < half; ++k) {
    const Complex bk = b.empty() ? Complex() : b[k];
    buf[k] = a[k] + i * bk;
    buf[n - k] = std::conj(a[k]) + i * std::conj(bk);
  }
}

}  // namespace

StftEngine::StftEngine(const StftConfig& cfg)
    : cfg_(cfg), plan_(static_cast<std::size_t>(cfg.fft_size)), window_(analysis_window(cfg)) {}

std::size_t StftEngine::frames(std::size_t length) const { return frame_count(length, cfg_); }

std::vector<Complex> StftEngine::analyze(std::span<const double> x) const {
  if (x.empty()) throw ShapeError("cannot analyze an empty signal");
  const std::size_t length = x.size();
  const std::size_t num_frames = frames(length);
  const std::size_t nb = bins();
  const auto wl = static_cast<std::size_t>(cfg_.window_length);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  const auto pad = static_cast<long long>(wl / 2);
  std::vector<Complex> out(num_frames * nb);
  std::vector<Complex> buf(plan_.size());
  std::vector<Complex> dummy(nb);
  auto sample = [&](std::size_t frame, std::size_t t) {
    const long long p = static_cast<long long>(frame * hop + t) - pad;
    return window_[t] * x[reflect_index(p, length)];
  };
  for (std::size_t k = 0; k < num_frames; k += 2) {
    const bool pair = k + 1 < num_frames;
    std::fill(buf.begin(), buf.end(), Complex());
    for (std::size_t t = 0; t < wl; ++t) {
      buf[t] = Complex(sample(k, t), pair ? sample(k + 1, t) : 0.0);
    }
    std::span<Complex> a(out.data() + k * nb, nb);
    std::span<Complex> b = pair ? std::span<Complex>(out.data() + (k + 1) * nb, nb) : std::span<Complex>(dummy);
    real_fft_pair(plan_, buf, a, b);
  }
  return out;
}

std::vector<double> StftEngine::analyze_adjoint(std::span<const Complex> grad, std::size_t length) const {
  const std::size_t num_frames = frames(length);
  const std::size_t nb = bins();
  if (grad.size() != num_frames * nb) throw ShapeError("STFT adjoint: gradient shape mismatch");
  const auto wl = static_cast<std::size_t>(cfg_.window_length);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  const auto pad = static_cast<long long>(wl / 2);
  const std::size_t n = plan_.size();
  std::vector<double> gx(length, 0.0);
  std::vector<Complex> buf(n);
  // Re(sum_n G[n] e^{+i theta}) over the half spectrum equals the inverse
  // FFT of its Hermitian part: Re on DC/Nyquist, G/2 and conj(G)/2 elsewhere.
  std::vector<Complex> ha(nb), hb(nb);
  for (std::size_t k = 0; k < num_frames; k += 2) {
    const bool pair = k + 1 < num_frames;
    for (std::size_t j = 0; j < nb; ++j) {
      const double scale = (j == 0 || j == nb - 1) ? 1.0 : 0.5;
      ha[j] = grad[k * nb + j] * scale;
      hb[j] = pair ? grad[(k + 1) * nb + j] * scale : Complex();
    }
    hermitian_extend_pair(ha, hb, buf);
    plan_.inverse_unscaled(buf);
    for (std::size_t t = 0; t < wl; ++t) {
      const long long pa = static_cast<long long>(k * hop + t) - pad;
      gx[reflect_index(pa, length)] += window_[t] * buf[t].real();
      if (pair) {
        const long long pb = static_cast<long long>((k + 1) * hop + t) - pad;
        gx[reflect_index(pb, length)] += window_[t] * buf[t].imag();
      }
    }
  }
  return gx;
}

std::vector<double> StftEngine::window_square_sum(std::size_t padded_length, std::size_t num_frames) const {
  const auto wl = static_cast<std::size_t>(cfg_.window_length);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  std::vector<double> wss(padded_length, 0.0);
  for (std::size_t k = 0; k < num_frames; ++k) {
    for (std::size_t t = 0; t < wl && k * hop + t < padded_length; ++t) wss[k * hop + t] += window_[t] * window_[t];
  }
  return wss;
}

std::vector<double> StftEngine::synthesize(std::span<const Complex> spec, std::size_t length) const {
  const std::size_t num_frames = frames(length);
  const std::size_t nb = bins();
  if (spec.size() != num_frames * nb) throw ShapeError("iSTFT: spectrogram shape does not match signal length");
  const auto wl = static_cast<std::size_t>(cfg_.window_length);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  const std::size_t pad = wl / 2;
  const std::size_t padded = length + 2 * pad;
  const std::size_t n = plan_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> acc(padded, 0.0);
  std::vector<Complex> buf(n);
  for (std::size_t k = 0; k < num_frames; k += 2) {
    const bool pair = k + 1 < num_frames;
    std::span<const Complex> a(spec.data() + k * nb, nb);
    std::span<const Complex> b = pair ? std::span<const Complex>(spec.data() + (k + 1) * nb, nb)
                                      : std::span<const Complex>();
    hermitian_extend_pair(a, b, buf);
    plan_.inverse_unscaled(buf);
    for (std::size_t t = 0; t < wl; ++t) {
      acc[k * hop + t] += window_[t] * buf[t].real() * inv_n;
      if (pair) acc[(k + 1) * hop + t] += window_[t] * buf[t].imag() * inv_n;
    }
  }
  const std::vector<double> wss = window_square_sum(padded, num_frames);
  std::vector<double> out(length);
  for (std::size_t i = 0; i < length; ++i) {
    const double s = wss[i + pad];
    if (s < 1e-12) throw ConfigError("iSTFT: window/hop pair leaves samples uncovered");
    out[i] = acc[i + pad] / s;
  }
  return out;
}

std::vector<Complex> StftEngine::synthesize_adjoint(std::span<const double> grad, std::size_t length) const {
  if (grad.size() != length) throw ShapeError("iSTFT adjoint: gradient length mismatch");
  const std::size_t num_frames = frames(length);
  const std::size_t nb = bins();
  const auto wl = static_cast<std::size_t>(cfg_.window_length);
  const auto hop = static_cast<std::size_t>(cfg_.hop);
  const std::size_t pad = wl / 2;
  const std::size_t padded = length + 2 * pad;
  const std::size_t n = plan_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const std::vector<double> wss = window_square_sum(padded, num_frames);
  std::vector<double> gp(padded, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const double s = wss[i + pad];
    if (s < 1e-12) throw ConfigError("iSTFT: window/hop pair leaves samples uncovered");
    gp[i + pad] = grad[i] / s;
  }
  std::vector<Complex> out(num_frames * nb);
  std::vector<Complex> buf(n);
  std::vector<Complex> dummy(nb);
  for (std::size_t k = 0; k < num_frames; k += 2) {
    const bool pair = k + 1 < num_frames;
    std::fill(buf.begin(), buf.end(), Complex());
    for (std::size_t t = 0; t < wl; ++t) {
      const double ua = window_[t] * gp[k * hop + t] * inv_n;
      const double ub = pair ? window_[t] * gp[(k + 1) * hop + t] * inv_n : 0.0;
      buf[t] = Complex(ua, ub);
    }
    std::span<Complex> a(out.data() + k * nb, nb);
    std::span<Complex> b = pair ? std::span<Complex>(out.data() + (k + 1) * nb, nb) : std::span<Complex>(dummy);
    real_fft_pair(plan_, buf, a, b);
    for (std::size_t j = 1; j + 1 < nb; ++j) {
      a[j] *= 2.0;
      if (pair) b[j] *= 2.0;
    }
  }
  return out;
}

ComplexSpectrogram stft(const Waveform& x, const StftConfig& cfg) {
  validate(x);
  validate(cfg);
  const StftEngine engine(cfg);
  ComplexSpectrogram spec;
  spec.bins = engine.analyze(x.samples);
  spec.frames = engine.frames(x.size());
  spec.num_bins = engine.bins();
  spec.signal_length = x.size();
  spec.sample_rate = x.sample_rate;
  spec.config = cfg;
  return spec;
}

Waveform istft(const ComplexSpectrogram& spec) {
  validate(spec.config);
  const StftEngine engine(spec.config);
  if (spec.num_bins != engine.bins() || spec.frames != engine.frames(spec.signal_length) ||
      spec.bins.size() != spec.frames * spec.num_bins) {
    throw ShapeError("iSTFT: spectrogram dimensions do not match its configuration");
  }
  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples = engine.synthesize(spec.bins, spec.signal_length);
  return out;
}

}  // namespace fpvoc::dsp
