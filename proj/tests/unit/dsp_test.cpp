// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "fpvoc/dsp/envelope.hpp"
#include "fpvoc/dsp/fft.hpp"
#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/dsp/tf_filter.hpp"
#include "fpvoc/dsp/wav.hpp"
#include "fpvoc/error.hpp"
#include "fpvoc/rng.hpp"

using namespace fpvoc;
using namespace fpvoc::dsp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Waveform noise(std::size_t n, std::uint64_t seed) {
  Philox rng(seed, 0);
  return {rng.gaussian_vector(n), 24000.0};
}

double rel_l2(std::span<const double> a, std::span<const double> b, std::size_t from = 0, std::size_t to = 0) {
  if (to == 0) to = a.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = from; i < to; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("fft matches a direct DFT", "[fft]") {
  const std::size_t n = 64;
  Philox rng(3, 0);
  std::vector<Complex> x(n);
  for (auto& v : x) v = Complex(rng.gaussian(), rng.gaussian());
  std::vector<Complex> direct(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = 0; t < n; ++t) {
      direct[k] += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * double(k * t) / double(n));
    }
  }
  FftPlan plan(n);
  auto y = x;
  plan.forward(y);
  for (std::size_t k = 0; k < n; ++k) REQUIRE(std::abs(y[k] - direct[k]) < 1e-10);

  plan.inverse_unscaled(y);
  for (std::size_t t = 0; t < n; ++t) REQUIRE(std::abs(y[t] / double(n) - x[t]) < 1e-12);

  std::vector<double> real(40);
  for (auto& v : real) v = rng.gaussian();
  std::vector<Complex> half(n / 2 + 1), full(n);
  plan.forward_real(real, half);
  for (std::size_t t = 0; t < real.size(); ++t) full[t] = real[t];
  plan.forward(full);
  for (std::size_t k = 0; k <= n / 2; ++k) REQUIRE(std::abs(half[k] - full[k]) < 1e-10);

  REQUIRE_THROWS_AS(FftPlan(48), ConfigError);
}

TEST_CASE("stft configuration helpers", "[stft]") {
  const StftConfig ms = stft_config_from_ms(24000.0, 50.0, 12.5, 2048);
  REQUIRE(ms.window_length == 1200);
  REQUIRE(ms.hop == 300);
  REQUIRE(ms.fft_size == 2048);
  REQUIRE(frame_count(600, ms) == 2);
  REQUIRE(frame_count(601, ms) == 3);
  REQUIRE_THROWS_AS(validate(StftConfig{1200, 300, 1000}), ConfigError);
  REQUIRE_THROWS_AS(validate(StftConfig{1200, 1300, 2048}), ConfigError);
  REQUIRE_THROWS_AS(validate(StftConfig{4096, 300, 2048}), ConfigError);

  REQUIRE(reflect_index(-1, 5) == 1);
  REQUIRE(reflect_index(5, 5) == 3);
  REQUIRE(reflect_index(-9, 5) == 1);
  REQUIRE(reflect_index(2, 5) == 2);
  REQUIRE(reflect_index(-3, 1) == 0);
}

TEST_CASE("periodic hann window and its dual overlap-add to one", "[stft]") {
  const StftConfig cfg{1200, 300, 2048};
  const auto w = analysis_window(cfg);
  REQUIRE(w.size() == 1200);
  REQUIRE_THAT(w[0], WithinAbs(0.0, 1e-15));
  REQUIRE_THAT(w[600], WithinAbs(1.0, 1e-15));
  const auto d = dual_window(cfg);
  for (int t = 0; t < cfg.hop; ++t) {
    double s = 0.0;
    for (int m = 0; m * cfg.hop + t < cfg.window_length; ++m) s += w[m * cfg.hop + t] * d[m * cfg.hop + t];
    REQUIRE_THAT(s, WithinAbs(1.0, 1e-12));
  }
  REQUIRE_THROWS_AS(dual_window(StftConfig{16, 16, 16, WindowType::kHann}), ConfigError);
}

TEST_CASE("istft inverts stft", "[stft]") {
  for (const StftConfig cfg : {StftConfig{1200, 300, 2048}, StftConfig{240, 48, 512}, StftConfig{64, 16, 64}}) {
    const Waveform x = noise(7 * 1200 + 13, 5);
    const ComplexSpectrogram spec = stft(x, cfg);
    REQUIRE(spec.frames == frame_count(x.size(), cfg));
    REQUIRE(spec.num_bins == static_cast<std::size_t>(cfg.bins()));
    const Waveform y = istft(spec);
    REQUIRE(y.size() == x.size());
    REQUIRE(rel_l2(y.samples, x.samples) < 1e-10);
  }
}

TEST_CASE("stft engine adjoints are transposes", "[stft]") {
  const StftConfig cfg{64, 16, 64};
  const StftEngine engine(cfg);
  const std::size_t len = 200;
  const Waveform x = noise(len, 8);
  Philox rng(9, 0);
  std::vector<Complex> y(engine.frames(len) * engine.bins());
  for (auto& v : y) v = Complex(rng.gaussian(), rng.gaussian());

  const auto ax = engine.analyze(x.samples);
  const auto aty = engine.analyze_adjoint(y, len);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) lhs += ax[i].real() * y[i].real() + ax[i].imag() * y[i].imag();
  for (std::size_t i = 0; i < len; ++i) rhs += x.samples[i] * aty[i];
  REQUIRE_THAT(lhs, WithinRel(rhs, 1e-11));

  const auto sy = engine.synthesize(y, len);
  const auto stx = engine.synthesize_adjoint(x.samples, len);
  lhs = rhs = 0.0;
  for (std::size_t i = 0; i < len; ++i) lhs += sy[i] * x.samples[i];
  for (std::size_t i = 0; i < y.size(); ++i) rhs += y[i].real() * stx[i].real() + y[i].imag() * stx[i].imag();
  REQUIRE_THAT(lhs, WithinRel(rhs, 1e-11));
}

TEST_CASE("htk mel scale", "[mel]") {
  REQUIRE_THAT(hz_to_mel(1000.0), WithinAbs(2595.0 * std::log10(1.0 + 1000.0 / 700.0), 1e-12));
  for (double f : {0.0, 55.0, 440.0, 7999.0}) REQUIRE_THAT(mel_to_hz(hz_to_mel(f)), WithinAbs(f, 1e-9));
}

TEST_CASE("mel filterbank shape and coverage", "[mel]") {
  const StftConfig cfg{1200, 300, 2048};
  const MelFilterbank fb = default_mel_filterbank(cfg, 24000.0);
  REQUIRE(fb.bands == 128);
  REQUIRE(fb.num_bins == 1025);
  for (std::size_t b = 0; b < fb.bands; ++b) {
    double peak = 0.0;
    for (std::size_t n = 0; n < fb.num_bins; ++n) {
      REQUIRE(fb.at(b, n) >= 0.0);
      peak = std::max(peak, fb.at(b, n));
    }
    REQUIRE(peak > 0.0);
    REQUIRE(peak <= 1.0 + 1e-12);
  }
  REQUIRE_THROWS_AS(mel_filterbank(8, 500.0, 100.0, cfg, 24000.0), ConfigError);
}

TEST_CASE("log mel of a sinusoid peaks at its band", "[mel]") {
  const StftConfig cfg{1200, 300, 2048};
  const MelFilterbank fb = default_mel_filterbank(cfg, 24000.0);
  Waveform x;
  x.samples.resize(24000);
  for (std::size_t t = 0; t < x.size(); ++t) x.samples[t] = 0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * t / 24000.0);
  const MelSpectrogram c = log_mel(x, fb, cfg);
  REQUIRE(c.frames == frame_count(x.size(), cfg));
  const std::size_t k = c.frames / 2;
  std::size_t best = 0;
  for (std::size_t b = 1; b < c.bands; ++b) {
    if (c.at(b, k) > c.at(best, k)) best = b;
  }
  // Band whose triangle peaks closest to 1 kHz.
  double best_hz = 0.0, best_w = -1.0;
  for (std::size_t n = 0; n < fb.num_bins; ++n) {
    if (fb.at(best, n) > best_w) {
      best_w = fb.at(best, n);
      best_hz = n * 24000.0 / cfg.fft_size;
    }
  }
  REQUIRE(std::abs(best_hz - 1000.0) < 60.0);

  // Silence sits on the log floor.
  Waveform quiet{std::vector<double>(3000, 0.0), 24000.0};
  for (double v : log_mel(quiet, fb, cfg).values) REQUIRE_THAT(v, WithinAbs(std::log(kLogAmplitudeFloor), 1e-12));
}

TEST_CASE("power from mel tracks the signal power", "[mel]") {
  const StftConfig cfg{1200, 300, 2048};
  const MelFilterbank fb = default_mel_filterbank(cfg, 24000.0);
  const Waveform x = noise(24000, 17);
  const PowerEstimate est = power_from_mel(log_mel(x, fb, cfg), fb);
  // White noise is not what the calibration targets; it lands within 20%.
  REQUIRE(est.total > 0.8);
  REQUIRE(est.total < 1.5);
  REQUIRE(est.frame_power.size() == est.frames);
}

TEST_CASE("wav round trip", "[wav]") {
  const auto dir = std::filesystem::temp_directory_path() / "fpvoc_dsp_test";
  std::filesystem::create_directories(dir);
  Waveform x = noise(1000, 21);
  for (auto& v : x.samples) v = std::clamp(0.25 * v, -0.99, 0.99);
  for (auto& v : x.samples) v = static_cast<float>(v);

  write_wav((dir / "f.wav").string(), x, WavFormat::kFloat32);
  const Waveform y = read_wav((dir / "f.wav").string(), 24000.0);
  REQUIRE(y.samples == x.samples);
  REQUIRE(y.sample_rate == 24000.0);

  write_wav((dir / "p.wav").string(), x, WavFormat::kPcm16);
  const Waveform z = read_wav((dir / "p.wav").string());
  REQUIRE(z.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(std::abs(z.samples[i] - x.samples[i]) <= 1.0 / 32767.0);

  REQUIRE_THROWS_AS(read_wav((dir / "p.wav").string(), 16000.0), IoError);
  REQUIRE_THROWS_AS(read_wav((dir / "missing.wav").string()), IoError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("lifter keeps low quefrencies", "[envelope]") {
  const StftConfig cfg{1200, 300, 2048};
  const std::size_t bins = cfg.bins(), frames = 2;
  std::vector<double> lp(frames * bins);
  for (std::size_t k = 0; k < frames; ++k) {
    for (std::size_t n = 0; n < bins; ++n) {
      lp[k * bins + n] = 0.5 * k - 1.0 + 0.3 * std::cos(2.0 * std::numbers::pi * 3.0 * n / cfg.fft_size);
    }
  }
  const SpectralEnvelope env = lifter_log_power(lp, frames, cfg, kDefaultLifterOrder);
  for (std::size_t i = 0; i < lp.size(); ++i) REQUIRE_THAT(env.log_power[i], WithinAbs(lp[i], 1e-10));

  // A quefrency above the lifter order is removed.
  std::vector<double> hi(bins);
  for (std::size_t n = 0; n < bins; ++n) hi[n] = std::cos(2.0 * std::numbers::pi * 40.0 * n / cfg.fft_size);
  for (double v : lifter_log_power(hi, 1, cfg, kDefaultLifterOrder).log_power) REQUIRE_THAT(v, WithinAbs(0.0, 1e-10));
}

TEST_CASE("minimum phase filter is causal with the requested magnitude", "[envelope]") {
  const StftConfig cfg{1200, 300, 2048};
  const std::size_t bins = cfg.bins(), n = cfg.fft_size;
  SpectralEnvelope env;
  env.frames = 1;
  env.num_bins = bins;
  env.config = cfg;
  env.log_power.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    env.log_power[i] = -2.0 + 1.5 * std::cos(2.0 * std::numbers::pi * 2.0 * i / n) + 0.4 * std::cos(2.0 * std::numbers::pi * 9.0 * i / n);
  }
  const TfFilter f = minimum_phase_filter(env);
  for (std::size_t i = 0; i < bins; ++i) REQUIRE_THAT(std::abs(f.at(0, i)), WithinRel(std::exp(0.5 * env.log_power[i]), 1e-9));

  std::vector<Complex> full(n);
  for (std::size_t i = 0; i < bins; ++i) full[i] = f.at(0, i);
  for (std::size_t i = bins; i < n; ++i) full[i] = std::conj(full[n - i]);
  FftPlan(n).inverse_unscaled(full);
  double early = 0.0, late = 0.0;
  for (std::size_t t = 0; t < n; ++t) (t < n / 2 ? early : late) += std::norm(full[t]);
  REQUIRE(late / early < 1e-8);
  for (std::size_t t = 0; t < n; ++t) REQUIRE(std::abs(full[t].imag()) < 1e-9 * n);
}

TEST_CASE("constant tf filters scale and invert exactly", "[tf_filter]") {
  const StftConfig cfg{1200, 300, 2048};
  const Waveform x = noise(20 * 300, 31);
  const TfFilter m = constant_filter(Complex(0.5, 0.0), 20, cfg);
  const Waveform y = apply_tf_filter(x, m);
  std::vector<double> half(x.samples);
  for (auto& v : half) v *= 0.5;
  REQUIRE(rel_l2(y.samples, half) < 1e-10);
  REQUIRE(rel_l2(apply_tf_filter_inverse(y, m).samples, x.samples) < 1e-10);

  TfFilter bad = m;
  bad.coeffs[5] = 0.0;
  REQUIRE_THROWS_AS(apply_tf_filter_inverse(x, bad), ConditioningError);
}

TEST_CASE("tf filter operator adjoint", "[tf_filter]") {
  const StftConfig cfg{64, 16, 64};
  TfFilter m = constant_filter(Complex(1.0, 0.0), 10, cfg);
  Philox rng(41, 0);
  for (auto& c : m.coeffs) c = Complex(0.5 + rng.uniform(), rng.gaussian());
  const TfFilterOperator op(m, false);
  REQUIRE(op.signal_length() == 160);
  const Waveform x = noise(160, 42), g = noise(160, 43);
  const auto ax = op.apply(x.samples);
  const auto atg = op.apply_adjoint(g.samples);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < 160; ++i) {
    lhs += ax[i] * g.samples[i];
    rhs += x.samples[i] * atg[i];
  }
  REQUIRE_THAT(lhs, WithinRel(rhs, 1e-11));
}

TEST_CASE("gain operator", "[gain]") {
  const Waveform z = noise(4000, 51);
  const double pz = mean_square(z.samples);
  const double pc = 0.04;

  const Waveform s = gain_adjust(z, pc, GainMode::kSqrt);
  REQUIRE_THAT(mean_square(s.samples), WithinRel(pc * pz / (pz + kGainEpsilon), 1e-12));
  const Waveform s2 = gain_adjust(s, pc, GainMode::kSqrt);
  REQUIRE(rel_l2(s2.samples, s.samples) < 1e-6);

  const Waveform l = gain_adjust(z, pc, GainMode::kLiteral);
  REQUIRE_THAT(l.samples[7], WithinRel(z.samples[7] * pc / (pz + kGainEpsilon), 1e-14));
  REQUIRE_THAT(gain_factor(pc, pz, GainMode::kLiteral), WithinRel(pc / (pz + kGainEpsilon), 1e-14));

  REQUIRE(parse_gain_mode("paper") == GainMode::kLiteral);
  REQUIRE(parse_gain_mode("sqrt") == GainMode::kSqrt);
  REQUIRE(to_string(GainMode::kSqrt) == "sqrt");
  REQUIRE_THROWS_AS(parse_gain_mode("cube"), ConfigError);
}

TEST_CASE("waveform validation", "[waveform]") {
  REQUIRE_THROWS_AS(validate(Waveform{}), ConfigError);
  REQUIRE_THROWS_AS(validate(Waveform{{0.0, std::nan("")}, 24000.0}), ConfigError);
  REQUIRE_NOTHROW(validate(Waveform{{0.0, 0.5}, 24000.0}));
}
