// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/error.hpp"
#include "fpvoc/prior.hpp"
#include "fpvoc/train/corpus.hpp"

using namespace fpvoc;
using Catch::Matchers::WithinRel;

namespace {

const dsp::StftConfig kCfg{1200, 300, 2048};

// Time-invariant conditioning with a smooth spectral tilt and one resonance.
dsp::MelSpectrogram stationary_mel(std::size_t frames) {
  dsp::MelSpectrogram c;
  c.bands = 128;
  c.frames = frames;
  c.values.resize(c.bands * frames);
  for (std::size_t b = 0; b < c.bands; ++b) {
    const double u = static_cast<double>(b) / 127.0;
    const double v = -1.0 - 3.0 * u + 1.2 * std::exp(-40.0 * (u - 0.35) * (u - 0.35));
    for (std::size_t k = 0; k < frames; ++k) c.at(b, k) = v;
  }
  return c;
}

}  // namespace

TEST_CASE("constant prior has variance c0 squared", "[prior]") {
  const double c0 = 0.3;
  const std::size_t frames = 3334;
  const AdaptivePrior p = constant_prior(c0, frames, kCfg, 24000.0);
  const dsp::Waveform e = sample_prior(p, 1000000, std::uint64_t{5});
  REQUIRE(e.size() == 1000000);
  REQUIRE_THAT(dsp::mean_square(e.samples), WithinRel(c0 * c0, 0.05));
}

TEST_CASE("shaped prior periodogram follows the filter magnitude", "[prior]") {
  const dsp::MelFilterbank fb = dsp::default_mel_filterbank(kCfg, 24000.0);
  const std::size_t frames = 2000;
  const AdaptivePrior p = build_prior(stationary_mel(frames), fb, kCfg);
  const dsp::Waveform e = sample_prior(p, p.signal_length(), std::uint64_t{6});
  const dsp::ComplexSpectrogram spec = dsp::stft(e, kCfg);

  double wsum = 0.0;
  for (double w : dsp::analysis_window(kCfg)) wsum += w * w;
  const std::size_t bins = spec.num_bins;
  std::vector<double> measured(bins, 0.0), expected(bins, 0.0);
  std::size_t used = 0;
  for (std::size_t k = 8; k + 8 < spec.frames; ++k, ++used) {
    for (std::size_t n = 0; n < bins; ++n) measured[n] += std::norm(spec.at(k, n));
  }
  for (std::size_t n = 0; n < bins; ++n) {
    measured[n] /= static_cast<double>(used);
    expected[n] = std::norm(p.filter.at(frames / 2, n)) * wsum;
  }
  // Mid-band: 300 Hz to 8 kHz, compared in groups of 8 bins.
  const auto bin_of = [&](double hz) { return static_cast<std::size_t>(hz / 24000.0 * kCfg.fft_size); };
  double worst = 0.0;
  for (std::size_t n = bin_of(300.0); n + 8 <= bin_of(8000.0); n += 8) {
    double m = 0.0, x = 0.0;
    for (std::size_t j = n; j < n + 8; ++j) {
      m += measured[j];
      x += expected[j];
    }
    worst = std::max(worst, std::abs(10.0 * std::log10(m / x)));
  }
  REQUIRE(worst < 1.0);
}

TEST_CASE("prior power follows the conditioning", "[prior]") {
  const dsp::MelFilterbank fb = dsp::default_mel_filterbank(kCfg, 24000.0);
  const train::Corpus corpus = train::make_synthetic_corpus(8, 404, 24000.0, 1.2, fb);
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    const auto& clip = corpus.clips[i];
    const AdaptivePrior p = build_prior(clip.mel, fb, kCfg);
    REQUIRE(p.signal_length() == clip.audio.size());
    double acc = 0.0;
    for (std::uint64_t s = 0; s < 8; ++s) acc += dsp::mean_square(sample_prior(p, p.signal_length(), s).samples);
    const double ratio = acc / 8.0 / dsp::target_power(clip.mel, fb);
    CAPTURE(i, ratio);
    REQUIRE(ratio > 0.75);
    REQUIRE(ratio < 1.33);
  }
}

TEST_CASE("prior filters have bounded dynamic range", "[prior]") {
  const dsp::MelFilterbank fb = dsp::default_mel_filterbank(kCfg, 24000.0);
  dsp::MelSpectrogram c = stationary_mel(6);
  for (std::size_t b = 0; b < c.bands; ++b) c.at(b, 3) = std::log(dsp::kLogAmplitudeFloor);  // one silent frame
  const AdaptivePrior p = build_prior(c, fb, kCfg);
  double lo = 1e300, hi = 0.0;
  for (const auto& v : p.filter.coeffs) {
    lo = std::min(lo, std::abs(v));
    hi = std::max(hi, std::abs(v));
  }
  REQUIRE(hi / lo <= std::pow(10.0, kPriorDynamicRangeDb / 20.0) * (1.0 + 1e-9));
}

TEST_CASE("prior-weighted residual", "[prior]") {
  const AdaptivePrior p = constant_prior(0.5, 10, kCfg, 24000.0);
  const dsp::Waveform a = sample_prior(p, 3000, std::uint64_t{1});
  dsp::Waveform b = a;
  REQUIRE(prior_weighted_residual(a, b, p) < 1e-20);
  for (auto& v : b.samples) v += 0.1;
  REQUIRE_THAT(prior_weighted_residual(a, b, p), WithinRel(3000 * 0.01 / 0.25, 1e-9));
  REQUIRE_THROWS_AS(prior_weighted_residual(a, dsp::Waveform{{0.0}, 24000.0}, p), ShapeError);
}

TEST_CASE("prior construction checks its inputs", "[prior]") {
  const dsp::MelFilterbank fb = dsp::default_mel_filterbank(dsp::StftConfig{1024, 256, 1024}, 24000.0);
  REQUIRE_THROWS_AS(build_prior(stationary_mel(4), fb, kCfg), ConfigError);
  const AdaptivePrior p = constant_prior(1.0, 4, kCfg, 24000.0);
  REQUIRE_THROWS_AS(sample_prior(p, 0, std::uint64_t{1}), ConfigError);
  REQUIRE(sample_prior(p, 1200, std::uint64_t{3}).samples == sample_prior(p, 1200, std::uint64_t{3}).samples);
}
