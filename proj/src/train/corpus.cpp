// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/train/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "fpvoc/dsp/wav.hpp"
#include "fpvoc/error.hpp"
#include "fpvoc/rng.hpp"

namespace fpvoc::train {

namespace {

constexpr std::uint64_t kCorpusTag = 0xC0C0;
constexpr double kRampSeconds = 0.015;
constexpr double kMaxHarmonicHz = 8000.0;

double uniform(Philox& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double ramp(std::size_t i, std::size_t n, std::size_t r) {
  const std::size_t edge = std::min(i, n - 1 - i);
  if (edge >= r) return 1.0;
  const double u = static_cast<double>(edge) / static_cast<double>(r);
  return 0.5 - 0.5 * std::cos(std::numbers::pi * u);
}

void voiced(std::vector<double>& out, std::size_t begin, std::size_t n, double sr, Philox& rng, double& phase) {
  const double f0a = std::exp(uniform(rng, std::log(80.0), std::log(300.0)));
  const double f0b = std::clamp(f0a * std::exp2(uniform(rng, -0.4, 0.4)), 80.0, 300.0);
  const double formants[3] = {uniform(rng, 300, 900), uniform(rng, 900, 2500), uniform(rng, 2400, 3500)};
  const double widths[3] = {100.0, 150.0, 220.0};
  const double gain = uniform(rng, 0.5, 1.0);
  const std::size_t r = static_cast<std::size_t>(kRampSeconds * sr);
  const double top = std::min(kMaxHarmonicHz, 0.45 * sr);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    const double f0 = f0a + (f0b - f0a) * u;
    phase += 2.0 * std::numbers::pi * f0 / sr;
    if (phase > 2.0 * std::numbers::pi) phase -= 2.0 * std::numbers::pi;
    double v = 0.0;
    const int harmonics = static_cast<int>(top / f0);
    for (int k = 1; k <= harmonics; ++k) {
      const double f = k * f0;
      double a = 0.02;
      for (int j = 0; j < 3; ++j) {
        const double d = (f - formants[j]) / widths[j];
        a += std::exp(-0.5 * d * d) / (1.0 + j);
      }
      v += a / (1.0 + f / 1500.0) * std::sin(k * phase);
    }
    v += 0.01 * rng.gaussian();
    out[begin + i] += gain * ramp(i, n, r) * v;
  }
}

void unvoiced(std::vector<double>& out, std::size_t begin, std::size_t n, double sr, Philox& rng) {
  const double fc = uniform(rng, 2500.0, std::min(6000.0, 0.4 * sr));
  const double radius = 0.95;
  const double c1 = 2.0 * radius * std::cos(2.0 * std::numbers::pi * fc / sr);
  const double c2 = -radius * radius;
  const double gain = uniform(rng, 0.05, 0.15);
  const std::size_t r = static_cast<std::size_t>(kRampSeconds * sr);
  double y1 = 0.0, y2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = rng.gaussian() + c1 * y1 + c2 * y2;
    y2 = y1;
    y1 = y;
    out[begin + i] += gain * ramp(i, n, r) * y;
  }
}

}  // namespace

dsp::Waveform synthetic_clip(std::size_t length, double sample_rate, std::uint64_t seed, std::uint64_t index) {
  if (length == 0) throw ConfigError("synthetic_clip: length must be positive");
  Philox rng(seed, stream_id(kCorpusTag, index));
  std::vector<double> x(length, 0.0);
  double phase = 0.0;
  std::size_t pos = 0;
  while (pos < length) {
    const double pick = rng.uniform();
    double seconds;
    if (pick < 0.6) {
      seconds = uniform(rng, 0.12, 0.30);
    } else if (pick < 0.8) {
      seconds = uniform(rng, 0.06, 0.15);
    } else {
      seconds = uniform(rng, 0.04, 0.12);
    }
    const std::size_t n = std::min(length - pos, std::max<std::size_t>(2, static_cast<std::size_t>(seconds * sample_rate)));
    if (pick < 0.6) {
      voiced(x, pos, n, sample_rate, rng, phase);
    } else if (pick < 0.8) {
      unvoiced(x, pos, n, sample_rate, rng);
    }
    pos += n;
  }
  // Background floor so no region is digitally silent.
  for (double& v : x) v += 1e-4 * rng.gaussian();
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  for (double& v : x) v *= kCorpusPeak / peak;
  return dsp::Waveform{std::move(x), sample_rate};
}

void attach_mels(Corpus& corpus, const dsp::MelFilterbank& fb) {
  for (auto& clip : corpus.clips) clip.mel = dsp::log_mel(clip.audio, fb, fb.config);
}

Corpus make_synthetic_corpus(std::size_t n_clips, std::uint64_t seed, double sample_rate, double seconds,
                             const dsp::MelFilterbank& fb) {
  if (n_clips == 0) throw ConfigError("make_synthetic_corpus: need at least one clip");
  const auto hop = static_cast<std::size_t>(fb.config.hop);
  const std::size_t frames = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(seconds * sample_rate / hop)));
  Corpus corpus;
  corpus.sample_rate = sample_rate;
  for (std::size_t i = 0; i < n_clips; ++i) {
    CorpusClip clip;
    clip.name = "clip_" + std::to_string(i);
    clip.audio = synthetic_clip(frames * hop, sample_rate, seed, i);
    corpus.clips.push_back(std::move(clip));
  }
  attach_mels(corpus, fb);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < corpus.clips.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%03zu.wav", i);
    dsp::write_wav((std::filesystem::path(dir) / name).string(), corpus.clips[i].audio, dsp::WavFormat::kFloat32);
  }
}

Corpus load_corpus(const std::string& dir, const dsp::MelFilterbank& fb) {
  if (!std::filesystem::is_directory(dir)) throw IoError("corpus directory not found: " + dir);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .wav files in " + dir);
  const auto hop = static_cast<std::size_t>(fb.config.hop);
  Corpus corpus;
  corpus.sample_rate = fb.sample_rate;
  for (const auto& f : files) {
    CorpusClip clip;
    clip.name = f.stem().string();
    clip.audio = dsp::read_wav(f.string(), fb.sample_rate);
    clip.audio.samples.resize(clip.audio.size() / hop * hop);
    if (clip.audio.empty()) throw IoError(f.string() + " is shorter than one hop");
    corpus.clips.push_back(std::move(clip));
  }
  attach_mels(corpus, fb);
  return corpus;
}

}  // namespace fpvoc::train
