// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::train {

struct CorpusClip {
  std::string name;
  dsp::Waveform audio;
  dsp::MelSpectrogram mel;  // log-mel of the whole clip
};

struct Corpus {
  std::vector<CorpusClip> clips;
  double sample_rate = 24000.0;
};

inline constexpr double kCorpusPeak = 0.9;

/// One speech-like clip: voiced syllables (harmonics under formant bumps with
/// a gliding f0 in 80-300 Hz), resonant noise bursts and short silences,
/// normalized to kCorpusPeak.
dsp::Waveform synthetic_clip(std::size_t length, double sample_rate, std::uint64_t seed, std::uint64_t index);

/// Deterministic synthetic corpus. Clip lengths are rounded to whole hops.
Corpus make_synthetic_corpus(std::size_t n_clips, std::uint64_t seed, double sample_rate, double seconds,
                             const dsp::MelFilterbank& fb);

/// Computes (or recomputes) the log-mel of every clip.
void attach_mels(Corpus& corpus, const dsp::MelFilterbank& fb);

/// Writes clip_XXX.wav files (float32) into dir.
void save_corpus(const Corpus& corpus, const std::string& dir);
/// Reads every .wav in dir (sorted by name), trimmed to whole hops.
Corpus load_corpus(const std::string& dir, const dsp::MelFilterbank& fb);

}  // namespace fpvoc::train
