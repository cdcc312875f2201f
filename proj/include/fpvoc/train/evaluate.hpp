// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpvoc/train/corpus.hpp"
#include "fpvoc/train/trainer.hpp"
#include "fpvoc/vocoder.hpp"

namespace fpvoc::train {

/// Default seed offset of the held-out synthetic evaluation set.
inline constexpr std::uint64_t kEvalSeedOffset = 1000003;

struct SynthOptions {
  std::uint64_t seed = 1;
  std::string schedule;  // inference preset for diffusion models; empty = model's infer_schedule
  std::size_t iterations = 0;  // WaveFit T; 0 = trained value
};

/// Runs the model's sampler (WaveFit loop or reverse process) on c.
InferenceTrace synthesize(const TrainedModel& model, const dsp::MelSpectrogram& c, const SynthOptions& opt);

/// Mean contraction-probe rows over the clips of `eval` (y_T first).
std::vector<ProbeRow> mean_probe(const TrainedModel& model, const Corpus& eval, const SynthOptions& opt);

/// Held-out synthetic clips for evaluating models trained with cfg.
Corpus eval_corpus(const TrainConfig& cfg, std::size_t clips);

/// "t,sc,mag" CSV text.
std::string probe_csv(const std::vector<ProbeRow>& rows);

}  // namespace fpvoc::train
