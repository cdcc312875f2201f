// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/train/evaluate.hpp"

#include <cstdio>

#include "fpvoc/error.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/rng.hpp"

namespace fpvoc::train {

InferenceTrace synthesize(const TrainedModel& model, const dsp::MelSpectrogram& c, const SynthOptions& opt) {
  const TrainConfig& cfg = model.config;
  const dsp::MelFilterbank fb = mel_filterbank(cfg);
  if (c.bands != fb.bands) throw ShapeError("conditioning has " + std::to_string(c.bands) + " bands, model expects " +
                                            std::to_string(fb.bands));
  const AdaptivePrior prior = build_prior(c, fb, cfg.stft);
  if (cfg.mode == TrainMode::kWaveFit) {
    const std::size_t T = opt.iterations == 0 ? cfg.iterations : opt.iterations;
    return wavefit_infer(c, *model.net, T, prior, fb, opt.seed, cfg.gain_mode);
  }
  const NoiseSchedule sched = preset(opt.schedule.empty() ? cfg.infer_schedule : opt.schedule);
  return ddpm_infer(c, *model.net, sched, prior, opt.seed, cfg.shaped_reverse_noise);
}

std::vector<ProbeRow> mean_probe(const TrainedModel& model, const Corpus& eval, const SynthOptions& opt) {
  if (eval.clips.empty()) throw ConfigError("empty evaluation set");
  std::vector<ProbeRow> mean;
  for (std::size_t i = 0; i < eval.clips.size(); ++i) {
    SynthOptions per = opt;
    per.seed = stream_id(opt.seed, i);
    const auto& clip = eval.clips[i];
    const InferenceTrace trace = synthesize(model, clip.mel, per);
    const auto rows = contraction_probe(trace, clip.audio, probe_resolutions());
    if (mean.empty()) {
      mean = rows;
      for (auto& r : mean) r.sc = r.mag = 0.0;
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      mean[j].sc += rows[j].sc / static_cast<double>(eval.clips.size());
      mean[j].mag += rows[j].mag / static_cast<double>(eval.clips.size());
    }
  }
  return mean;
}

Corpus eval_corpus(const TrainConfig& cfg, std::size_t clips) {
  return make_synthetic_corpus(clips, cfg.seed + kEvalSeedOffset, cfg.sample_rate, cfg.corpus_seconds,
                               mel_filterbank(cfg));
}

std::string probe_csv(const std::vector<ProbeRow>& rows) {
  std::string out = "t,sc,mag\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g\n", r.t, r.sc, r.mag);
    out += buf;
  }
  return out;
}

}  // namespace fpvoc::train
