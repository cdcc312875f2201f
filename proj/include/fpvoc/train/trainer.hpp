// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fpvoc/losses.hpp"
#include "fpvoc/nn/adam.hpp"
#include "fpvoc/nn/checkpoint.hpp"
#include "fpvoc/nn/denoiser.hpp"
#include "fpvoc/nn/discriminator.hpp"
#include "fpvoc/prior.hpp"
#include "fpvoc/schedules.hpp"
#include "fpvoc/train/config.hpp"
#include "fpvoc/train/corpus.hpp"

namespace fpvoc::train {

struct Batch {
  nn::Tensor x0;  // [B, L]
  nn::Tensor c;   // [B, F, K]
  std::vector<double> target_power;
  std::vector<AdaptivePrior> priors;
  std::vector<std::size_t> clips;
  std::vector<std::size_t> offsets;  // in frames
};

/// Random frame-aligned excerpts for training step `step`.
Batch sample_batch(const Corpus& corpus, const TrainConfig& cfg, const dsp::MelFilterbank& fb, std::size_t step);

/// Excerpt of a clip's log-mel, frames [offset, offset + frames).
dsp::MelSpectrogram mel_excerpt(const dsp::MelSpectrogram& mel, std::size_t offset, std::size_t frames);

/// Uniform diffusion index in 1..T; the first draw of a row's stream.
std::size_t draw_step_index(Philox& rng, std::size_t T);
/// Index that training step `step` (1-based) draws for batch row `row`.
std::size_t sampled_step_index(std::uint64_t seed, std::size_t step, std::size_t row, std::size_t T);

using StepStats = std::vector<std::pair<std::string, double>>;
double stat(const StepStats& stats, const std::string& name);

/// Owns the networks and optimizers of one training run. Every random draw
/// is keyed by (seed, step), so a resumed session replays exactly.
class TrainingSession {
 public:
  TrainingSession(const TrainConfig& cfg, const Corpus& corpus);

  /// Runs training step completed_steps() + 1.
  StepStats step();
  std::size_t completed_steps() const { return step_; }

  nn::Checkpoint checkpoint() const;
  void save(const std::string& path) const;
  void resume(const std::string& path);
  /// Loads only the generator weights (infergrad initialization).
  void load_generator(const std::string& path);

  nn::Denoiser& generator() { return *gen_; }
  nn::DiscriminatorStack* discriminator() { return disc_.get(); }
  const TrainConfig& config() const { return cfg_; }

 private:
  StepStats wavefit_step(const Batch& batch);
  StepStats diffusion_step(const Batch& batch);
  void discriminator_step(const nn::Tensor& x0, const std::vector<nn::Tensor>& fakes, StepStats& stats);
  [[noreturn]] void abort_non_finite(const std::string& what, const Batch& batch, const nn::Tensor& extra) const;

  TrainConfig cfg_;
  const Corpus& corpus_;
  dsp::MelFilterbank fb_;
  NoiseSchedule train_sched_;
  NoiseSchedule infer_sched_;
  std::unique_ptr<nn::Denoiser> gen_;
  std::unique_ptr<nn::DiscriminatorStack> disc_;
  std::unique_ptr<nn::Adam> gen_opt_;
  std::unique_ptr<nn::Adam> disc_opt_;
  std::unique_ptr<SpectralLossContext> loss_ctx_;
  std::size_t step_ = 0;
};

struct TrainSummary {
  std::size_t steps = 0;
  std::string checkpoint;
  StepStats last;
};

/// Runs cfg.total_steps steps, writing out_dir/loss.csv, periodic
/// out_dir/step_XXXXXX.ckpt files and out_dir/model.ckpt. A non-empty
/// `resume_from` continues a previous run.
TrainSummary train_wavefit(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from = "");
TrainSummary train_ddpm(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from = "");
/// Starts from the generator in `pretrained` (may be empty for a fresh net).
TrainSummary train_infergrad(const TrainConfig& cfg, const Corpus& corpus, const std::string& pretrained,
                             const std::string& resume_from = "");
TrainSummary run_training(const TrainConfig& cfg, const Corpus& corpus, const std::string& resume_from = "");

/// Corpus named by cfg.corpus: synthetic, or a WAV directory.
Corpus corpus_for(const TrainConfig& cfg);

/// Generator and the configuration it was trained with.
struct TrainedModel {
  TrainConfig config;
  std::unique_ptr<nn::Denoiser> net;
};
TrainedModel load_model(const std::string& checkpoint_path);

}  // namespace fpvoc::train
