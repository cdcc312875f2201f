// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <vector>

#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/nn/discriminator.hpp"
#include "fpvoc/nn/tensor.hpp"

namespace fpvoc {

/// Training-loss resolutions (window, hop, FFT).
std::vector<dsp::StftConfig> default_loss_resolutions();
/// Resolutions used to probe intermediate outputs.
std::vector<dsp::StftConfig> probe_resolutions();
/// STFT configuration of the mel MAE term.
dsp::StftConfig mel_loss_config();

struct LossWeights {
  double lambda_fm = 100.0;
  double lambda_stft = 1.0;
  double lambda_if = 0.1;
  bool include_mel_mae = true;
};

void validate(const LossWeights& w);

/// Precomputed FFT plans and filterbank shared by all spectral losses.
class SpectralLossContext {
 public:
  SpectralLossContext(const std::vector<dsp::StftConfig>& resolutions, double sample_rate);

  const std::vector<std::shared_ptr<const dsp::StftEngine>>& engines() const { return engines_; }
  const std::shared_ptr<const dsp::StftEngine>& mel_engine() const { return mel_engine_; }
  const nn::Tensor& mel_weights() const { return mel_weights_; }
  const dsp::MelFilterbank& mel_filterbank() const { return fb_; }

 private:
  std::vector<std::shared_ptr<const dsp::StftEngine>> engines_;
  std::shared_ptr<const dsp::StftEngine> mel_engine_;
  dsp::MelFilterbank fb_;
  nn::Tensor mel_weights_;
};

// Batched losses take x (reference) and y as [B, L] and average over rows.

nn::Tensor spectral_convergence(const nn::Tensor& x, const nn::Tensor& y,
                                std::shared_ptr<const dsp::StftEngine> engine);
nn::Tensor log_mag_loss(const nn::Tensor& x, const nn::Tensor& y, std::shared_ptr<const dsp::StftEngine> engine);
/// Spectral-convergence and log-magnitude terms from precomputed magnitudes.
nn::Tensor spectral_convergence_from(const nn::Tensor& X, const nn::Tensor& Y);
nn::Tensor log_mag_from(const nn::Tensor& X, const nn::Tensor& Y);
nn::Tensor multi_res_stft(const nn::Tensor& x, const nn::Tensor& y,
                          const std::vector<std::shared_ptr<const dsp::StftEngine>>& engines);
nn::Tensor mel_mae(const nn::Tensor& x, const nn::Tensor& y, std::shared_ptr<const dsp::StftEngine> engine,
                   const nn::Tensor& fb_t);

// Conveniences on single waveforms.
double spectral_convergence(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::StftConfig& cfg);
double log_mag_loss(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::StftConfig& cfg);
double multi_res_stft(const dsp::Waveform& x, const dsp::Waveform& y, const std::vector<dsp::StftConfig>& cfgs);
double mel_mae(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::MelFilterbank& fb);

nn::Tensor feature_matching(const std::vector<nn::Tensor>& fx, const std::vector<nn::Tensor>& fy);
/// Hinge generator term plus lambda_fm feature matching, averaged over scales.
nn::Tensor gan_generator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                              const std::vector<nn::DiscriminatorOutput>& fake, double lambda_fm);
nn::Tensor gan_generator_hinge(const std::vector<nn::DiscriminatorOutput>& fake);
nn::Tensor gan_feature_matching(const std::vector<nn::DiscriminatorOutput>& real,
                                const std::vector<nn::DiscriminatorOutput>& fake);
nn::Tensor gan_discriminator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                                  const std::vector<nn::DiscriminatorOutput>& fake);
/// Average over several generated signals (the intermediate outputs).
nn::Tensor gan_discriminator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                                  const std::vector<std::vector<nn::DiscriminatorOutput>>& fakes);

/// Squared L2 norm of eps - eps_hat, averaged over rows.
nn::Tensor ddpm_simple_loss(const nn::Tensor& eps, const nn::Tensor& eps_hat);

struct StepLoss {
  nn::Tensor value;
  double gan = 0.0;   // hinge part
  double fm = 0.0;    // unweighted feature matching
  double stft = 0.0;  // multi-resolution STFT
  double mel = 0.0;   // mel MAE (0 when disabled)
};

/// L^WF(x0, y). real holds discriminator outputs on x0 (no graph needed).
StepLoss wavefit_step_loss(const nn::Tensor& x0, const nn::Tensor& y, const std::vector<nn::DiscriminatorOutput>& real,
                           const nn::DiscriminatorStack& disc, const SpectralLossContext& ctx, const LossWeights& w);
/// Mean of the step losses over all intermediates; components are averaged too.
StepLoss wavefit_total_loss(const nn::Tensor& x0, const std::vector<nn::Tensor>& intermediates,
                            const std::vector<nn::DiscriminatorOutput>& real, const nn::DiscriminatorStack& disc,
                            const SpectralLossContext& ctx, const LossWeights& w);

nn::Tensor infergrad_total_loss(const nn::Tensor& residual_term, const nn::Tensor& infer_term, double lambda_if);

}  // namespace fpvoc
