// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/losses.hpp"

#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/nn/ops.hpp"
#include "fpvoc/nn/spectral_ops.hpp"

namespace fpvoc {

using nn::Tensor;

std::vector<dsp::StftConfig> default_loss_resolutions() {
  return {{360, 80, 512, dsp::WindowType::kHann},
          {900, 150, 1024, dsp::WindowType::kHann},
          {1800, 300, 2048, dsp::WindowType::kHann}};
}

std::vector<dsp::StftConfig> probe_resolutions() {
  return {{240, 48, 512, dsp::WindowType::kHann},
          {480, 120, 1024, dsp::WindowType::kHann},
          {1200, 240, 2048, dsp::WindowType::kHann}};
}

dsp::StftConfig mel_loss_config() { return {900, 150, 1024, dsp::WindowType::kHann}; }

void validate(const LossWeights& w) {
  if (!(w.lambda_fm >= 0.0) || !(w.lambda_stft >= 0.0) || !(w.lambda_if >= 0.0)) {
    throw ConfigError("loss weights must be non-negative");
  }
}

SpectralLossContext::SpectralLossContext(const std::vector<dsp::StftConfig>& resolutions, double sample_rate) {
  if (resolutions.empty()) throw ConfigError("need at least one STFT loss resolution");
  for (const auto& cfg : resolutions) {
    dsp::validate(cfg);
    engines_.push_back(std::make_shared<const dsp::StftEngine>(cfg));
  }
  mel_engine_ = std::make_shared<const dsp::StftEngine>(mel_loss_config());
  fb_ = dsp::default_mel_filterbank(mel_loss_config(), sample_rate);
  mel_weights_ = nn::filterbank_tensor(fb_);
}

namespace {

void check_pair(const Tensor& x, const Tensor& y) {
  if (x.rank() != 2 || x.shape() != y.shape()) {
    throw ShapeError("loss operands must share a [B, L] shape, got " + nn::to_string(x.shape()) + " and " +
                     nn::to_string(y.shape()));
  }
}

Tensor flatten_rows(const Tensor& t) { return nn::reshape(t, {t.dim(0), t.numel() / t.dim(0)}); }

Tensor row(const dsp::Waveform& w) { return Tensor::constant({1, w.size()}, w.samples); }

Tensor hinge(const Tensor& v) { return nn::relu(v); }

}  // namespace

Tensor spectral_convergence_from(const Tensor& X, const Tensor& Y) {
  if (X.shape() != Y.shape()) throw ShapeError("spectral_convergence: spectrogram shapes differ");
  const Tensor den = nn::row_norm(flatten_rows(X));
  for (double v : den.values()) {
    if (!(v > 0.0)) throw ConditioningError("spectral_convergence: reference spectrogram is zero");
  }
  const Tensor num = nn::row_norm(flatten_rows(X - Y));
  return nn::mean(num / den);
}

Tensor log_mag_from(const Tensor& X, const Tensor& Y) {
  if (X.shape() != Y.shape()) throw ShapeError("log_mag_loss: spectrogram shapes differ");
  const Tensor lx = nn::log(nn::clamp_min(X, dsp::kLogAmplitudeFloor));
  const Tensor ly = nn::log(nn::clamp_min(Y, dsp::kLogAmplitudeFloor));
  return nn::mean(nn::abs(lx - ly));
}

Tensor spectral_convergence(const Tensor& x, const Tensor& y, std::shared_ptr<const dsp::StftEngine> engine) {
  check_pair(x, y);
  return spectral_convergence_from(nn::stft_magnitude(x, engine), nn::stft_magnitude(y, engine));
}

Tensor log_mag_loss(const Tensor& x, const Tensor& y, std::shared_ptr<const dsp::StftEngine> engine) {
  check_pair(x, y);
  return log_mag_from(nn::stft_magnitude(x, engine), nn::stft_magnitude(y, engine));
}

Tensor multi_res_stft(const Tensor& x, const Tensor& y,
                      const std::vector<std::shared_ptr<const dsp::StftEngine>>& engines) {
  check_pair(x, y);
  if (engines.empty()) throw ConfigError("multi_res_stft: no resolutions");
  Tensor total;
  for (const auto& engine : engines) {
    const Tensor X = nn::stft_magnitude(x, engine);
    const Tensor Y = nn::stft_magnitude(y, engine);
    const Tensor term = spectral_convergence_from(X, Y) + log_mag_from(X, Y);
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(engines.size()));
}

Tensor mel_mae(const Tensor& x, const Tensor& y, std::shared_ptr<const dsp::StftEngine> engine, const Tensor& fb_t) {
  check_pair(x, y);
  const Tensor mx = nn::mel_amplitude(x, engine, fb_t);
  const Tensor my = nn::mel_amplitude(y, engine, fb_t);
  return nn::mean(nn::abs(mx - my));
}

double spectral_convergence(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::StftConfig& cfg) {
  nn::NoGradGuard guard;
  return spectral_convergence(row(x), row(y), std::make_shared<const dsp::StftEngine>(cfg)).item();
}

double log_mag_loss(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::StftConfig& cfg) {
  nn::NoGradGuard guard;
  return log_mag_loss(row(x), row(y), std::make_shared<const dsp::StftEngine>(cfg)).item();
}

double multi_res_stft(const dsp::Waveform& x, const dsp::Waveform& y, const std::vector<dsp::StftConfig>& cfgs) {
  nn::NoGradGuard guard;
  std::vector<std::shared_ptr<const dsp::StftEngine>> engines;
  for (const auto& cfg : cfgs) engines.push_back(std::make_shared<const dsp::StftEngine>(cfg));
  return multi_res_stft(row(x), row(y), engines).item();
}

double mel_mae(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::MelFilterbank& fb) {
  nn::NoGradGuard guard;
  return mel_mae(row(x), row(y), std::make_shared<const dsp::StftEngine>(fb.config), nn::filterbank_tensor(fb)).item();
}

Tensor feature_matching(const std::vector<Tensor>& fx, const std::vector<Tensor>& fy) {
  if (fx.size() != fy.size() || fx.empty()) throw ShapeError("feature_matching: tap lists differ or are empty");
  Tensor total;
  for (std::size_t h = 0; h < fx.size(); ++h) {
    if (fx[h].shape() != fy[h].shape()) throw ShapeError("feature_matching: tap " + std::to_string(h) + " shapes differ");
    const Tensor term = nn::mean(nn::abs(fx[h] - fy[h]));
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(fx.size()));
}

Tensor gan_generator_hinge(const std::vector<nn::DiscriminatorOutput>& fake) {
  if (fake.empty()) throw ShapeError("gan loss: no discriminator outputs");
  Tensor total;
  for (const auto& d : fake) {
    const Tensor term = nn::mean(hinge(nn::neg(d.logits) + 1.0));
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(fake.size()));
}

Tensor gan_feature_matching(const std::vector<nn::DiscriminatorOutput>& real,
                            const std::vector<nn::DiscriminatorOutput>& fake) {
  if (real.size() != fake.size() || fake.empty()) throw ShapeError("gan loss: discriminator counts differ");
  Tensor total;
  for (std::size_t r = 0; r < fake.size(); ++r) {
    const Tensor term = feature_matching(real[r].features, fake[r].features);
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(fake.size()));
}

Tensor gan_generator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                          const std::vector<nn::DiscriminatorOutput>& fake, double lambda_fm) {
  return gan_generator_hinge(fake) + gan_feature_matching(real, fake) * lambda_fm;
}

Tensor gan_discriminator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                              const std::vector<nn::DiscriminatorOutput>& fake) {
  if (real.size() != fake.size() || fake.empty()) throw ShapeError("gan loss: discriminator counts differ");
  Tensor total;
  for (std::size_t r = 0; r < fake.size(); ++r) {
    const Tensor term = nn::mean(hinge(nn::neg(real[r].logits) + 1.0)) + nn::mean(hinge(fake[r].logits + 1.0));
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(fake.size()));
}

Tensor gan_discriminator_loss(const std::vector<nn::DiscriminatorOutput>& real,
                              const std::vector<std::vector<nn::DiscriminatorOutput>>& fakes) {
  if (fakes.empty()) throw ShapeError("gan loss: no generated signals");
  Tensor total;
  for (const auto& fake : fakes) {
    const Tensor term = gan_discriminator_loss(real, fake);
    total = total.defined() ? total + term : term;
  }
  return total * (1.0 / static_cast<double>(fakes.size()));
}

Tensor ddpm_simple_loss(const Tensor& eps, const Tensor& eps_hat) {
  if (eps.shape() != eps_hat.shape()) throw ShapeError("ddpm_simple_loss: shapes differ");
  const double rows = eps.rank() == 2 ? static_cast<double>(eps.dim(0)) : 1.0;
  return nn::sum(nn::square(eps - eps_hat)) * (1.0 / rows);
}

StepLoss wavefit_step_loss(const Tensor& x0, const Tensor& y, const std::vector<nn::DiscriminatorOutput>& real,
                           const nn::DiscriminatorStack& disc, const SpectralLossContext& ctx, const LossWeights& w) {
  check_pair(x0, y);
  const auto fake = disc.forward(y);
  const Tensor gan = gan_generator_hinge(fake);
  const Tensor fm = gan_feature_matching(real, fake);
  const Tensor stft = multi_res_stft(x0, y, ctx.engines());
  Tensor spectral = stft;
  StepLoss out;
  if (w.include_mel_mae) {
    const Tensor mel = mel_mae(x0, y, ctx.mel_engine(), ctx.mel_weights());
    spectral = spectral + mel;
    out.mel = mel.item();
  }
  out.value = gan + fm * w.lambda_fm + spectral * w.lambda_stft;
  out.gan = gan.item();
  out.fm = fm.item();
  out.stft = stft.item();
  return out;
}

StepLoss wavefit_total_loss(const Tensor& x0, const std::vector<Tensor>& intermediates,
                            const std::vector<nn::DiscriminatorOutput>& real, const nn::DiscriminatorStack& disc,
                            const SpectralLossContext& ctx, const LossWeights& w) {
  if (intermediates.empty()) throw ConfigError("wavefit_total_loss: no intermediate outputs");
  const double inv = 1.0 / static_cast<double>(intermediates.size());
  StepLoss total;
  for (const auto& y : intermediates) {
    const StepLoss s = wavefit_step_loss(x0, y, real, disc, ctx, w);
    total.value = total.value.defined() ? total.value + s.value : s.value;
    total.gan += s.gan * inv;
    total.fm += s.fm * inv;
    total.stft += s.stft * inv;
    total.mel += s.mel * inv;
  }
  if (intermediates.size() > 1) total.value = total.value * inv;
  return total;
}

Tensor infergrad_total_loss(const Tensor& residual_term, const Tensor& infer_term, double lambda_if) {
  if (!(lambda_if >= 0.0)) throw ConfigError("lambda_if must be non-negative");
  if (lambda_if == 0.0) return residual_term;
  return residual_term + infer_term * lambda_if;
}

}  // namespace fpvoc
