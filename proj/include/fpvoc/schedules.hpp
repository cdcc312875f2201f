// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc {

/// Diffusion noise schedule. Step indices are 1-based: step t uses
/// betas[t-1]. alpha_bar_0 is taken as 1, so gamma_1 = 0.
struct NoiseSchedule {
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;
  std::vector<double> gammas;

  std::size_t steps() const { return betas.size(); }
  double beta(std::size_t t) const { return betas.at(t - 1); }
  double alpha(std::size_t t) const { return alphas.at(t - 1); }
  double alpha_bar(std::size_t t) const { return alpha_bars.at(t - 1); }
  double gamma(std::size_t t) const { return gammas.at(t - 1); }
  /// sqrt(alpha_bar_t), the signal level the denoiser is conditioned on.
  double noise_level(std::size_t t) const;
};

NoiseSchedule derive_schedule(std::span<const double> betas);

/// Named schedules: infer2, infer3, infer5 (few-step inference) and
/// train50 (50 betas linearly spaced over [1e-4, 0.05]).
NoiseSchedule preset(const std::string& name);

/// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps.
dsp::Waveform forward_diffuse(const dsp::Waveform& x0, const dsp::Waveform& eps, std::size_t t,
                              const NoiseSchedule& sched);

/// y_{t-1} = (y_t - beta_t / sqrt(1 - alpha_bar_t) eps_hat) / sqrt(alpha_t) + gamma_t noise.
dsp::Waveform reverse_step(const dsp::Waveform& y_t, const dsp::Waveform& eps_hat, const dsp::Waveform& noise,
                           std::size_t t, const NoiseSchedule& sched);

/// Plain-text form: one decimal beta per line, '#' comments allowed.
std::string format_schedule(const NoiseSchedule& sched);
NoiseSchedule parse_schedule(const std::string& text);

}  // namespace fpvoc
