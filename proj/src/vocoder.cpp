// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/vocoder.hpp"

#include <cmath>

#include "fpvoc/error.hpp"
#include "fpvoc/losses.hpp"
#include "fpvoc/nn/ops.hpp"
#include "fpvoc/nn/spectral_ops.hpp"
#include "fpvoc/rng.hpp"

namespace fpvoc {

using nn::Tensor;

double step_condition(const nn::Denoiser& net, std::size_t t, const NoiseSchedule* sched) {
  if (net.config().conditioning == nn::StepConditioning::kStepIndex) return static_cast<double>(t);
  if (sched == nullptr) throw ConfigError("noise-level conditioning needs a schedule");
  return sched->noise_level(t);
}

Tensor mel_tensor(const dsp::MelSpectrogram& c) { return Tensor::constant({1, c.bands, c.frames}, c.values); }

std::vector<Tensor> wavefit_unroll(const nn::Denoiser& net, const Tensor& y_T, const Tensor& c,
                                   std::span<const double> target_power, std::size_t T, dsp::GainMode mode) {
  if (T == 0) throw ConfigError("wavefit: T must be at least 1");
  const std::size_t B = y_T.dim(0);
  std::vector<Tensor> out;
  Tensor y = y_T;
  for (std::size_t t = T; t >= 1; --t) {
    const std::vector<double> step(B, step_condition(net, t, nullptr));
    const Tensor z = y - net.forward(y, c, step);
    y = nn::gain_adjust(z, target_power, mode);
    out.push_back(y);
  }
  return out;
}

std::vector<Tensor> ddpm_unroll(const nn::Denoiser& net, const Tensor& y_T, const Tensor& c,
                                const NoiseSchedule& sched, const std::vector<Tensor>& noise) {
  const std::size_t T = sched.steps();
  if (T == 0) throw ConfigError("ddpm: empty schedule");
  if (noise.size() != T) throw ShapeError("ddpm_unroll: need one noise tensor per step");
  const std::size_t B = y_T.dim(0);
  std::vector<Tensor> out;
  Tensor y = y_T;
  for (std::size_t t = T; t >= 1; --t) {
    const std::vector<double> step(B, step_condition(net, t, &sched));
    const Tensor eps_hat = net.forward(y, c, step);
    const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
    const double eps_scale = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
    y = (y - eps_hat * eps_scale) * inv_sqrt_alpha;
    const double gamma = sched.gamma(t);
    if (gamma != 0.0) y = y + noise[T - t] * gamma;
    out.push_back(y);
  }
  return out;
}

namespace {

void check_alignment(const dsp::MelSpectrogram& c, const AdaptivePrior& prior, const nn::Denoiser& net) {
  if (c.frames == 0) throw ShapeError("empty conditioning");
  if (prior.filter.frames != c.frames) throw ShapeError("prior and conditioning frame counts differ");
  if (static_cast<std::size_t>(prior.config.hop) != net.config().hop) throw ShapeError("prior hop differs from the net's");
}

dsp::Waveform to_waveform(const Tensor& t, double sample_rate) {
  dsp::Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(t.values().begin(), t.values().end());
  return w;
}

Tensor to_row(const dsp::Waveform& w) { return Tensor::constant({1, w.size()}, w.samples); }

}  // namespace

InferenceTrace wavefit_infer(const dsp::MelSpectrogram& c, const nn::Denoiser& net, std::size_t T,
                             const AdaptivePrior& prior, const dsp::MelFilterbank& fb, std::uint64_t seed,
                             dsp::GainMode mode) {
  if (T == 0) throw ConfigError("wavefit: T must be at least 1");
  check_alignment(c, prior, net);
  nn::NoGradGuard guard;
  const std::size_t length = c.frames * net.config().hop;
  Philox rng(seed, stream_id(kInitNoiseTag));
  InferenceTrace trace;
  trace.states.push_back(sample_prior(prior, length, rng));
  const double p_c = dsp::target_power(c, fb);
  const auto ys = wavefit_unroll(net, to_row(trace.states[0]), mel_tensor(c), std::span<const double>(&p_c, 1), T, mode);
  for (const auto& y : ys) trace.states.push_back(to_waveform(y, prior.sample_rate));
  return trace;
}

InferenceTrace ddpm_infer(const dsp::MelSpectrogram& c, const nn::Denoiser& net, const NoiseSchedule& sched,
                          const AdaptivePrior& prior, std::uint64_t seed, bool shaped_reverse_noise) {
  const std::size_t T = sched.steps();
  if (T == 0) throw ConfigError("ddpm: empty schedule");
  check_alignment(c, prior, net);
  nn::NoGradGuard guard;
  const std::size_t length = c.frames * net.config().hop;
  Philox init(seed, stream_id(kInitNoiseTag));
  Philox steps(seed, stream_id(kStepNoiseTag));
  InferenceTrace trace;
  trace.states.push_back(sample_prior(prior, length, init));
  const Tensor ct = mel_tensor(c);
  dsp::Waveform y = trace.states[0];
  for (std::size_t t = T; t >= 1; --t) {
    const std::vector<double> step{step_condition(net, t, &sched)};
    const dsp::Waveform eps_hat = to_waveform(net.forward(to_row(y), ct, step), prior.sample_rate);
    dsp::Waveform noise;
    noise.sample_rate = prior.sample_rate;
    if (sched.gamma(t) != 0.0) {
      noise = shaped_reverse_noise ? sample_prior(prior, length, steps) : dsp::Waveform{steps.gaussian_vector(length), prior.sample_rate};
    } else {
      noise.samples.assign(length, 0.0);
    }
    y = reverse_step(y, eps_hat, noise, t, sched);
    trace.states.push_back(y);
  }
  return trace;
}

std::vector<ProbeRow> contraction_probe(const InferenceTrace& trace, const dsp::Waveform& x0,
                                        const std::vector<dsp::StftConfig>& cfgs) {
  if (cfgs.empty()) throw ConfigError("contraction_probe: no resolutions");
  nn::NoGradGuard guard;
  std::vector<std::shared_ptr<const dsp::StftEngine>> engines;
  for (const auto& cfg : cfgs) engines.push_back(std::make_shared<const dsp::StftEngine>(cfg));
  const Tensor x = to_row(x0);
  std::vector<Tensor> ref;
  for (const auto& e : engines) ref.push_back(nn::stft_magnitude(x, e));
  std::vector<ProbeRow> rows;
  const std::size_t T = trace.steps();
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    if (trace.states[i].size() != x0.size()) throw ShapeError("contraction_probe: trace and reference lengths differ");
    const Tensor y = to_row(trace.states[i]);
    ProbeRow row;
    row.t = T - i;
    for (std::size_t r = 0; r < engines.size(); ++r) {
      const Tensor Y = nn::stft_magnitude(y, engines[r]);
      row.sc += spectral_convergence_from(ref[r], Y).item();
      row.mag += log_mag_from(ref[r], Y).item();
    }
    row.sc /= static_cast<double>(engines.size());
    row.mag /= static_cast<double>(engines.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace fpvoc
