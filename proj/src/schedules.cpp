// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/schedules.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "fpvoc/error.hpp"

namespace fpvoc {

double NoiseSchedule::noise_level(std::size_t t) const { return std::sqrt(alpha_bar(t)); }

NoiseSchedule derive_schedule(std::span<const double> betas) {
  if (betas.empty()) throw ConfigError("noise schedule needs at least one beta");
  NoiseSchedule s;
  s.betas.assign(betas.begin(), betas.end());
  double prev_bar = 1.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double b = betas[i];
    if (!(b > 0.0 && b < 1.0)) throw ConfigError("every beta must lie in (0, 1)");
    const double a = 1.0 - b;
    const double bar = prev_bar * a;
    s.alphas.push_back(a);
    s.alpha_bars.push_back(bar);
    s.gammas.push_back(i == 0 ? 0.0 : (1.0 - prev_bar) / (1.0 - bar) * b);
    prev_bar = bar;
  }
  return s;
}

NoiseSchedule preset(const std::string& name) {
  if (name == "infer2") return derive_schedule(std::vector<double>{3e-4, 9e-1});
  if (name == "infer3") return derive_schedule(std::vector<double>{3e-4, 6e-2, 9e-1});
  if (name == "infer5") return derive_schedule(std::vector<double>{1.0e-4, 2.1e-3, 2.8e-2, 3.5e-1, 7.0e-1});
  if (name == "train50") {
    std::vector<double> betas(50);
    for (std::size_t i = 0; i < betas.size(); ++i) betas[i] = 1e-4 + (0.05 - 1e-4) * static_cast<double>(i) / 49.0;
    return derive_schedule(betas);
  }
  throw ConfigError("unknown schedule preset '" + name + "'");
}

namespace {

void check_step(std::size_t t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps()) throw ConfigError("diffusion step index out of range");
}

}  // namespace

dsp::Waveform forward_diffuse(const dsp::Waveform& x0, const dsp::Waveform& eps, std::size_t t,
                              const NoiseSchedule& sched) {
  if (x0.size() != eps.size()) throw ShapeError("forward_diffuse: x0 and eps lengths differ");
  check_step(t, sched);
  const double a = std::sqrt(sched.alpha_bar(t));
  const double b = std::sqrt(1.0 - sched.alpha_bar(t));
  dsp::Waveform out = x0;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] = a * x0.samples[i] + b * eps.samples[i];
  return out;
}

dsp::Waveform reverse_step(const dsp::Waveform& y_t, const dsp::Waveform& eps_hat, const dsp::Waveform& noise,
                           std::size_t t, const NoiseSchedule& sched) {
  if (y_t.size() != eps_hat.size() || y_t.size() != noise.size()) {
    throw ShapeError("reverse_step: operand lengths differ");
  }
  check_step(t, sched);
  const double inv_sqrt_alpha = 1.0 / std::sqrt(sched.alpha(t));
  const double eps_scale = sched.beta(t) / std::sqrt(1.0 - sched.alpha_bar(t));
  const double gamma = sched.gamma(t);
  dsp::Waveform out = y_t;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.samples[i] = inv_sqrt_alpha * (y_t.samples[i] - eps_scale * eps_hat.samples[i]);
    if (gamma != 0.0) out.samples[i] += gamma * noise.samples[i];
  }
  return out;
}

std::string format_schedule(const NoiseSchedule& sched) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (double b : sched.betas) out << b << '\n';
  return out.str();
}

NoiseSchedule parse_schedule(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> betas;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream row(line);
    double v;
    while (row >> v) betas.push_back(v);
    if (!row.eof()) throw ConfigError("malformed schedule line: '" + line + "'");
  }
  return derive_schedule(betas);
}

}  // namespace fpvoc
