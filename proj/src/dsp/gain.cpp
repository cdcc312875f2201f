// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/gain.hpp"

#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

GainMode parse_gain_mode(const std::string& name) {
  if (name == "paper" || name == "literal") return GainMode::kLiteral;
  if (name == "sqrt") return GainMode::kSqrt;
  throw ConfigError("unknown gain mode '" + name + "' (expected paper or sqrt)");
}

std::string to_string(GainMode mode) { return mode == GainMode::kLiteral ? "paper" : "sqrt"; }

double mean_square(std::span<const double> z) {
  if (z.empty()) throw ShapeError("mean_square of an empty signal");
  double acc = 0.0;
  for (double v : z) acc += v * v;
  return acc / static_cast<double>(z.size());
}

double gain_factor(double p_c, double p_z, GainMode mode) {
  const double ratio = p_c / (p_z + kGainEpsilon);
  return mode == GainMode::kLiteral ? ratio : std::sqrt(ratio);
}

double target_power(const MelSpectrogram& c, const MelFilterbank& fb) { return power_from_mel(c, fb).total; }

Waveform gain_adjust(const Waveform& z, double p_c, GainMode mode) {
  const double g = gain_factor(p_c, mean_square(z.samples), mode);
  Waveform y = z;
  for (double& v : y.samples) v *= g;
  return y;
}

Waveform gain_adjust(const Waveform& z, const MelSpectrogram& c, const MelFilterbank& fb, GainMode mode) {
  return gain_adjust(z, target_power(c, fb), mode);
}

}  // namespace fpvoc::dsp
