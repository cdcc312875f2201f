// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace fpvoc::dsp {

/// Mono sampled audio. Amplitudes are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  double sample_rate = 24000.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

/// Throws ConfigError unless the waveform is non-empty with finite samples.
void validate(const Waveform& x);

}  // namespace fpvoc::dsp
