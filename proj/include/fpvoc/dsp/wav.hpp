// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>

#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::dsp {

enum class WavFormat { kPcm16, kFloat32 };

/// Mono RIFF/WAVE writer. PCM16 clips to [-1, 1].
void write_wav(const std::string& path, const Waveform& x, WavFormat format = WavFormat::kFloat32);

/// Reads a mono 16-bit PCM or 32-bit float WAV. When `expected_rate` is set,
/// a different file rate is an IoError (no resampling).
Waveform read_wav(const std::string& path, std::optional<double> expected_rate = std::nullopt);

}  // namespace fpvoc::dsp
