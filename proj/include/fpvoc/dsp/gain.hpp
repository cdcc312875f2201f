// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>

#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::dsp {

inline constexpr double kGainEpsilon = 1e-8;

// kLiteral scales z by P_c / (P_z + s); kSqrt by sqrt(P_c / (P_z + s)),
// which matches mean-square power exactly and is idempotent.
enum class GainMode { kLiteral, kSqrt };

GainMode parse_gain_mode(const std::string& name);  // "paper" | "sqrt"
std::string to_string(GainMode mode);

/// Mean squared amplitude.
double mean_square(std::span<const double> z);

/// Gain factor applied to a signal of power p_z for target power p_c.
double gain_factor(double p_c, double p_z, GainMode mode);

/// Target power P_c implied by a log-mel spectrogram.
double target_power(const MelSpectrogram& c, const MelFilterbank& fb);

/// Rescales z so that its power follows the target implied by c.
Waveform gain_adjust(const Waveform& z, const MelSpectrogram& c, const MelFilterbank& fb,
                     GainMode mode = GainMode::kLiteral);

/// Same, with P_c already computed.
Waveform gain_adjust(const Waveform& z, double p_c, GainMode mode = GainMode::kLiteral);

}  // namespace fpvoc::dsp
