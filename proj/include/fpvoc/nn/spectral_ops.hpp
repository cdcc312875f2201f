// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "fpvoc/dsp/gain.hpp"
#include "fpvoc/dsp/mel.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/dsp/tf_filter.hpp"
#include "fpvoc/nn/tensor.hpp"

namespace fpvoc::nn {

/// |STFT| of each row of x [B, L] -> [B, frames, bins]. The gradient at a
/// zero-magnitude bin is taken as zero.
Tensor stft_magnitude(const Tensor& x, std::shared_ptr<const dsp::StftEngine> engine);
Tensor stft_magnitude(const Tensor& x, const dsp::StftConfig& cfg);

/// Applies a per-row linear T-F filter to x [B, L]; backward uses the exact
/// transpose of each operator.
Tensor tf_filter(const Tensor& x, std::vector<std::shared_ptr<const dsp::TfFilterOperator>> ops);

/// Mel-weighted magnitudes of x [B, L] -> [B, frames, bands].
Tensor mel_amplitude(const Tensor& x, std::shared_ptr<const dsp::StftEngine> engine, const Tensor& fb_t);
/// Transposed filterbank weights [bins, bands] as a constant tensor.
Tensor filterbank_tensor(const dsp::MelFilterbank& fb);

/// Differentiable gain operator on the rows of z [B, L]; target_power[b] is
/// P_c of row b.
Tensor gain_adjust(const Tensor& z, std::span<const double> target_power, dsp::GainMode mode);

}  // namespace fpvoc::nn
