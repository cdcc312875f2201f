// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

#include "fpvoc/dsp/envelope.hpp"
#include "fpvoc/dsp/stft.hpp"
#include "fpvoc/dsp/waveform.hpp"

namespace fpvoc::dsp {

/// Coefficients with |m| at or below this cannot be inverted.
inline constexpr double kFilterInverseFloor = 1e-8;

/// The real-linear map x -> istft(m . stft(x)) over raw buffers, together
/// with its transpose. Constructed with `inverse = true` it uses 1/m.
class TfFilterOperator {
 public:
  TfFilterOperator(const TfFilter& filter, bool inverse);

  std::size_t signal_length() const;
  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_adjoint(std::span<const double> grad) const;

 private:
  StftEngine engine_;
  std::vector<Complex> coeffs_;
  std::size_t frames_;
};

/// L x = istft(M . stft(x)).
Waveform apply_tf_filter(const Waveform& x, const TfFilter& m);

/// istft(M^-1 . stft(x)); throws ConditioningError if any |m| <= 1e-8.
Waveform apply_tf_filter_inverse(const Waveform& x, const TfFilter& m);

}  // namespace fpvoc::dsp
