// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/tf_filter.hpp"

#include <cmath>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

TfFilterOperator::TfFilterOperator(const TfFilter& filter, bool inverse)
    : engine_(filter.config), coeffs_(filter.coeffs), frames_(filter.frames) {
  if (filter.num_bins != engine_.bins() || filter.coeffs.size() != filter.frames * filter.num_bins) {
    throw ShapeError("T-F filter shape does not match its STFT configuration");
  }
  if (inverse) {
    for (Complex& m : coeffs_) {
      if (!(std::abs(m) > kFilterInverseFloor)) {
        throw ConditioningError("T-F filter coefficient magnitude at or below the inversion floor");
      }
      m = 1.0 / m;
    }
  }
}

std::size_t TfFilterOperator::signal_length() const {
  return frames_ * static_cast<std::size_t>(engine_.config().hop);
}

std::vector<double> TfFilterOperator::apply(std::span<const double> x) const {
  if (engine_.frames(x.size()) != frames_) throw ShapeError("signal length does not match T-F filter frame count");
  std::vector<Complex> spec = engine_.analyze(x);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= coeffs_[i];
  return engine_.synthesize(spec, x.size());
}

std::vector<double> TfFilterOperator::apply_adjoint(std::span<const double> grad) const {
  if (engine_.frames(grad.size()) != frames_) throw ShapeError("gradient length does not match T-F filter frame count");
  std::vector<Complex> g = engine_.synthesize_adjoint(grad, grad.size());
  // Transpose of complex multiplication by m on (re, im) pairs is multiplication by conj(m).
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= std::conj(coeffs_[i]);
  return engine_.analyze_adjoint(g, grad.size());
}

namespace {

Waveform run(const Waveform& x, const TfFilter& m, bool inverse) {
  validate(x);
  const TfFilterOperator op(m, inverse);
  Waveform out;
  out.sample_rate = x.sample_rate;
  out.samples = op.apply(x.samples);
  return out;
}

}  // namespace

Waveform apply_tf_filter(const Waveform& x, const TfFilter& m) { return run(x, m, false); }

Waveform apply_tf_filter_inverse(const Waveform& x, const TfFilter& m) { return run(x, m, true); }

}  // namespace fpvoc::dsp
