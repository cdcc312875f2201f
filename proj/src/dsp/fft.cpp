// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#include "fpvoc/dsp/fft.hpp"

#include <cmath>
#include <numbers>

#include "fpvoc/error.hpp"

namespace fpvoc::dsp {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

FftPlan::FftPlan(std::size_t size) : size_(size), bitrev_(size), twiddles_(size / 2) {
  if (!is_power_of_two(size)) throw ConfigError("FFT size must be a power of two");
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = Complex(std::cos(phase), std::sin(phase));
  }
}

void FftPlan::transform(std::span<Complex> data, bool inverse) const {
  if (data.size() != size_) throw ShapeError("FFT buffer size does not match plan");
  for (std::size_t i = 0; i < size_; ++i) {
    if (i < bitrev_[i]) std::swap(data[i], data[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        Complex w = twiddles_[j * step];
        if (inverse) w = std::conj(w);
        const Complex a = data[start + j];
        const Complex b = data[start + j + half] * w;
        data[start + j] = a + b;
        data[start + j + half] = a - b;
      }
    }
  }
}

void FftPlan::forward(std::span<Complex> data) const { transform(data, false); }

void FftPlan::inverse_unscaled(std::span<Complex> data) const { transform(data, true); }

void FftPlan::forward_real(std::span<const double> input, std::span<Complex> half_spectrum) const {
  if (input.size() > size_) throw ShapeError("real FFT input longer than plan size");
  if (half_spectrum.size() != size_ / 2 + 1) throw ShapeError("half spectrum must have N/2+1 bins");
  std::vector<Complex> buf(size_);
  for (std::size_t i = 0; i < input.size(); ++i) buf[i] = input[i];
  transform(buf, false);
  for (std::size_t i = 0; i <= size_ / 2; ++i) half_spectrum[i] = buf[i];
}

}  // namespace fpvoc::dsp
