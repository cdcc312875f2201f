// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fpvoc::dsp {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n);

// In-place iterative radix-2 FFT. Twiddles and the bit-reversal table are
// computed once per plan; a plan is immutable after construction and can be
// shared between threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t size);

  std::size_t size() const { return size_; }

  // X[n] = sum_t x[t] exp(-2 pi i n t / N)
  void forward(std::span<Complex> data) const;
  // x[t] = sum_n X[n] exp(+2 pi i n t / N), no 1/N scaling
  void inverse_unscaled(std::span<Complex> data) const;

  // Real-input forward transform; returns the N/2+1 non-negative bins.
  // `input` may be shorter than N (zero-padded).
  void forward_real(std::span<const double> input, std::span<Complex> half_spectrum) const;

 private:
  void transform(std::span<Complex> data, bool inverse) const;

  std::size_t size_;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddles_;  // exp(-2 pi i k / N), k < N/2
};

}  // namespace fpvoc::dsp
