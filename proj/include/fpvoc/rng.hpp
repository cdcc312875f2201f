// Copyright 2026 The fpvoc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace fpvoc {

// Philox4x32-10 counter-based generator. The key is the seed; the 128-bit
// counter is (stream, position), so independent streams are derived by
// choosing different stream ids instead of sharing one mutable engine.
class Philox {
 public:
  Philox(std::uint64_t seed, std::uint64_t stream);

  std::uint32_t next_u32();
  /// Uniform in (0, 1], 53-bit resolution.
  double uniform();
  /// Standard normal via Box-Muller.
  double gaussian();

  std::vector<double> gaussian_vector(std::size_t n);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t position_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derive a stream id from a purpose tag and indices (e.g. step, batch item).
std::uint64_t stream_id(std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0);

}  // namespace fpvoc
